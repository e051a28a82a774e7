"""FastAPI service exposing the certnorms library.

Each endpoint is a thin, deterministic wrapper: it deserializes the request,
calls the corresponding library operation, and returns the result together
with whatever is needed to re-check it.  Library errors are mapped to HTTP
422 with the CLI exit code in the body.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..certificates import CbCertificate, from_ell1
from ..errors import CapExceededError, CertnormsError, InputValidationError
from ..hypercube import Partition, Polynomial
from ..matnorms import (
    bilinear_from_polynomial,
    cb_dualnorm_matrix,
    cb_norm_matrix,
    grothendieck_experiment,
    norm_inf_to_one,
    poly_inf_dualnorm,
)
from ..queryerror import (
    Sdp2Instance,
    eps_bilinear,
    eps_upper_via_cb,
    probe_open_question,
    verify_sdp2_instance,
)
from ..tensors import symmetric_tensor_of
from ..witness import build_family, extend_with_identity, ratio_report, varopoulos_certificate
from . import models as m

app = FastAPI(title="certnorms", version="1.0.0")


@app.exception_handler(CertnormsError)
async def _certnorms_error(request: Request, exc: CertnormsError):
    return JSONResponse(
        status_code=422,
        content=m.ErrorResponse(
            error=str(exc), kind=type(exc).__name__, exit_code=getattr(exc, "exit_code", 2)
        ).model_dump(),
    )


def _poly(obj: dict) -> Polynomial:
    if not isinstance(obj, dict) or "terms" not in obj or "n" not in obj:
        raise InputValidationError("polynomial payload must have 'n' and 'terms'")
    try:
        return Polynomial.from_json(obj)
    except CertnormsError:
        raise
    except Exception as exc:  # malformed JSON structure
        raise InputValidationError(f"bad polynomial payload: {exc}")


def _partition(obj: dict) -> Partition:
    try:
        return Partition.from_json(obj)
    except CertnormsError:
        raise
    except Exception as exc:
        raise InputValidationError(f"bad partition payload: {exc}")


def _bilinear_matrix(p: Polynomial, P: Partition):
    """Coefficient matrix when p is bilinear over a two-part partition,
    else None."""
    if P is None or len(P.parts) != 2 or not p.is_block_multilinear(P):
        return None
    return bilinear_from_polynomial(p, P).A


@app.get("/health")
async def health():
    return {"status": "ok"}


@app.post("/norms", response_model=m.NormsResponse)
async def norms(req: m.NormsRequest):
    p = _poly(req.poly)
    P = _partition(req.partition) if req.partition else None
    if p.n <= req.cap_enum:
        ninf = m.NormValue(value=float(p.norm_inf_exact(cap=req.cap_enum)), exact=True)
    else:
        lb = p.norm_inf_lower_local_search(seed=req.seed)
        ninf = m.NormValue(value=float(lb), exact=False, note="local-search lower bound")
    n1 = m.NormValue(value=float(p.norm_one_exact(cap=req.cap_enum)), exact=True)
    inf_to_one = None
    cb = None
    A = _bilinear_matrix(p, P) if P is not None else None
    if A is not None:
        inf_to_one = float(norm_inf_to_one(A))
        iv = cb_norm_matrix(A, seed=req.seed)
        cb = m.IntervalModel(lower=iv.lower, upper=iv.upper)
    return m.NormsResponse(norm_inf=ninf, norm_one=n1, inf_to_one=inf_to_one, cb=cb)


@app.post("/dual-norms", response_model=m.DualNormsResponse)
async def dual_norms(req: m.DualNormsRequest):
    p = _poly(req.poly)
    P = _partition(req.partition)
    iv = poly_inf_dualnorm(p, P)
    inf_dual = m.IntervalModel(lower=iv.lower, upper=iv.upper)
    cbdual = None
    source = ""
    A = _bilinear_matrix(p, P)
    if A is not None:
        cb_iv = cb_dualnorm_matrix(A, tol=req.tol, seed=req.seed)
        cbdual = m.IntervalModel(lower=cb_iv.lower, upper=cb_iv.upper)
        source = "gamma2 interval (SDP cutting planes / factorization)"
    elif p.is_block_multilinear(P):
        t = len(P.parts)
        T = symmetric_tensor_of(p, t).scale(math.factorial(t))
        upper = None
        if req.certificate is not None:
            cert = CbCertificate.from_json(req.certificate)
            cert.require_valid()
            R = cert.realize()
            diff = (R + T.scale(-1)).l1()
            if float(diff) > 1e-9 * max(1.0, float(T.l1())):
                raise InputValidationError(
                    f"certificate does not realize {t}! times the symmetric tensor "
                    f"(l1 mismatch {float(diff)})"
                )
            upper = float(cert.w)
            source = "caller certificate (validated: contractions + exact realization)"
        else:
            try:
                upper = float(from_ell1(T).w)
                source = "l1 basis certificate"
            except CapExceededError:
                upper = None
        if upper is not None:
            cbdual = m.IntervalModel(lower=0.0, upper=upper)
    return m.DualNormsResponse(inf_dual=inf_dual, cbdual=cbdual, cbdual_upper_source=source)


@app.post("/query-error", response_model=m.QueryErrorResponse)
async def query_error(req: m.QueryErrorRequest):
    if req.matrix is not None:
        import numpy as np

        A = np.asarray(req.matrix, dtype=float)
    elif req.poly is not None and req.partition is not None:
        p = _poly(req.poly)
        P = _partition(req.partition)
        A = _bilinear_matrix(p, P)
        if A is None:
            raise InputValidationError("query-error needs a bilinear form over two parts")
    else:
        raise InputValidationError("provide a matrix, or a polynomial with a two-part partition")
    res = eps_bilinear(A, tol=req.tol, seed=req.seed)
    cb = cb_norm_matrix(A, seed=req.seed)
    inf_nrm = norm_inf_to_one(A)
    gt = min(1.0, max(0.0, inf_nrm * (1.0 - 1.0 / max(cb.upper, inf_nrm, 1e-300))))
    return m.QueryErrorResponse(
        eps=m.IntervalModel(lower=res.lower, upper=res.upper),
        gap=res.gap,
        converged=res.converged,
        almost_gt_upper=gt,
    )


@app.post("/kg-bounds")
async def kg_bounds(req: m.KgBoundsRequest):
    report = grothendieck_experiment(req.k, req.samples, seed=req.seed)
    return report.to_json()


@app.post("/witness", response_model=m.WitnessResponse)
async def witness(req: m.WitnessRequest):
    rows = ratio_report(req.n_list)
    out = [
        m.WitnessRow(
            n=r.n,
            q_norm2_sq=r.q_norm2_sq,
            squarefree_count=r.squarefree_count,
            q_norm_inf=r.q_norm_inf,
            exact=r.exact,
            cbdual_upper=r.cbdual_upper,
            infdual_lower=r.infdual_lower,
            ratio=r.ratio,
            eps_lower=r.eps_lower,
            r_norm_1=r.r_norm_1,
        )
        for r in rows
    ]
    cert_json = None
    if req.dump_cert_n is not None:
        cert = extend_with_identity(varopoulos_certificate(req.dump_cert_n))
        cert.require_valid()
        cert_json = cert.to_json()
    return m.WitnessResponse(rows=out, certificate=cert_json)


@app.post("/probe-open-question", response_model=m.ProbeResponse)
async def probe(req: m.ProbeRequest):
    rows = probe_open_question(
        req.samples, req.k, seed=req.seed, tol=req.tol, include_fixtures=req.include_fixtures
    )
    return m.ProbeResponse(
        rows=[
            m.ProbeRow(
                index=r.index,
                eps_lower=r.eps_lower,
                eps_upper=r.eps_upper,
                almost_gt_lower=r.almost_gt_lower,
                almost_gt_upper=r.almost_gt_upper,
                gap_to_bound=r.gap_to_bound,
            )
            for r in rows
        ]
    )


@app.post("/verify-sdp2", response_model=m.VerifySdp2Response)
async def verify_sdp2(req: m.VerifySdp2Request):
    try:
        inst = Sdp2Instance.from_json(req.instance)
    except CertnormsError:
        raise
    except Exception as exc:
        raise InputValidationError(f"bad instance payload: {exc}")
    P = _partition(req.partition)
    p = _poly(req.poly)
    v = verify_sdp2_instance(inst, P, p, tol=req.tol)
    return m.VerifySdp2Response(ok=v.ok, value=v.value, violations=list(v.violations))
