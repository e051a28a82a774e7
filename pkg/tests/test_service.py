import math

import pytest

from certnorms.cli import _post_inprocess
from certnorms.hypercube import Partition, Polynomial


def post(path, payload):
    resp = _post_inprocess(path, payload)
    return resp.status_code, resp.json()


def chsh_payloads():
    p = Polynomial(4, {(1, 0, 1, 0): 1, (1, 0, 0, 1): 1, (0, 1, 1, 0): 1, (0, 1, 0, 1): -1})
    P = Partition(4, [[1, 2], [3, 4]])
    return p.to_json(), P.to_json()


def test_health():
    code, body = post("/health", {})
    # POST on a GET route is 405; use the right verb through the transport
    import asyncio

    import httpx

    from certnorms.service.app import app

    async def go():
        async with httpx.AsyncClient(
            transport=httpx.ASGITransport(app=app), base_url="http://t"
        ) as client:
            return await client.get("/health")

    resp = asyncio.run(go())
    assert resp.status_code == 200 and resp.json() == {"status": "ok"}


def test_norms_endpoint_bilinear_view():
    poly, part = chsh_payloads()
    code, body = post("/norms", {"poly": poly, "partition": part})
    assert code == 200
    assert body["norm_inf"]["value"] == pytest.approx(2.0)
    assert body["norm_inf"]["exact"]
    assert body["inf_to_one"] == pytest.approx(2.0)
    cb = body["cb"]
    assert cb["lower"] <= 2 * math.sqrt(2) <= cb["upper"]


def test_dual_norms_endpoint_bilinear():
    poly, part = chsh_payloads()
    code, body = post("/dual-norms", {"poly": poly, "partition": part})
    assert code == 200
    assert body["cbdual"]["lower"] <= math.sqrt(2) <= body["cbdual"]["upper"]


def test_query_error_endpoint():
    code, body = post("/query-error", {"matrix": [[0.5, 0.5], [0.5, -0.5]], "tol": 1e-4})
    assert code == 200
    target = 1 - 1 / math.sqrt(2)
    assert body["eps"]["lower"] <= target + 1e-9 <= body["eps"]["upper"] + 2e-9
    assert body["eps"]["upper"] <= body["almost_gt_upper"] + 1e-6


def test_validation_error_carries_exit_code():
    code, body = post("/norms", {"poly": {"n": 2, "terms": [{"alpha": [1, 1, 1], "c": 1}]}})
    assert code == 422
    assert body["exit_code"] == 2


def test_witness_endpoint_with_certificate():
    code, body = post("/witness", {"n_list": [3], "dump_cert_n": 3})
    assert code == 200
    assert body["rows"][0]["ratio"] == pytest.approx(1.0)
    cert = body["certificate"]
    assert cert is not None
    # round-trip the certificate and recheck it against 4! T_{r_3}
    from certnorms.certificates import CbCertificate
    from certnorms.tensors import symmetric_tensor_of
    from certnorms.witness import build_family

    back = CbCertificate.from_json(cert)
    back.require_valid()
    fam = build_family(3)
    T = symmetric_tensor_of(fam.r, 4).scale(24)
    diff = (back.realize() + T.scale(-1)).l1()
    assert float(diff) < 1e-9


def test_verify_sdp2_endpoint_accepts_and_rejects():
    from certnorms.queryerror import sdp2_from_polynomial, sdp2_parity_lift

    p = Polynomial(4, {(1, 0, 1, 0): 0.5, (0, 1, 0, 1): -0.25})
    P = Partition(4, [[1, 2], [3, 4]])
    inst = sdp2_parity_lift(sdp2_from_polynomial(p, P), P)
    req = {"instance": inst.to_json(), "partition": P.to_json(), "poly": p.to_json()}
    code, body = post("/verify-sdp2", req)
    assert code == 200 and body["ok"]

    bad = inst.to_json()
    bad["w"] = bad["w"] + 0.5
    code, body = post("/verify-sdp2", {**req, "instance": bad})
    assert code == 200 and not body["ok"] and body["violations"]


def test_probe_endpoint():
    code, body = post("/probe-open-question", {"samples": 2, "k": 2, "seed": 1})
    assert code == 200
    for row in body["rows"]:
        assert row["eps_upper"] <= row["almost_gt_upper"] + 1e-4
