"""Certified bounds on the least additive error of t-query quantum
algorithms computing block-multilinear forms.

Core identity (minimax): for p in the block-multilinear space of a
partition into 2t parts,

    E(p, t) = sup { <p, r> - ||r||_{cb,*}  :  r, ||r||_{inf,*} <= 1 }.

For bilinear forms (t = 1) both dual norms are certifiable (gamma2 and the
sign-dyad decomposition norm), which yields two-sided intervals.  The
module also verifies explicit feasible instances of the equivalent
single-map SDP formulation (operator family over [n+1], parity-indexed
coefficient constraints).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .certificates import (
    CbCertificate,
    CertifiedInterval,
    from_ell1,
    parity_lift,
)
from .errors import (
    CapExceededError,
    CertifiedBoundError,
    DimensionMismatchError,
    InputValidationError,
)
from .hypercube import Partition, Polynomial
from .matnorms import (
    BilinearForm,
    bipartite_embedding,
    cb_norm_matrix,
    norm_inf_to_one,
    norm_inf_to_one_witness,
    _sign_vectors,
)
from .numopt import lp_solve_ineq, sdp_diag_max
from .tensors import Tensor, multiset_orderings

EPS_BILINEAR_CAP = 4
SDP2_N_CAP = 8
SDP2_T_CAP = 2
MAX_CUTS = 500


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, float(x)))


@dataclass
class QueryErrorResult:
    lower: float
    upper: float
    lower_witness: object = None
    upper_witness: object = None
    converged: bool = True

    def __post_init__(self):
        if self.lower > self.upper + 1e-6:
            raise CertifiedBoundError(
                f"query-error interval inverted: {self.lower} > {self.upper}"
            )

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def to_json(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "gap": self.gap,
            "converged": self.converged,
        }


# ---------------------------------------------------------------------------
# upper bound from the cb norm (the "almost Grothendieck" bound)
# ---------------------------------------------------------------------------

def eps_upper_via_cb(
    p: Polynomial,
    P: Partition,
    cb_upper: Optional[float] = None,
    allow_l1: bool = False,
) -> float:
    """||p||_inf * (1 - 1/UB(||p||_cb)): a valid upper bound on E(p, t),
    monotone in the cb upper bound.

    For bilinear p the certified matrix-SDP upper bound is used.  For higher
    orders a caller-supplied bound or (with allow_l1) the coefficient-l1
    bound is accepted; otherwise the call refuses.
    """
    if not p.is_block_multilinear(P):
        raise InputValidationError("polynomial is not in the block-multilinear space of P")
    if not p.terms:
        return 0.0
    norm_inf = float(p.norm_inf_exact())
    if cb_upper is None:
        if len(P.parts) == 2:
            from .matnorms import bilinear_from_polynomial

            B = bilinear_from_polynomial(p, P)
            cb_upper = cb_norm_matrix(B.A).upper
        elif allow_l1:
            # each monomial has cb norm 1, so the coefficient l1 is an upper bound
            cb_upper = float(p.coefficients_l1())
        else:
            raise InputValidationError(
                "no certified cb upper bound available for order > 2; "
                "pass cb_upper or set allow_l1=True"
            )
    # ||p||_cb >= ||p||_inf always; tighten a sloppy bound accordingly
    cb_upper = max(float(cb_upper), norm_inf)
    if cb_upper <= 1.0:
        return 0.0
    return _clamp01(norm_inf * (1.0 - 1.0 / cb_upper))


# ---------------------------------------------------------------------------
# certified E(p, 1) for bilinear forms
# ---------------------------------------------------------------------------

def _gamma2_from_combination(nus, cut_factors, B, residual_scale=1.0):
    """Certified gamma2 upper bound for B = sum nu_c M_c + E where each M_c
    comes with a unit-row Gram factorization (U_c, V_c): gamma2 <= sum(nu)
    plus the entrywise l1 mass of the residual E."""
    total = float(np.sum(nus))
    G = np.zeros_like(B)
    for nu, (U, V) in zip(nus, cut_factors):
        G += nu * (U @ V.T)
    resid = float(np.abs(B - G).sum())
    return total + resid


def eps_bilinear(
    form,
    tol: float = 5e-3,
    seed: int = 0,
    max_iter: int = 200,
) -> QueryErrorResult:
    """Certified interval for E(p, 1) of the bilinear form p(x,y) = x^T A y.

    Upper side: E = min ||A - Q||_{inf->1} over ||Q||_cb <= 1.  The cb ball
    is outer-approximated by correlation cuts <Q, M> <= 1 grown from SDP
    primal witnesses; every candidate Q is rescaled into the true ball by a
    certified cb upper bound, and its objective evaluated exactly, so every
    reported upper bound is valid.  The candidate A/UB(||A||_cb) is always
    included (hence the bound never exceeds the cb-based theorem bound).

    Lower side: the LP dual prices assemble B = sum mu_d (dyad d), which
    carries an explicit dyad decomposition (||B||_{inf->1,*} <= sum mu = 1)
    and an explicit Gram combination of the active cuts (certified gamma2
    upper bound); <A, B> - gamma2_UB(B) is then a valid lower bound via the
    minimax identity.
    """
    A = form.A if isinstance(form, BilinearForm) else np.atleast_2d(np.asarray(form, dtype=float))
    k = A.shape[0]
    if A.shape != (k, k):
        raise InputValidationError("expected a square matrix")
    if k > EPS_BILINEAR_CAP:
        raise CapExceededError(f"eps_bilinear cap is k <= {EPS_BILINEAR_CAP}")
    if not np.any(A):
        return QueryErrorResult(lower=0.0, upper=0.0)

    Xs = _sign_vectors(k, fix_first=True)
    Ys = _sign_vectors(k)
    dyads = [np.outer(x, y).astype(float) for x in Xs for y in Ys]
    nd = len(dyads)

    # always-valid upper candidate: scale A into the cb ball
    cbA = cb_norm_matrix(A, seed=seed)
    best_upper = np.inf
    best_Q = None

    def try_upper(Q):
        nonlocal best_upper, best_Q
        sdp = sdp_diag_max(bipartite_embedding(Q), seed=seed, restarts=4)
        scale = max(1.0, sdp.dual_value)
        Qf = Q / scale
        val = norm_inf_to_one(A - Qf)
        if val < best_upper:
            best_upper = val
            best_Q = Qf
        return sdp

    try_upper(A / max(1.0, cbA.upper))

    # cutting-plane LP over (Q, s)
    cuts: List[np.ndarray] = []  # entrywise cut matrices M with gamma2(M) <= 1
    cut_factors: List[Tuple[np.ndarray, np.ndarray]] = []
    best_lower = 0.0
    best_B = None
    n_var = k * k + 1
    dyad_rows = np.zeros((nd, n_var))
    dyad_b = np.zeros(nd)
    for m, d in enumerate(dyads):
        dyad_rows[m, : k * k] = -d.ravel()
        dyad_rows[m, -1] = -1.0
        dyad_b[m] = -float(np.sum(A * d))
    obj = np.zeros(n_var)
    obj[-1] = 1.0

    converged = False
    for it in range(max_iter):
        if cuts:
            cut_rows = np.zeros((len(cuts), n_var))
            for c_idx, M in enumerate(cuts):
                cut_rows[c_idx, : k * k] = M.ravel()
            A_ub = np.vstack([dyad_rows, cut_rows])
            b_ub = np.concatenate([dyad_b, np.ones(len(cuts))])
        else:
            A_ub, b_ub = dyad_rows, dyad_b
        res = lp_solve_ineq(obj, A_ub=A_ub, b_ub=b_ub, maximize=False)
        if res.status != "optimal":
            raise CertifiedBoundError(f"eps LP returned {res.status}")
        Q = res.x[: k * k].reshape(k, k)
        sdp = try_upper(Q)

        # certified lower bound from the dual prices
        y = -res.y_ub  # minimise convention: y_ub <= 0
        mu = np.maximum(y[:nd], 0.0)
        nus = np.maximum(y[nd:], 0.0)
        mu_total = float(mu.sum())
        if mu_total > 1e-12:
            B = sum(m_ * d for m_, d in zip(mu, dyads))
            gamma_ub = _gamma2_from_combination(nus, cut_factors, B)
            lower_cand = (float(np.sum(A * B)) - gamma_ub) / mu_total
            if lower_cand > best_lower:
                best_lower = lower_cand
                best_B = B / mu_total

        if best_upper - best_lower <= tol:
            converged = True
            break
        if sdp.primal_value > 1.0 + 1e-9 and len(cuts) < MAX_CUTS:
            V = sdp.V
            norms = np.linalg.norm(V, axis=1)
            V = V / np.maximum(norms, 1e-300)[:, None]
            cuts.append(V[:k] @ V[k:].T)
            cut_factors.append((V[:k], V[k:]))
        else:
            # relaxation is exact but the gap persists: polish no further
            break

    return QueryErrorResult(
        lower=_clamp01(best_lower),
        upper=_clamp01(best_upper),
        lower_witness=best_B,
        upper_witness=best_Q,
        converged=converged or best_upper - best_lower <= tol,
    )


# ---------------------------------------------------------------------------
# lower bounds from explicit witnesses (any order)
# ---------------------------------------------------------------------------

def eps_lower_from_witness(
    p: Polynomial,
    r: Polynomial,
    cert: CbCertificate,
    ub_infdual: float,
    validate: bool = True,
) -> float:
    """(<p, r> - w)/UB(||r||_{inf,*}): a valid lower bound on E(p, t).

    The certificate must realize (2t)! times the symmetric tensor of r
    (proving ||r||_{cb,*} <= w); `ub_infdual` must upper-bound the dual
    sup-norm of r.  Both claims are re-validated here unless validate=False
    (the full entrywise check is the expensive part).
    """
    if p.n != r.n:
        raise DimensionMismatchError("polynomials over different n")
    if ub_infdual <= 0:
        raise InputValidationError("dual-norm upper bound must be positive")
    if validate:
        cert.require_valid()
        from .tensors import symmetric_tensor_of
        import math as _math

        deg = r.degree()
        T = symmetric_tensor_of(r, deg).scale(_math.factorial(deg))
        R = cert.realize()
        keys = set(T.entries) | set(R.entries)
        for ind in keys:
            got = float(R.entries.get(ind, 0))
            want = float(T.entries.get(ind, 0))
            if abs(got - want) > 1e-9 * max(1.0, abs(want)):
                raise CertifiedBoundError(
                    f"certificate does not realize the tensor of r at {ind}: {got} vs {want}"
                )
    value = (float(p.inner(r)) - cert.w) / float(ub_infdual)
    return max(0.0, value)


# ---------------------------------------------------------------------------
# explicit SDP instances (single-map formulation over [n+1])
# ---------------------------------------------------------------------------

@dataclass
class Sdp2Instance:
    """Explicit feasible-instance data: vectors u, v with squared norm w,
    contraction family over [n+1], multilinear r whose coefficients must
    match <u, A(i) v> under the parity index map alpha(i)."""

    n: int
    t: int  # number of queries: the operator word length is 2t
    d: int
    u: np.ndarray
    v: np.ndarray
    w: float
    A: Dict[int, np.ndarray]  # indices 1..n+1; missing => zero operator
    r: Polynomial

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.w = float(self.w)
        self.A = {int(i): np.asarray(M, dtype=float) for i, M in self.A.items()}

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "t": self.t,
            "d": self.d,
            "w": self.w,
            "u": [float(x) for x in self.u],
            "v": [float(x) for x in self.v],
            "A": [
                {"i": i, "rows": [[float(x) for x in row] for row in self.A[i]]}
                for i in sorted(self.A)
            ],
            "r": self.r.to_json(),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "Sdp2Instance":
        return cls(
            n=int(obj["n"]),
            t=int(obj["t"]),
            d=int(obj["d"]),
            u=np.asarray(obj["u"], dtype=float),
            v=np.asarray(obj["v"], dtype=float),
            w=float(obj["w"]),
            A={int(e["i"]): np.asarray(e["rows"], dtype=float) for e in obj.get("A", [])},
            r=Polynomial.from_json(obj["r"]),
        )


def alpha_of_tuple(ind: Sequence[int], n: int) -> Tuple[int, ...]:
    """Parity exponent vector: alpha_m = 1 iff m <= n occurs an odd number
    of times in the tuple (occurrences of n+1 are discarded)."""
    alpha = [0] * n
    for i in ind:
        if 1 <= i <= n:
            alpha[i - 1] ^= 1
    return tuple(alpha)


def all_orderings_tensor(r: Polynomial, order: int) -> Tensor:
    """Tensor with entry c_alpha at every ordering of each degree-`order`
    multilinear monomial of r (the coefficient itself, not split)."""
    entries = {}
    for alpha, c in r.terms.items():
        if sum(alpha) != order or any(a > 1 for a in alpha):
            raise InputValidationError("polynomial must be multilinear homogeneous")
        multiset = [i + 1 for i, a in enumerate(alpha) if a]
        for ind in multiset_orderings(multiset):
            entries[ind] = c
    return Tensor(r.n, order, entries)


def sdp2_from_polynomial(r: Polynomial, P: Partition) -> Sdp2Instance:
    """Feasible instance realizing a block-multilinear r via the basis (l1)
    certificate: weight (2t)! * l1(coefficients); A(n+1) = 0 implicitly."""
    if not r.is_block_multilinear(P):
        raise InputValidationError("polynomial is not block-multilinear for P")
    two_t = len(P.parts)
    if two_t % 2:
        raise InputValidationError("partition must have an even number of parts")
    R = all_orderings_tensor(r, two_t)
    cert = from_ell1(R)
    return Sdp2Instance(
        n=r.n,
        t=two_t // 2,
        d=cert.d,
        u=np.asarray(cert.u, dtype=float),
        v=np.asarray(cert.v, dtype=float),
        w=cert.w,
        A={i: np.asarray(M, dtype=float) for i, M in cert.A.items()},
        r=r,
    )


def sdp2_parity_lift(instance: Sdp2Instance, P: Partition) -> Sdp2Instance:
    """Lift an instance through the sign-averaging construction so its
    realization is the parity projection onto W_P; the projected r stays
    feasible and the weight is unchanged."""
    if P.n != instance.n:
        raise DimensionMismatchError("partition over different n")
    fam = {i: M for i, M in instance.A.items() if i <= instance.n}
    lifted = parity_lift(
        [fam] * (2 * instance.t),
        instance.u,
        instance.v,
        n=instance.n,
        Q=P,
        w=instance.w,
    )
    r_proj = instance.r.project_WQ(P)
    return Sdp2Instance(
        n=instance.n,
        t=instance.t,
        d=lifted.d,
        u=np.asarray(lifted.u, dtype=float),
        v=np.asarray(lifted.v, dtype=float),
        w=lifted.w,
        A={i: np.asarray(M, dtype=float) for i, M in lifted.A.items()},
        r=r_proj,
    )


@dataclass
class Sdp2Verification:
    ok: bool
    value: Optional[float]
    violations: List[str] = field(default_factory=list)


def verify_sdp2_instance(
    instance: Sdp2Instance,
    P: Partition,
    p: Polynomial,
    tol: float = 1e-8,
) -> Sdp2Verification:
    """Check every constraint of the single-map formulation and, on success,
    return the objective (<p, r> - w)/||r||_1.

    Checks: ||u||^2 = ||v||^2 = w; every operator a contraction; r in the
    parity space of P; c_{alpha(i)} = <u, A(i) v> for all i in [n+1]^{2t}.
    Violations are reported with the offending item.
    """
    n, t = instance.n, instance.t
    if n > SDP2_N_CAP or t > SDP2_T_CAP:
        raise CapExceededError(f"verification cap is n <= {SDP2_N_CAP}, t <= {SDP2_T_CAP}")
    if P.n != n or p.n != n:
        raise DimensionMismatchError("dimension mismatch between instance, partition, polynomial")
    violations: List[str] = []
    nu = float(instance.u @ instance.u)
    nv = float(instance.v @ instance.v)
    scale = max(1.0, abs(instance.w))
    if abs(nu - instance.w) > tol * scale:
        violations.append(f"||u||^2 = {nu} differs from w = {instance.w}")
    if abs(nv - instance.w) > tol * scale:
        violations.append(f"||v||^2 = {nv} differs from w = {instance.w}")
    from .numopt import operator_norm

    for i in sorted(instance.A):
        if not 1 <= i <= n + 1:
            violations.append(f"operator index {i} outside 1..{n + 1}")
            continue
        M = instance.A[i]
        if M.shape != (instance.d, instance.d):
            violations.append(f"A({i}) has shape {M.shape}, expected {(instance.d, instance.d)}")
            continue
        nrm = operator_norm(M)
        if nrm > 1.0 + 1e-9:
            violations.append(f"||A({i})|| = {nrm} exceeds 1")
    # r must lie in the parity space of P
    if instance.r.project_WQ(P) != instance.r:
        violations.append("r has coefficients outside the parity space of P")
    if violations:
        return Sdp2Verification(ok=False, value=None, violations=violations)

    zero = np.zeros((instance.d, instance.d))
    ops = {i: instance.A.get(i, zero) for i in range(1, n + 2)}
    coef_scale = max([1.0] + [abs(float(c)) for c in instance.r.terms.values()])
    # depth-first over [n+1]^{2t} with shared suffix products
    bad: List[str] = []

    def dfs(suffix: Tuple[int, ...], vec):
        if len(bad) >= 20:
            return
        if len(suffix) == 2 * t:
            got = float(instance.u @ vec)
            alpha = alpha_of_tuple(suffix, n)
            want = float(instance.r.terms.get(alpha, 0))
            if abs(got - want) > tol * coef_scale:
                bad.append(f"tuple {suffix}: <u, A(i) v> = {got}, coefficient = {want}")
            return
        for i in range(1, n + 2):
            dfs((i,) + suffix, ops[i] @ vec)

    dfs((), instance.v)
    if bad:
        if len(bad) >= 20:
            bad.append("... (reporting capped at 20 tuples)")
        return Sdp2Verification(ok=False, value=None, violations=bad)
    r1 = float(instance.r.norm_one_exact())
    if r1 == 0.0:
        return Sdp2Verification(ok=False, value=None, violations=["r is zero (objective undefined)"])
    value = (float(p.inner(instance.r)) - instance.w) / r1
    return Sdp2Verification(ok=True, value=value, violations=[])


# ---------------------------------------------------------------------------
# XOR games
# ---------------------------------------------------------------------------

@dataclass
class XorGameRecord:
    pi: np.ndarray  # question distribution |A_ij| / sum|A|
    mass: float  # sum |A_ij|
    classical_unnormalized: float
    quantum_unnormalized: CertifiedInterval
    classical_normalized: float
    quantum_normalized: CertifiedInterval

    def to_json(self) -> dict:
        return {
            "pi": [[float(x) for x in row] for row in self.pi],
            "mass": self.mass,
            "classical_unnormalized": self.classical_unnormalized,
            "quantum_unnormalized": self.quantum_unnormalized.to_json(),
            "classical_normalized": self.classical_normalized,
            "quantum_normalized": self.quantum_normalized.to_json(),
        }


def xor_game_values(A, seed: int = 0) -> XorGameRecord:
    """Classical and quantum biases of the two-player XOR game with signs
    sign(A_ij) and question distribution proportional to |A_ij|.

    Both conventions are reported: unnormalized (the inf->1 norm and cb
    interval of A itself) and normalized by the total mass sum|A_ij|; the
    source display omits the normalization its stated distribution implies,
    so neither convention is guessed.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    mass = float(np.abs(A).sum())
    if mass == 0.0:
        raise InputValidationError("XOR game requires a nonzero matrix")
    classical = norm_inf_to_one(A)
    quantum = cb_norm_matrix(A, seed=seed)
    return XorGameRecord(
        pi=np.abs(A) / mass,
        mass=mass,
        classical_unnormalized=classical,
        quantum_unnormalized=quantum,
        classical_normalized=classical / mass,
        quantum_normalized=CertifiedInterval(
            lower=quantum.lower / mass, upper=quantum.upper / mass
        ),
    )


# ---------------------------------------------------------------------------
# open-question probe
# ---------------------------------------------------------------------------

@dataclass
class OpenQuestionRow:
    index: int
    eps_lower: float
    eps_upper: float
    almost_gt_lower: float
    almost_gt_upper: float

    @property
    def gap_to_bound(self) -> float:
        """Distance between the theorem bound and the certified E interval."""
        return self.almost_gt_lower - self.eps_upper


def probe_open_question(
    samples: int,
    k: int,
    seed: int = 0,
    tol: float = 5e-3,
    include_fixtures: bool = True,
) -> List[OpenQuestionRow]:
    """For sampled bounded bilinear forms, compare the certified E(p,1)
    interval with the cb-based theorem bound ||p||_inf (1 - 1/||p||_cb).

    Only the inequality E <= bound is a theorem; equality (the open
    question) is reported as a per-sample gap, never asserted.
    """
    if k > 3:
        raise CapExceededError("open-question probe cap is k <= 3")
    rng = np.random.default_rng(seed)
    rows: List[OpenQuestionRow] = []
    mats: List[np.ndarray] = []
    if include_fixtures and k == 2:
        mats.append(np.array([[1.0, 1.0], [1.0, -1.0]]) / 2.0)
    while len(mats) < samples:
        A = rng.uniform(-1.0, 1.0, size=(k, k))
        nrm = norm_inf_to_one(A)
        if nrm < 1e-9:
            continue
        mats.append(A / nrm)  # bounded form: ||p||_inf = 1
    for idx, A in enumerate(mats[:samples]):
        eps = eps_bilinear(A, tol=tol, seed=seed + idx)
        cb = cb_norm_matrix(A, seed=seed + idx)
        inf_norm = norm_inf_to_one(A)
        gt_lower = _clamp01(inf_norm * (1.0 - 1.0 / max(cb.lower, inf_norm, 1e-300)))
        gt_upper = _clamp01(inf_norm * (1.0 - 1.0 / max(cb.upper, inf_norm)))
        if eps.upper > gt_upper + 1e-4:
            raise CertifiedBoundError(
                f"sample {idx}: certified E upper {eps.upper} exceeds the theorem bound {gt_upper}"
            )
        rows.append(
            OpenQuestionRow(
                index=idx,
                eps_lower=eps.lower,
                eps_upper=eps.upper,
                almost_gt_lower=gt_lower,
                almost_gt_upper=gt_upper,
            )
        )
    return rows


def open_question_csv(rows: Sequence[OpenQuestionRow]) -> str:
    import csv as _csv
    import io as _io

    buf = _io.StringIO()
    writer = _csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "eps_lower", "eps_upper", "almost_gt_lower", "almost_gt_upper", "gap_to_bound"])
    for r in rows:
        writer.writerow(
            [
                r.index,
                f"{r.eps_lower:.12g}",
                f"{r.eps_upper:.12g}",
                f"{r.almost_gt_lower:.12g}",
                f"{r.almost_gt_upper:.12g}",
                f"{r.gap_to_bound:.12g}",
            ]
        )
    return buf.getvalue()
