"""Matrix and bilinear-form norms with certified intervals.

Covers the exact sign-vector norm ||A||_{inf->1}, the completely bounded
norm of a matrix (an SDP over unit-vector assignments), both dual norms
(nu = minimal l1 mass over sign dyads; gamma2 = minimal Gram factorization
bound), the polynomial dual norm on a block-multilinear space, and the
Grothendieck-ratio experiment.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .certificates import CertifiedInterval
from .errors import (
    CapExceededError,
    CertifiedBoundError,
    DimensionMismatchError,
    InputValidationError,
)
from .hypercube import Partition, Polynomial
from .numopt import (
    eig_sym,
    lp_solve,
    lp_solve_ineq,
    min_eigenvalue,
    operator_norm,
    psd_feasibility,
    sdp_diag_max,
)

INF_TO_ONE_CAP = 14
CB_MATRIX_CAP = 64
GAMMA2_CAP = 32
NU_LP_CAP = 4
POLY_DUAL_CAP = 14

#: the bracketing interval for the real Grothendieck constant
KG_BRACKET = (1.676, 1.782)


def _as_matrix(A) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputValidationError("expected a square matrix")
    return A


@dataclass(frozen=True)
class BilinearForm:
    """k x k matrix identified with p(x, y) = x^T A y on sign vectors."""

    A: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", _as_matrix(self.A))

    @property
    def k(self) -> int:
        return self.A.shape[0]

    def to_polynomial(self) -> Tuple[Polynomial, Partition]:
        """Block-multilinear polynomial over 2k variables: x-block 1..k,
        y-block k+1..2k."""
        k = self.k
        terms = {}
        for i in range(k):
            for j in range(k):
                if self.A[i, j] != 0:
                    alpha = [0] * (2 * k)
                    alpha[i] = 1
                    alpha[k + j] = 1
                    terms[tuple(alpha)] = float(self.A[i, j])
        P = Partition(2 * k, [range(1, k + 1), range(k + 1, 2 * k + 1)])
        return Polynomial(2 * k, terms), P


def bilinear_from_polynomial(p: Polynomial, P: Partition) -> BilinearForm:
    """Inverse of BilinearForm.to_polynomial for a two-block partition."""
    parts = sorted(P.parts, key=min)
    if len(parts) != 2:
        raise InputValidationError("bilinear form needs a two-block partition")
    if not p.is_block_multilinear(P):
        raise InputValidationError("polynomial is not block-multilinear for P")
    xs, ys = sorted(parts[0]), sorted(parts[1])
    if len(xs) != len(ys):
        raise InputValidationError("blocks of different sizes")
    pos_x = {v: i for i, v in enumerate(xs)}
    pos_y = {v: j for j, v in enumerate(ys)}
    k = len(xs)
    A = np.zeros((k, k))
    for alpha, c in p.terms.items():
        vars_ = [i + 1 for i, a in enumerate(alpha) if a]
        vx = [v for v in vars_ if v in pos_x]
        vy = [v for v in vars_ if v in pos_y]
        if len(vx) != 1 or len(vy) != 1:
            raise InputValidationError("monomial not of bilinear shape")
        A[pos_x[vx[0]], pos_y[vy[0]]] = float(c)
    return BilinearForm(A)


# ---------------------------------------------------------------------------
# ||A||_{inf -> 1}: exact sign enumeration
# ---------------------------------------------------------------------------

def _sign_vectors(k: int, fix_first: bool = False) -> np.ndarray:
    """All sign vectors in {-1,1}^k as rows; optionally with first entry +1."""
    count = 1 << (k - 1 if fix_first else k)
    bits = ((np.arange(count)[:, None] >> np.arange(k - 1 if fix_first else k)) & 1)
    Y = 1 - 2 * bits
    if fix_first:
        Y = np.hstack([np.ones((count, 1), dtype=Y.dtype), Y])
    return Y.astype(np.int64)


def norm_inf_to_one_witness(A) -> Tuple[float, np.ndarray, np.ndarray]:
    """max_{x,y in {-1,1}^k} x^T A y with an optimal sign pair.

    For each y the optimal x is sign(Ay), so only 2^{k-1} vectors y are
    enumerated (global sign symmetry fixes y_1 = +1).
    """
    A = _as_matrix(A)
    k = A.shape[0]
    if k > INF_TO_ONE_CAP:
        raise CapExceededError(f"inf->1 norm cap is k <= {INF_TO_ONE_CAP}, got {k}")
    Y = _sign_vectors(k, fix_first=True)
    vals = np.abs(A @ Y.T).sum(axis=0)
    best = int(np.argmax(vals))
    y = Y[best].astype(float)
    col = A @ y
    x = np.where(col >= 0, 1.0, -1.0)
    return float(vals[best]), x, y


def norm_inf_to_one(A) -> float:
    return norm_inf_to_one_witness(A)[0]


# ---------------------------------------------------------------------------
# ||A||_cb: correlation SDP on the bipartite embedding
# ---------------------------------------------------------------------------

def bipartite_embedding(A) -> np.ndarray:
    A = _as_matrix(A)
    k = A.shape[0]
    At = np.zeros((2 * k, 2 * k))
    At[:k, k:] = A / 2.0
    At[k:, :k] = A.T / 2.0
    return At


def cb_norm_matrix(A, seed: int = 0, restarts: int = 6) -> CertifiedInterval:
    """Certified interval for sup_{unit u_i, v_j} sum A_ij <u_i, v_j>.

    Lower side: explicit unit-vector assignment (low-rank SDP factor).
    Upper side: dual diagonal w with Diag(w) - embedding psd.
    """
    A = _as_matrix(A)
    if A.shape[0] > CB_MATRIX_CAP:
        raise CapExceededError(f"cb norm cap is k <= {CB_MATRIX_CAP}")
    res = sdp_diag_max(bipartite_embedding(A), seed=seed, restarts=restarts)
    return CertifiedInterval(
        lower=res.primal_value,
        upper=res.dual_value,
        lower_witness=res.V,
        upper_witness=res.dual_w,
    )


# ---------------------------------------------------------------------------
# gamma2-type dual cb norm
# ---------------------------------------------------------------------------

def _gamma2_feasible(B: np.ndarray, w: float, start=None, tol: float = 1e-9):
    """Alternating-projection feasibility of {[[X,B],[B^T,Y]] psd, diag <= w}."""
    k = B.shape[0]

    def project(Z):
        Z = 0.5 * (Z + Z.T)
        Z = Z.copy()
        Z[:k, k:] = B
        Z[k:, :k] = B.T
        d = np.diagonal(Z).copy()
        np.fill_diagonal(Z, np.minimum(d, w))
        return Z

    return psd_feasibility(project, 2 * k, start=start, tol=tol, max_iter=4000)


def gamma2_upper(B, tol: float = 1e-5) -> Tuple[float, Tuple[np.ndarray, np.ndarray]]:
    """Least w (within tol) admitting B_ij = <x_i, y_j> with all squared row
    norms <= w, by bisection + alternating projections; returns an exact
    factorization (X, Y) whose max squared row norm is the certified bound."""
    B = _as_matrix(B)
    k = B.shape[0]
    if k > GAMMA2_CAP:
        raise CapExceededError(f"gamma2 cap is k <= {GAMMA2_CAP}")
    if not np.any(B):
        return 0.0, (np.zeros((k, 1)), np.zeros((k, 1)))
    # gamma2 <= sigma_max: rows of U sqrt(S), V sqrt(S) have squared norm <= sigma_max
    hi = operator_norm(B) * (1 + 1e-9) + 1e-12
    lo = float(np.abs(B).max())  # |B_ij| = <x_i,y_j> <= w
    best = None
    res = _gamma2_feasible(B, hi)
    if not res.feasible:
        raise CertifiedBoundError("gamma2 bisection failed at its guaranteed upper start")
    best = (hi, res.point)
    start = res.point
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        res = _gamma2_feasible(B, mid, start=start)
        if res.feasible:
            hi = mid
            best = (mid, res.point)
            start = res.point
        else:
            lo = mid
    w, Z = best
    # extract a genuine factorization and repair the residual exactly
    vals, vecs = eig_sym(Z)
    F = vecs * np.sqrt(np.maximum(vals, 0.0))
    X, Y = F[:k], F[k:]
    E = B - X @ Y.T
    emax = float(np.abs(E).max())
    if emax > 0:
        c = math.sqrt(max(np.linalg.norm(E, axis=0).max(), 1e-300))
        X = np.hstack([X, c * np.eye(k)])
        Y = np.hstack([Y, E.T / c])
    w_cert = float(max((X * X).sum(axis=1).max(), (Y * Y).sum(axis=1).max()))
    residual = float(np.abs(B - X @ Y.T).max())
    if residual > 1e-9 * max(1.0, float(np.abs(B).max())):
        raise CertifiedBoundError(f"gamma2 factorization residual {residual} too large")
    return w_cert, (X, Y)


def _correlation_cut(X: np.ndarray, k: int) -> np.ndarray:
    """Top-right block of a correlation matrix: <Q, cut> = <embedding(Q), X>."""
    return X[:k, k:]


def gamma2_lower(
    B,
    tol: float = 1e-5,
    max_iter: int = 120,
    seed: int = 0,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Certified lower bound on gamma2(B) by exhibiting Q with a dual
    diagonal proving ||Q||_cb <= 1 and pairing <B, Q> <= gamma2(B).

    Search: cutting planes on {Q : <Q, cut(X)> <= 1 for all correlations X},
    with cuts generated by the cb-norm SDP primal witness of the current Q.
    Returns (bound, Q_scaled, dual_w) with Q_scaled certified.
    """
    B = _as_matrix(B)
    k = B.shape[0]
    if not np.any(B):
        return 0.0, np.zeros((k, k)), np.zeros(2 * k)
    cuts: List[np.ndarray] = []
    if k <= NU_LP_CAP:
        Xs = _sign_vectors(k, fix_first=True)
        Ys = _sign_vectors(k)
        for x in Xs:
            for y in Ys:
                cuts.append(np.outer(x, y).astype(float))
    else:
        rng = np.random.default_rng(seed)
        for _ in range(4 * k * k):
            x = rng.choice([-1.0, 1.0], size=k)
            y = rng.choice([-1.0, 1.0], size=k)
            cuts.append(np.outer(x, y))
    bvec = B.ravel()
    best_val = 0.0
    best_Q = np.zeros((k, k))
    best_w = np.zeros(2 * k)
    prev_lp = np.inf
    for it in range(max_iter):
        A_ub = np.array([c.ravel() for c in cuts])
        res = lp_solve_ineq(bvec, A_ub=A_ub, b_ub=np.ones(len(cuts)), maximize=True)
        if res.status != "optimal":
            break
        Q = res.x.reshape(k, k)
        lp_val = res.value
        sdp = sdp_diag_max(bipartite_embedding(Q), seed=seed + it, restarts=4)
        cb_ub = max(sdp.dual_value, 1e-300)
        scale = max(1.0, cb_ub)
        val = float(np.sum(B * Q)) / scale
        if val > best_val:
            best_val = val
            best_Q = Q / scale
            best_w = sdp.dual_w / scale
        if lp_val - best_val <= tol * max(1.0, best_val):
            break
        if sdp.primal_value <= 1.0 + 1e-9 and lp_val >= prev_lp - 1e-12:
            break
        prev_lp = lp_val
        X = sdp.V @ sdp.V.T
        cuts.append(_correlation_cut(X, k))
    return best_val, best_Q, best_w


def cb_dualnorm_matrix(B, tol: float = 1e-5, seed: int = 0) -> CertifiedInterval:
    """Certified interval for the dual cb norm (minimal Gram factorization
    weight) of a matrix."""
    upper, factor = gamma2_upper(B, tol=tol)
    lower, Q, w = gamma2_lower(B, tol=tol, seed=seed)
    return CertifiedInterval(
        lower=lower, upper=upper, lower_witness=(Q, w), upper_witness=factor
    )


# ---------------------------------------------------------------------------
# nu: dual of the inf->1 norm (sign-dyad l1 decompositions)
# ---------------------------------------------------------------------------

def inf_to_one_dualnorm(B) -> CertifiedInterval:
    """min sum(mu) over decompositions B = sum mu_m x_m y_m^T (mu >= 0, sign
    vectors; negations included, so this is the minimal l1 mass).

    Upper side: LP optimum with its explicit decomposition.
    Lower side: dual prices forming M with ||M||_{inf->1} <= 1 (verified by
    exact enumeration, rescaled if marginally violated), value <B, M>.
    """
    B = _as_matrix(B)
    k = B.shape[0]
    if k > NU_LP_CAP:
        raise CapExceededError(f"inf->1 dual norm cap is k <= {NU_LP_CAP}")
    if not np.any(B):
        return CertifiedInterval(lower=0.0, upper=0.0)
    Xs = _sign_vectors(k, fix_first=True)
    Ys = _sign_vectors(k)
    dyads = [np.outer(x, y).astype(float) for x in Xs for y in Ys]
    M = np.array([d.ravel() for d in dyads]).T  # k^2 rows, one column per dyad
    c = -np.ones(len(dyads))
    res = lp_solve(c, M, B.ravel())
    if res.status != "optimal":
        raise CertifiedBoundError(f"decomposition LP returned {res.status}")
    upper = -res.value
    decomposition = [
        (float(res.x[m]), Xs[m // len(Ys)], Ys[m % len(Ys)])
        for m in np.nonzero(res.x > 1e-12)[0]
    ]
    # duals: <dyad, W> <= 1 for every dyad (constraints M^T y >= c with c=-1)
    W = -res.dual.reshape(k, k)
    nrm, _, _ = norm_inf_to_one_witness(W)
    if nrm > 1.0:
        W = W / nrm
    lower = float(np.sum(B * W))
    return CertifiedInterval(
        lower=lower, upper=upper, lower_witness=W, upper_witness=decomposition
    )


# ---------------------------------------------------------------------------
# polynomial dual norm on a block-multilinear space
# ---------------------------------------------------------------------------

def block_multilinear_basis(P: Partition) -> List[Tuple[int, ...]]:
    """Monomials (as sorted variable tuples) with exactly one variable per part."""
    parts = sorted(P.parts, key=min)
    return [tuple(sorted(choice)) for choice in itertools.product(*[sorted(p) for p in parts])]


def parity_space_basis(P: Partition) -> List[Tuple[int, ...]]:
    """Multilinear monomials with odd intersection with every part of P
    (variables outside all parts excluded: the parts must cover [n] to span
    everything relevant)."""
    parts = sorted(P.parts, key=min)
    per_part: List[List[Tuple[int, ...]]] = []
    for part in parts:
        elems = sorted(part)
        subsets = [
            s
            for r in range(1, len(elems) + 1, 2)
            for s in itertools.combinations(elems, r)
        ]
        per_part.append(subsets)
    return [
        tuple(sorted(itertools.chain.from_iterable(choice)))
        for choice in itertools.product(*per_part)
    ]


def _eval_matrix(n: int, monomials: Sequence[Tuple[int, ...]]) -> np.ndarray:
    """2^n x len(monomials) matrix of chi_S(x) over all sign points."""
    if n > POLY_DUAL_CAP:
        raise CapExceededError(f"evaluation enumeration cap is n <= {POLY_DUAL_CAP}")
    X = _sign_vectors(n).astype(float)
    E = np.ones((X.shape[0], len(monomials)))
    for j, mono in enumerate(monomials):
        for v in mono:
            E[:, j] *= X[:, v - 1]
    return E


def poly_inf_dualnorm(p: Polynomial, P: Partition) -> CertifiedInterval:
    """Dual sup-norm of p with respect to the block-multilinear space of P,
    computed by two independent routes that must agree:

    (a) max <p, q> over q in the space with |q(x)| <= 1 everywhere, solved
        as the equivalent minimal point-evaluation decomposition LP;
    (b) min E|r(x)| over multilinear r in the odd-parity space of P whose
        top homogeneous part equals p.

    Disagreement beyond 1e-6 raises (bug trap).  Returns the common value
    with the witnesses of route (a): the measure (upper) and the extremal q
    (lower, re-verified by enumeration).
    """
    if not P.total:
        raise InputValidationError("partition must cover all variables")
    if not p.is_block_multilinear(P):
        raise InputValidationError("polynomial is not in the block-multilinear space of P")
    n = p.n
    basis = block_multilinear_basis(P)
    coef = np.array([float(p.terms.get(_alpha_of(mono, n), 0)) for mono in basis])
    E = _eval_matrix(n, basis)  # 2^n x D
    # route (a) via its decomposition form: min 1.mu, mu >= 0 over +-point
    # evaluations reproducing p on the space
    Mcols = np.hstack([E.T, -E.T])  # D x 2^{n+1}
    res = lp_solve(-np.ones(Mcols.shape[1]), Mcols, coef)
    if res.status != "optimal":
        raise CertifiedBoundError(f"dual-norm route (a) LP returned {res.status}")
    value_a = -res.value
    # dual prices = extremal q coefficients; verify sup norm by enumeration
    q = -res.dual
    qvals = E @ q
    qmax = float(np.abs(qvals).max())
    if qmax > 1.0:
        q = q / qmax
    lower = float(coef @ q)
    mu = res.x

    # route (b): min E|r| with r in the parity space and top part = p
    wbasis = parity_space_basis(P)
    t = len(P.parts)
    free = [mono for mono in wbasis if len(mono) != t]
    fixed_vec = E @ coef  # values of p itself (top part fixed to p)
    # note: monomials of size t in the parity space with one var per part are
    # exactly the block-multilinear basis; other size-t parity monomials do
    # not exist (odd counts summing to t with |P| = t parts forces all ones)
    Ef = _eval_matrix(n, free) if free else np.zeros((E.shape[0], 0))
    m = E.shape[0]
    nfree = len(free)
    # equality form: split the free coefficients and the point values into
    # nonnegative parts; Ef(c+ - c-) - s+ + s- = -fixed_vec, so that
    # s+ - s- = p(x) + (free part)(x); at a vertex min sum(s+ + s-)/m = E|r|
    Meq = np.hstack([Ef, -Ef, -np.eye(m), np.eye(m)])
    beq = -fixed_vec
    cvec = -np.concatenate([np.zeros(2 * nfree), np.ones(2 * m) / m])
    resb = lp_solve(cvec, Meq, beq)
    if resb.status != "optimal":
        raise CertifiedBoundError(f"dual-norm route (b) LP returned {resb.status}")
    value_b = -resb.value
    if abs(value_a - value_b) > 1e-6 * max(1.0, abs(value_a)):
        raise CertifiedBoundError(
            f"dual-norm routes disagree: {value_a} vs {value_b}"
        )
    r_terms = {_alpha_of(mono, n): float(c) for mono, c in zip(basis, coef)}
    free_coeffs = resb.x[:nfree] - resb.x[nfree : 2 * nfree]
    for mono, cval in zip(free, free_coeffs):
        if abs(cval) > 1e-12:
            r_terms[_alpha_of(mono, n)] = float(cval)
    r_witness = Polynomial(n, r_terms)
    return CertifiedInterval(
        lower=lower,
        upper=value_a,
        lower_witness=Polynomial(n, {_alpha_of(m_, n): float(c) for m_, c in zip(basis, q) if abs(c) > 0}),
        upper_witness={"measure": mu, "ell1_witness": r_witness, "route_b_value": value_b},
    )


def _alpha_of(mono: Tuple[int, ...], n: int) -> Tuple[int, ...]:
    alpha = [0] * n
    for v in mono:
        alpha[v - 1] = 1
    return tuple(alpha)


# ---------------------------------------------------------------------------
# Grothendieck-ratio experiment
# ---------------------------------------------------------------------------

@dataclass
class GrothendieckSample:
    index: int
    matrix_hash: str
    inf_to_one: float
    cb_lower: float
    cb_upper: float

    @property
    def ratio_lower(self) -> float:
        return self.cb_lower / self.inf_to_one

    @property
    def ratio_upper(self) -> float:
        return self.cb_upper / self.inf_to_one


@dataclass
class GrothendieckReport:
    k: int
    seed: int
    samples: List[GrothendieckSample]
    kg_bracket: Tuple[float, float] = KG_BRACKET
    ratio_band: Tuple[float, float] = (1.0 - 1e-6, 1.7821 + 1e-4)

    @property
    def all_within(self) -> bool:
        lo, hi = self.ratio_band
        return all(lo <= s.ratio_lower and s.ratio_upper <= hi for s in self.samples)

    def violations(self) -> List[GrothendieckSample]:
        lo, hi = self.ratio_band
        return [s for s in self.samples if not (lo <= s.ratio_lower and s.ratio_upper <= hi)]

    def to_csv(self) -> str:
        """Stable schema: one row per sample."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["index", "matrix_hash", "inf_to_one", "cb_lower", "cb_upper", "ratio_lower", "ratio_upper"]
        )
        for s in self.samples:
            writer.writerow(
                [
                    s.index,
                    s.matrix_hash,
                    f"{s.inf_to_one:.12g}",
                    f"{s.cb_lower:.12g}",
                    f"{s.cb_upper:.12g}",
                    f"{s.ratio_lower:.12g}",
                    f"{s.ratio_upper:.12g}",
                ]
            )
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "seed": self.seed,
            "kg_bracket": list(self.kg_bracket),
            "ratio_band": list(self.ratio_band),
            "all_within": self.all_within,
            "samples": [
                {
                    "index": s.index,
                    "matrix_hash": s.matrix_hash,
                    "inf_to_one": s.inf_to_one,
                    "cb_lower": s.cb_lower,
                    "cb_upper": s.cb_upper,
                    "ratio_lower": s.ratio_lower,
                    "ratio_upper": s.ratio_upper,
                }
                for s in self.samples
            ],
        }


def grothendieck_experiment(k: int, samples: int, seed: int = 0) -> GrothendieckReport:
    """Certified ratio intervals cb/inf->1 for seeded random matrices with
    i.i.d. uniform [-1, 1] entries."""
    if k > 10:
        raise CapExceededError("grothendieck experiment cap is k <= 10")
    rng = np.random.default_rng(seed)
    rows: List[GrothendieckSample] = []
    for idx in range(samples):
        A = rng.uniform(-1.0, 1.0, size=(k, k))
        h = hashlib.sha256(A.tobytes()).hexdigest()[:16]
        inf1 = norm_inf_to_one(A)
        cb = cb_norm_matrix(A, seed=seed + idx)
        rows.append(
            GrothendieckSample(
                index=idx,
                matrix_hash=h,
                inf_to_one=inf1,
                cb_lower=cb.lower,
                cb_upper=cb.upper,
            )
        )
    return GrothendieckReport(k=k, seed=seed, samples=rows)
