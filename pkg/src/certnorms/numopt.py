"""Self-contained numerical kernels: Jacobi eigensolver, dense simplex LP
with dual prices, and a diagonally-constrained SDP solver producing
certified primal/dual bounds.

These are deliberately in-repo: every bound reported upstream needs access
to the raw dual objects (prices, dual diagonals, eigenvector witnesses),
and all problem sizes are tiny.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import CapExceededError, CertifiedBoundError, InputValidationError

EIG_DIM_CAP = 2048
SDP_DIM_CAP = 512


def as_symmetric(M, tol: float = 1e-9) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputValidationError("matrix must be square")
    if np.abs(M - M.T).max(initial=0.0) > tol * max(1.0, np.abs(M).max(initial=0.0)):
        raise InputValidationError("matrix is not symmetric")
    return 0.5 * (M + M.T)


# ---------------------------------------------------------------------------
# Jacobi eigensolver
# ---------------------------------------------------------------------------

def eig_sym(M, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigendecomposition of a dense symmetric matrix by cyclic Jacobi
    rotations.  Returns (eigenvalues descending, eigenvector columns)."""
    A = as_symmetric(M).copy()
    n = A.shape[0]
    if n > EIG_DIM_CAP:
        raise CapExceededError(f"eig_sym dimension {n} exceeds cap {EIG_DIM_CAP}")
    V = np.eye(n)
    if n == 1:
        return A.diagonal().copy(), V
    norm = np.linalg.norm(A)
    if norm == 0.0:
        return np.zeros(n), V
    thresh = tol * norm
    converged = False
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(A.diagonal()))
        if off <= thresh:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= thresh / (n * n):
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    if not converged and np.linalg.norm(A - np.diag(A.diagonal())) > thresh:
        raise CertifiedBoundError("Jacobi eigensolver failed to converge")
    vals = A.diagonal().copy()
    order = np.argsort(-vals)
    return vals[order], V[:, order]


def min_eigenvalue(M) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and a unit eigenvector."""
    vals, vecs = eig_sym(M)
    return float(vals[-1]), vecs[:, -1]


def operator_norm(M) -> float:
    """Spectral norm; Jacobi on the Gram matrix for modest sizes, power
    iteration with a deterministic start beyond."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    G = M.T @ M if M.shape[1] <= M.shape[0] else M @ M.T
    G = 0.5 * (G + G.T)
    if G.shape[0] <= 64:
        vals, _ = eig_sym(G)
        return float(np.sqrt(max(vals[0], 0.0)))
    x = np.ones(G.shape[0]) / np.sqrt(G.shape[0])
    for _ in range(1000):
        y = G @ x
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0
        x_new = y / nrm
        if np.linalg.norm(x_new - x) < 1e-15:
            x = x_new
            break
        x = x_new
    return float(np.sqrt(max(float(x @ G @ x), 0.0)))


# ---------------------------------------------------------------------------
# Dense simplex with Bland's rule
# ---------------------------------------------------------------------------

@dataclass
class LpProblem:
    """Standard form:  max c^T x  s.t.  M x = b, x >= 0."""

    c: np.ndarray
    M: np.ndarray
    b: np.ndarray


@dataclass
class LpResult:
    status: str  # optimal | infeasible | unbounded
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    dual: Optional[np.ndarray] = None


def _pivot(T, basis, row, col):
    T[row, :] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r, :] -= T[r, col] * T[row, :]
    basis[row] = col


def _simplex(T, basis, c, allowed, tol=1e-10, max_iter=100_000):
    """Tableau simplex with Bland's rule on max c^T x over the canonical
    tableau T=[A|b] with the given feasible basis.  Only columns in
    `allowed` may enter.  Artificial columns (not in `allowed`) basic at
    zero are pivoted out eagerly to keep them at zero.

    Returns status in {optimal, unbounded}; T and basis are updated in place.
    """
    m = T.shape[0]
    n = T.shape[1] - 1
    in_basis = [False] * n
    for j in basis:
        in_basis[j] = True
    for _ in range(max_iter):
        y = c[basis] @ T[:, :n]
        entering = -1
        for j in allowed:  # Bland: smallest improving index
            if not in_basis[j] and c[j] - y[j] > tol:
                entering = j
                break
        if entering < 0:
            return "optimal"
        col = T[:, entering]
        # force disallowed (artificial) columns basic at zero to leave first
        leave_row = -1
        for r in range(m):
            if basis[r] not in allowed and abs(col[r]) > tol and T[r, -1] <= tol:
                leave_row = r
                break
        if leave_row < 0:
            ratios = [(T[r, -1] / col[r], r) for r in range(m) if col[r] > tol]
            if not ratios:
                return "unbounded"
            best = min(ratio for ratio, _ in ratios)
            # Bland tie-break: smallest basis index among minimal ratios
            leave_row = min(
                (r for ratio, r in ratios if ratio <= best + tol),
                key=lambda r: basis[r],
            )
        in_basis[basis[leave_row]] = False
        in_basis[entering] = True
        _pivot(T, basis, leave_row, entering)
    raise CertifiedBoundError("simplex iteration cap exceeded")


def lp_solve(c, M=None, b=None, tol: float = 1e-9) -> LpResult:
    """Two-phase dense simplex for  max c^T x  s.t.  M x = b, x >= 0.
    Also callable as lp_solve(LpProblem).

    On success returns the optimal x plus dual prices y with
    value = b^T y and M^T y >= c - tol on the support of x
    (complementary slackness residual below 1e-9 on clean data).
    Infeasible and unbounded problems are flagged in `status`.
    """
    if isinstance(c, LpProblem):
        c, M, b = c.c, c.M, c.b
    c = np.asarray(c, dtype=float).ravel()
    M = np.atleast_2d(np.asarray(M, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    if M.shape != (b.size, c.size):
        raise InputValidationError(
            f"LP shape mismatch: M {M.shape}, c {c.size}, b {b.size}"
        )
    m, n = M.shape
    flip = b < 0
    Mw = M.copy()
    bw = b.copy()
    Mw[flip, :] *= -1.0
    bw[flip] *= -1.0
    scale = max(1.0, np.abs(bw).max(initial=0.0), np.abs(Mw).max(initial=0.0))

    # phase 1: minimise the sum of artificials
    T = np.hstack([Mw, np.eye(m), bw.reshape(-1, 1)])
    basis = list(range(n, n + m))
    c1 = np.concatenate([np.zeros(n), -np.ones(m)])
    structural = list(range(n))
    status = _simplex(T, basis, c1, allowed=structural)
    phase1_val = float(c1[basis] @ T[:, -1])
    if status != "optimal" or phase1_val < -1e-7 * scale:
        return LpResult(status="infeasible")
    # any artificial still basic sits at level zero; phase 2 keeps it there
    c2 = np.concatenate([c, np.zeros(m)])
    status = _simplex(T, basis, c2, allowed=structural)
    if status != "optimal":
        return LpResult(status=status)
    x = np.zeros(n)
    for r, j in enumerate(basis):
        if j < n:
            x[j] = T[r, -1]
    value = float(c @ x)
    # dual prices: solve B^T y = c_B over the working (flipped) rows
    B = np.hstack([Mw, np.eye(m)])[:, basis]
    y = np.linalg.solve(B.T, c2[basis])
    y[flip] *= -1.0
    return LpResult(status="optimal", x=x, value=value, dual=y)


@dataclass
class LpIneqResult:
    status: str
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    y_ub: Optional[np.ndarray] = None
    y_eq: Optional[np.ndarray] = None


def lp_solve_ineq(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    maximize: bool = True,
) -> LpIneqResult:
    """Simplex front-end for free-variable LPs
        max/min c^T x  s.t.  A_ub x <= b_ub, A_eq x = b_eq.

    Free variables are split internally.  Returned duals satisfy
    value = b_ub . y_ub + b_eq . y_eq with y_ub >= 0 when maximising
    (y_ub <= 0 when minimising).
    """
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    if A_ub.shape[0] != b_ub.size or (A_ub.size and A_ub.shape[1] != n):
        raise InputValidationError("A_ub/b_ub shape mismatch")
    if A_eq.shape[0] != b_eq.size or (A_eq.size and A_eq.shape[1] != n):
        raise InputValidationError("A_eq/b_eq shape mismatch")
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    sign = 1.0 if maximize else -1.0
    # variables: [x+ (n), x- (n), slacks (m_ub)]
    A_rows = []
    if m_ub:
        A_rows.append(np.hstack([A_ub, -A_ub, np.eye(m_ub)]))
    if m_eq:
        A_rows.append(np.hstack([A_eq, -A_eq, np.zeros((m_eq, m_ub))]))
    M = np.vstack(A_rows) if A_rows else np.zeros((0, 2 * n + m_ub))
    b = np.concatenate([b_ub, b_eq])
    cs = np.concatenate([sign * c, -sign * c, np.zeros(m_ub)])
    res = lp_solve(cs, M, b)
    if res.status != "optimal":
        return LpIneqResult(status=res.status)
    x = res.x[:n] - res.x[n : 2 * n]
    y = sign * res.dual
    return LpIneqResult(
        status="optimal",
        x=x,
        value=sign * res.value,
        y_ub=y[:m_ub],
        y_eq=y[m_ub:],
    )


# ---------------------------------------------------------------------------
# Diagonally-constrained SDP:  max <C, X>  s.t.  X psd, X_ii = 1
# ---------------------------------------------------------------------------

@dataclass
class SdpDiagResult:
    primal_value: float  # certified lower bound, achieved by factor V
    dual_value: float  # certified upper bound, sum of dual diagonal w
    V: np.ndarray  # unit-row factor, X = V V^T
    dual_w: np.ndarray  # Diag(w) - C psd (within psd_tol)
    gap: float
    psd_tol: float
    converged: bool = True  # gap within the requested target


def _primal_ascent(C, V, sweeps=400, tol=1e-13):
    """Row-wise coordinate ascent on tr(C V V^T) with unit rows."""
    n = C.shape[0]
    obj = float(np.sum((C @ V) * V))
    for _ in range(sweeps):
        CV = C @ V
        for i in range(n):
            g = CV[i] - C[i, i] * V[i]
            nrm = np.linalg.norm(g)
            if nrm > 1e-300:
                delta = g / nrm - V[i]
                if np.any(delta):
                    CV += np.outer(C[:, i], delta)
                    V[i] = g / nrm
        new_obj = float(np.sum((C @ V) * V))
        if new_obj - obj <= tol * max(1.0, abs(new_obj)):
            obj = new_obj
            break
        obj = new_obj
    return obj, V


def _dual_from_w(C, w, psd_tol):
    """Shift w upward so Diag(w) - C is psd within psd_tol; returns
    (feasible w, sum)."""
    lam_min, _ = min_eigenvalue(np.diag(w) - C)
    if lam_min < 0.0:
        w = w + (-lam_min + psd_tol)
    return w, float(np.sum(w))


def sdp_diag_max(
    C,
    seed: int = 0,
    restarts: int = 6,
    rank: Optional[int] = None,
    target_gap: float = 1e-6,
    polish_sweeps: int = 40,
) -> SdpDiagResult:
    """max <C, X> over psd X with unit diagonal, with certified two-sided
    bounds.

    Lower bound: Burer-Monteiro factor with unit rows (explicit primal
    witness X = V V^T).  Upper bound: dual diagonal w with Diag(w) - C psd,
    verified by the in-repo eigensolver; Sum(w) >= <C,X> for every feasible
    X by weak duality.  If the gap exceeds `target_gap`, the dual diagonal
    is polished by per-coordinate bisection.
    """
    C = as_symmetric(C)
    n = C.shape[0]
    if n > SDP_DIM_CAP:
        raise CapExceededError(f"sdp_diag_max dimension {n} exceeds cap {SDP_DIM_CAP}")
    scale = max(1.0, np.abs(C).max(initial=0.0))
    psd_tol = 1e-11 * scale * n
    r = rank if rank is not None else min(n, int(np.ceil(np.sqrt(2.0 * n))) + 1)
    rng = np.random.default_rng(seed)

    best_obj = -np.inf
    best_V = None
    for trial in range(max(1, restarts)):
        if trial == 0:
            # deterministic spectral start
            vals, vecs = eig_sym(C)
            V0 = vecs[:, :r] * np.sqrt(np.maximum(vals[:r], 0.0))
            norms = np.linalg.norm(V0, axis=1)
            bad = norms < 1e-12
            V0[bad, 0] = 1.0
            norms[bad] = 1.0
            V0 = V0 / norms[:, None]
        else:
            V0 = rng.standard_normal((n, r))
            V0 /= np.linalg.norm(V0, axis=1)[:, None]
        obj, V0 = _primal_ascent(C, V0)
        if obj > best_obj:
            best_obj, best_V = obj, V0.copy()

    V = best_V
    X = V @ V.T
    primal = float(np.sum(C * X))

    # dual candidates: KKT diagonal from the primal, and the always-feasible
    # row-sum diagonal
    w_kkt = (C @ X).diagonal().copy()
    w_rs = np.sum(np.abs(C), axis=1)
    candidates = []
    for w0 in (w_kkt, w_rs):
        w_f, val = _dual_from_w(C, np.asarray(w0, dtype=float), psd_tol)
        candidates.append((val, w_f))
    dual_value, w = min(candidates, key=lambda t: t[0])

    # coordinate-bisection polish if the gap is too wide
    if dual_value - primal > target_gap:
        for _ in range(polish_sweeps):
            improved = False
            for i in range(n):
                lo = C[i, i]  # w_i >= C_ii is necessary (e_i test vector)
                hi = w[i]
                if hi - lo <= 1e-12 * scale:
                    continue
                w_try = w.copy()
                # bisection for the least feasible w_i given the others
                for _ in range(40):
                    mid = 0.5 * (lo + hi)
                    w_try[i] = mid
                    lam, _ = min_eigenvalue(np.diag(w_try) - C)
                    if lam >= 0.0:
                        hi = mid
                    else:
                        lo = mid
                if hi < w[i] - 1e-12 * scale:
                    w[i] = hi
                    improved = True
            new_val = float(np.sum(w))
            if new_val < dual_value - 1e-12 * scale:
                dual_value = new_val
            if not improved or dual_value - primal <= target_gap:
                break
        # re-certify after polish
        w, dual_value = _dual_from_w(C, w, psd_tol)

    gap = dual_value - primal
    if gap < -1e-9 * scale:
        raise CertifiedBoundError(
            f"sdp_diag_max produced dual {dual_value} below primal {primal}"
        )
    return SdpDiagResult(
        primal_value=primal,
        dual_value=dual_value,
        V=V,
        dual_w=w,
        gap=gap,
        psd_tol=psd_tol,
        converged=bool(gap <= target_gap),
    )


# ---------------------------------------------------------------------------
# PSD feasibility by alternating projections
# ---------------------------------------------------------------------------

def psd_project(M) -> np.ndarray:
    """Projection onto the psd cone (eigenvalue clipping).

    Uses LAPACK internally as search plumbing; certification of any accepted
    point goes through the in-repo eigensolver (see psd_feasibility).
    """
    M = 0.5 * (np.asarray(M, dtype=float) + np.asarray(M, dtype=float).T)
    vals, vecs = np.linalg.eigh(M)
    clipped = np.maximum(vals, 0.0)
    return (vecs * clipped) @ vecs.T


@dataclass
class PsdFeasibilityResult:
    feasible: bool
    point: Optional[np.ndarray]  # affine-feasible, psd within tol when feasible
    residual: float
    witness_eigenvalue: float  # most negative eigenvalue at the stall (heuristic)
    witness_vector: Optional[np.ndarray]


def psd_feasibility(
    project_affine: Callable[[np.ndarray], np.ndarray],
    dim: int,
    start: Optional[np.ndarray] = None,
    tol: float = 1e-8,
    max_iter: int = 3000,
) -> PsdFeasibilityResult:
    """Search for a point in {constraint set} intersect {psd cone} by
    alternating projections.

    `project_affine` must be the orthogonal projection onto a closed convex
    constraint set (affine or simple box-like sets).  On success the
    returned point satisfies those constraints exactly (the last step is a
    constraint projection) and is psd up to `tol`; the reported minimum
    eigenvalue of the accepted point is certified by the in-repo
    eigensolver.  On failure
    the most negative eigenvalue at the stall is reported as a heuristic
    infeasibility witness (not a certificate).
    """
    Z = np.zeros((dim, dim)) if start is None else as_symmetric(start)
    Z = project_affine(Z)
    prev_residual = np.inf
    stall = 0
    for _ in range(max_iter):
        P = psd_project(Z)
        residual = float(np.linalg.norm(P - Z))
        if residual <= tol:
            lam, vec = min_eigenvalue(Z)
            return PsdFeasibilityResult(
                feasible=True,
                point=Z,
                residual=residual,
                witness_eigenvalue=lam,
                witness_vector=vec,
            )
        Z = project_affine(P)
        if residual > prev_residual - 1e-14 * max(1.0, residual):
            stall += 1
            if stall >= 25:
                break
        else:
            stall = 0
        prev_residual = residual
    lam, vec = min_eigenvalue(Z)
    return PsdFeasibilityResult(
        feasible=False,
        point=None,
        residual=float(np.linalg.norm(psd_project(Z) - Z)),
        witness_eigenvalue=lam,
        witness_vector=vec,
    )
