"""Certificate algebra for completely-bounded norms.

A certificate is an explicit tuple (d, u, v, A, w): two vectors and a
contraction-valued operator family realizing a tensor R with entries
R_i = <u, A(i_1)...A(i_t) v>.  Such a tuple with balanced weight
||u||^2 = ||v||^2 = w proves ||R||_{cb,*} <= w, and any concrete
contraction family with unit u, v gives a valid lower bound on a cb norm
by direct evaluation.  The constructive toolkit here: standard basis
realizations, direct sums, scaling, the single-map polarization combiner,
and sign-averaged parity lifts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    CapExceededError,
    CertifiedBoundError,
    DimensionMismatchError,
    InputValidationError,
)
from .hypercube import Partition
from .numopt import operator_norm
from .tensors import IndexTuple, Tensor

#: certificates refuse to grow beyond this operator dimension
CERT_DIM_CAP = 512
#: full-enumeration cap for realize() without an explicit support
REALIZE_TUPLE_CAP = 2_000_000

OperatorFamily = Dict[int, np.ndarray]


def _as_family(n: int, d: int, A: Mapping[int, np.ndarray], dtype=None) -> OperatorFamily:
    fam: OperatorFamily = {}
    for i, M in A.items():
        i = int(i)
        if not 1 <= i <= n:
            raise InputValidationError(f"operator index {i} outside 1..{n}")
        M = np.asarray(M) if dtype is None else np.asarray(M, dtype=dtype)
        if M.shape != (d, d):
            raise DimensionMismatchError(f"operator A({i}) has shape {M.shape}, expected {(d, d)}")
        fam[i] = M
    return fam


@dataclass(frozen=True)
class CbCertificate:
    """Balanced dual-cb-norm certificate: ||u||^2 = ||v||^2 = w, every A(i)
    a contraction.  Immutable; arrays are never mutated after construction.
    Integer-typed arrays are kept exact (realization then stays in int64).
    """

    n: int
    t: int
    d: int
    u: np.ndarray
    v: np.ndarray
    A: OperatorFamily  # missing indices act as the zero operator
    w: float

    def __post_init__(self):
        if self.d > CERT_DIM_CAP:
            raise CapExceededError(f"certificate dimension {self.d} exceeds cap {CERT_DIM_CAP}")
        object.__setattr__(self, "u", np.asarray(self.u))
        object.__setattr__(self, "v", np.asarray(self.v))
        if self.u.shape != (self.d,) or self.v.shape != (self.d,):
            raise DimensionMismatchError("u/v length differs from certificate dimension")
        object.__setattr__(self, "A", _as_family(self.n, self.d, self.A))
        object.__setattr__(self, "w", float(self.w))

    def validate(self, tol: float = 1e-9) -> List[str]:
        """Invariant report: empty list means valid."""
        report = []
        if self.w < -tol:
            report.append(f"negative weight {self.w}")
        nu = float(self.u @ self.u)
        nv = float(self.v @ self.v)
        scale = max(1.0, abs(self.w))
        if abs(nu - self.w) > tol * scale:
            report.append(f"||u||^2 = {nu} differs from weight {self.w}")
        if abs(nv - self.w) > tol * scale:
            report.append(f"||v||^2 = {nv} differs from weight {self.w}")
        for i in sorted(self.A):
            nrm = operator_norm(np.asarray(self.A[i], dtype=float))
            if nrm > 1.0 + tol:
                report.append(f"||A({i})|| = {nrm} exceeds 1")
        return report

    def require_valid(self, tol: float = 1e-9) -> "CbCertificate":
        report = self.validate(tol)
        if report:
            raise CertifiedBoundError("invalid certificate: " + "; ".join(report))
        return self

    # -- realization -----------------------------------------------------------

    def value_at(self, ind: Sequence[int]):
        x = self.v
        for i in reversed([int(j) for j in ind]):
            M = self.A.get(i)
            if M is None:
                return 0
            x = M @ x
        return (self.u @ x).item()

    def realize(self, support: Optional[Sequence[IndexTuple]] = None) -> Tensor:
        """Tensor with entries <u, A(i_1)...A(i_t) v>.

        Without an explicit support all n^t tuples are enumerated (depth-first
        with shared suffix products, subject to REALIZE_TUPLE_CAP).
        """
        if support is not None:
            entries = {tuple(ind): self.value_at(ind) for ind in support}
            return Tensor(self.n, self.t, entries)
        if self.n**self.t > REALIZE_TUPLE_CAP:
            raise CapExceededError(
                f"full realization over {self.n}^{self.t} tuples exceeds cap"
            )
        entries: Dict[IndexTuple, object] = {}
        idxs = sorted(self.A)

        def dfs(suffix: Tuple[int, ...], vec):
            if len(suffix) == self.t:
                val = (self.u @ vec).item()
                if val != 0:
                    entries[suffix] = val
                return
            for i in idxs:
                dfs((i,) + suffix, self.A[i] @ vec)

        dfs((), self.v)
        return Tensor(self.n, self.t, entries)

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        def num(x):
            x = float(x)
            return int(x) if x.is_integer() and abs(x) < 2**53 else float(f"{x:.17g}")

        return {
            "n": self.n,
            "t": self.t,
            "d": self.d,
            "w": num(self.w),
            "u": [num(x) for x in self.u],
            "v": [num(x) for x in self.v],
            "A": [
                {"i": i, "rows": [[num(x) for x in row] for row in np.asarray(self.A[i])]}
                for i in sorted(self.A)
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "CbCertificate":
        return cls(
            n=int(obj["n"]),
            t=int(obj["t"]),
            d=int(obj["d"]),
            u=np.asarray(obj["u"], dtype=float),
            v=np.asarray(obj["v"], dtype=float),
            A={int(e["i"]): np.asarray(e["rows"], dtype=float) for e in obj.get("A", [])},
            w=float(obj["w"]),
        )


@dataclass(frozen=True)
class CertifiedInterval:
    """Two-sided bound with references to the artifacts proving each side."""

    lower: float
    upper: float
    lower_witness: object = None
    upper_witness: object = None

    def __post_init__(self):
        if self.lower > self.upper + 1e-7 * max(1.0, abs(self.upper)):
            raise CertifiedBoundError(
                f"certified interval inverted: lower {self.lower} > upper {self.upper}"
            )

    def to_json(self) -> dict:
        return {"lower": float(self.lower), "upper": float(self.upper)}


# ---------------------------------------------------------------------------
# constructive toolkit
# ---------------------------------------------------------------------------

def basis_certificate(ind: Sequence[int], n: int, t: int) -> CbCertificate:
    """Certificate of weight 1 realizing the standard basis tensor e_ind:
    d = t+1, u = e_1, v = e_{t+1}, A(i) = sum over slots s with i_s = i of
    the step operator e_s e_{s+1}^T."""
    ind = tuple(int(i) for i in ind)
    if len(ind) != t:
        raise DimensionMismatchError(f"index tuple of length {len(ind)}, expected {t}")
    if any(not 1 <= i <= n for i in ind):
        raise InputValidationError(f"index outside 1..{n} in {ind}")
    d = t + 1
    A: OperatorFamily = {}
    for s, i in enumerate(ind):
        M = A.setdefault(i, np.zeros((d, d), dtype=np.int64))
        M[s, s + 1] = 1
    u = np.zeros(d, dtype=np.int64)
    v = np.zeros(d, dtype=np.int64)
    u[0] = 1
    v[t] = 1
    return CbCertificate(n=n, t=t, d=d, u=u, v=v, A=A, w=1.0)


def add(c1: CbCertificate, c2: CbCertificate) -> CbCertificate:
    """Direct sum; realizations add, weights add exactly."""
    if (c1.n, c1.t) != (c2.n, c2.t):
        raise DimensionMismatchError("certificates of different order cannot be added")
    d = c1.d + c2.d
    idxs = set(c1.A) | set(c2.A)
    common = np.result_type(
        *(np.asarray(M).dtype for M in list(c1.A.values()) + list(c2.A.values())),
        c1.u.dtype,
        c2.u.dtype,
    ) if idxs else np.result_type(c1.u.dtype, c2.u.dtype)
    A: OperatorFamily = {}
    for i in idxs:
        M = np.zeros((d, d), dtype=common)
        if i in c1.A:
            M[: c1.d, : c1.d] = c1.A[i]
        if i in c2.A:
            M[c1.d :, c1.d :] = c2.A[i]
        A[i] = M
    u = np.concatenate([np.asarray(c1.u, dtype=common), np.asarray(c2.u, dtype=common)])
    v = np.concatenate([np.asarray(c1.v, dtype=common), np.asarray(c2.v, dtype=common)])
    return CbCertificate(n=c1.n, t=c1.t, d=d, u=u, v=v, A=A, w=c1.w + c2.w)


def scale(cert: CbCertificate, lam: float) -> CbCertificate:
    """Scale the realization by lam: sqrt(|lam|) into each vector, sign into
    u; weight becomes |lam| * w."""
    lam = float(lam)
    root = math.sqrt(abs(lam))
    sign = -1.0 if lam < 0 else 1.0
    return CbCertificate(
        n=cert.n,
        t=cert.t,
        d=cert.d,
        u=np.asarray(cert.u, dtype=float) * (sign * root),
        v=np.asarray(cert.v, dtype=float) * root,
        A=cert.A,
        w=abs(lam) * cert.w,
    )


def from_ell1(T: Tensor) -> CbCertificate:
    """Basis decomposition: weight equals the entrywise l1 norm of T,
    certifying ||T||_{cb,*} <= l1(T).  Built block-diagonally in one pass
    (equivalent to summing scaled basis certificates)."""
    m = len(T.entries)
    if m == 0:
        d = T.t + 1
        return CbCertificate(
            n=T.n, t=T.t, d=d, u=np.zeros(d), v=np.zeros(d), A={}, w=0.0
        )
    d = m * (T.t + 1)
    if d > CERT_DIM_CAP:
        raise CapExceededError(
            f"l1 certificate needs dimension {d} > cap {CERT_DIM_CAP}"
        )
    A: OperatorFamily = {}
    u = np.zeros(d)
    v = np.zeros(d)
    total = 0.0
    for k, ind in enumerate(sorted(T.entries)):
        c = float(T.entries[ind])
        off = k * (T.t + 1)
        root = math.sqrt(abs(c))
        u[off] = math.copysign(root, c)
        v[off + T.t] = root
        total += abs(c)
        for s, i in enumerate(ind):
            M = A.setdefault(i, np.zeros((d, d)))
            M[off + s, off + s + 1] = 1.0
    return CbCertificate(n=T.n, t=T.t, d=d, u=u, v=v, A=A, w=total)


def combine_maps(
    families: Sequence[Mapping[int, np.ndarray]],
    u: np.ndarray,
    v: np.ndarray,
    n: int,
    w: Optional[float] = None,
) -> CbCertificate:
    """Polarization combiner: fold t possibly-different contraction families
    into one on dimension (t+1)d, preserving every realization value exactly.
    A(i) = sum_s step(s) (x) A_s(i), u' = e_1 (x) u, v' = e_{t+1} (x) v."""
    t = len(families)
    u = np.asarray(u)
    v = np.asarray(v)
    d = u.shape[0]
    if v.shape != (d,):
        raise DimensionMismatchError("u and v of different lengths")
    dims = {np.asarray(M).shape for fam in families for M in fam.values()}
    if any(s != (d, d) for s in dims):
        raise DimensionMismatchError("operator dimensions differ from vector length")
    D = (t + 1) * d
    if D > CERT_DIM_CAP:
        raise CapExceededError(f"combined dimension {D} exceeds cap {CERT_DIM_CAP}")
    common = np.result_type(u.dtype, v.dtype, *(np.asarray(M).dtype for fam in families for M in fam.values())) if dims else np.result_type(u.dtype, v.dtype)
    A: OperatorFamily = {}
    for s, fam in enumerate(families):
        for i, M in fam.items():
            big = A.setdefault(int(i), np.zeros((D, D), dtype=common))
            big[s * d : (s + 1) * d, (s + 1) * d : (s + 2) * d] = M
    U = np.zeros(D, dtype=common)
    V = np.zeros(D, dtype=common)
    U[:d] = u
    V[t * d :] = v
    if w is None:
        w = float(np.asarray(u, dtype=float) @ np.asarray(u, dtype=float))
    return CbCertificate(n=n, t=t, d=D, u=U, v=V, A=A, w=w)


def parity_lift(
    families: Sequence[Mapping[int, np.ndarray]],
    u: np.ndarray,
    v: np.ndarray,
    n: int,
    Q: Partition,
    w: Optional[float] = None,
) -> CbCertificate:
    """Sign-averaged lift realizing exactly the parity projection (each part
    of Q hit an odd number of times) of the original realization.

    Blocks are indexed by sign patterns z over the parts of Q; operators with
    index in part I pick up the sign z_I inside block z, and v carries the
    product of all signs.  Weight is preserved.
    """
    t = len(families)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    d = u.shape[0]
    if v.shape != (d,):
        raise DimensionMismatchError("u and v of different lengths")
    if Q.n != n:
        raise DimensionMismatchError("partition over different n")
    parts = sorted(Q.parts, key=min)
    m = len(parts)
    D = (1 << m) * d
    if D > CERT_DIM_CAP:
        raise CapExceededError(f"parity lift dimension {D} exceeds cap {CERT_DIM_CAP}")
    part_of = {}
    for k, part in enumerate(parts):
        for i in part:
            part_of[i] = k
    lifted: List[Dict[int, np.ndarray]] = []
    for fam in families:
        big_fam: Dict[int, np.ndarray] = {}
        for i, M in fam.items():
            M = np.asarray(M, dtype=float)
            big = np.zeros((D, D))
            for z in range(1 << m):
                sgn = 1.0
                k = part_of.get(int(i))
                if k is not None and (z >> k) & 1:
                    sgn = -1.0
                big[z * d : (z + 1) * d, z * d : (z + 1) * d] = sgn * M
            big_fam[int(i)] = big
        lifted.append(big_fam)
    root = 2.0 ** (-m / 2.0)
    U = np.zeros(D)
    V = np.zeros(D)
    for z in range(1 << m):
        U[z * d : (z + 1) * d] = root * u
        # product of signs over all parts: parity of the bit pattern
        sgn = -1.0 if bin(z).count("1") % 2 else 1.0
        V[z * d : (z + 1) * d] = root * sgn * v
    if w is None:
        w = float(u @ u)
    return combine_maps(lifted, U, V, n=n, w=w)


def certificate_parity_lift(cert: CbCertificate, Q: Partition) -> CbCertificate:
    """Parity lift of a single-map certificate (same family in every slot)."""
    return parity_lift([cert.A] * cert.t, cert.u, cert.v, cert.n, Q, w=cert.w)


# ---------------------------------------------------------------------------
# norm bounds
# ---------------------------------------------------------------------------

def cb_dualnorm_upper(
    T: Tensor, candidates: Sequence[CbCertificate] = ()
) -> Tuple[float, CbCertificate]:
    """Best available upper bound on ||T||_{cb,*}: the l1 basis construction
    against any caller-supplied certificates (each checked to be valid and to
    realize T exactly before being trusted)."""
    best = from_ell1(T)
    for cand in candidates:
        if (cand.n, cand.t) != (T.n, T.t):
            raise DimensionMismatchError("candidate certificate of wrong shape")
        if cand.w >= best.w:
            continue
        cand.require_valid()
        R = cand.realize()
        diff = max(
            (abs(float(R.entries.get(i, 0)) - float(T.entries.get(i, 0))) for i in set(R.entries) | set(T.entries)),
            default=0.0,
        )
        if diff > 1e-9 * max(1.0, float(T.l1())):
            raise CertifiedBoundError(
                f"candidate certificate does not realize the tensor (max entry error {diff})"
            )
        best = cand
    return best.w, best


def _polar(G: np.ndarray) -> np.ndarray:
    """Closest contraction maximizing <G, A>: the polar factor of G."""
    U, _, Vt = np.linalg.svd(G)
    return U @ Vt


def _clip_contraction(M: np.ndarray) -> np.ndarray:
    nrm = operator_norm(M)
    return M / nrm if nrm > 1.0 else M


def cb_norm_lower(
    T: Tensor,
    d: int = 4,
    restarts: int = 32,
    seed: int = 0,
    sweeps: int = 200,
):
    """Heuristic maximization of |<u, T(A) v>| over unit u, v and a single
    contraction family A on dimension d.  Every reported value is a valid
    lower bound on ||T||_{cb}: the returned family is re-verified to consist
    of contractions (operator norms via the in-repo eigensolver) and the
    value recomputed by direct evaluation.

    Returns (value, (u, v, A)).  Deterministic given the seed; one restart is
    seeded from the l1 basis certificate of T, which already guarantees the
    value sum(T_i^2)/l1(T).
    """
    if d > CERT_DIM_CAP:
        raise CapExceededError(f"dimension {d} exceeds cap {CERT_DIM_CAP}")
    rng = np.random.default_rng(seed)
    idxs = sorted({i for ind in T.entries for i in ind})
    if not idxs:
        return 0.0, (np.zeros(d), np.zeros(d), {})

    entries = {ind: float(val) for ind, val in T.entries.items()}

    def family_value(A, u, v):
        total = 0.0
        for ind, val in entries.items():
            x = v
            for i in reversed(ind):
                x = A[i] @ x
            total += val * float(u @ x)
        return total

    def best_uv(A, dd):
        # M = T(A); top singular pair maximizes <u, M v>
        M = np.zeros((dd, dd))
        for ind, val in entries.items():
            prod = A[ind[0]]
            for i in ind[1:]:
                prod = prod @ A[i]
            M += val * prod
        U, S, Vt = np.linalg.svd(M)
        return U[:, 0], Vt[0, :], float(S[0])

    def gradient(A, u, v, dd):
        G = {i: np.zeros((dd, dd)) for i in idxs}
        for ind, val in entries.items():
            tt = len(ind)
            prefixes = [u]
            x = u
            for i in ind[:-1]:
                x = A[i].T @ x
                prefixes.append(x)
            suffixes = [v]
            x = v
            for i in reversed(ind[1:]):
                x = A[i] @ x
                suffixes.append(x)
            suffixes.reverse()
            for s in range(tt):
                G[ind[s]] += val * np.outer(prefixes[s], suffixes[s])
        return G

    best_val = 0.0
    best_witness = (np.zeros(d), np.zeros(d), {i: np.zeros((d, d)) for i in idxs})

    starts = []
    # structured start from the l1 basis certificate (exact contraction family)
    c0 = None
    try:
        c0 = from_ell1(T)
    except CapExceededError:
        c0 = None
    if c0 is not None and c0.w > 0:
        A0 = {i: np.asarray(M, dtype=float) for i, M in c0.A.items()}
        for i in idxs:
            A0.setdefault(i, np.zeros((c0.d, c0.d)))
        root = math.sqrt(c0.w)
        starts.append((A0, np.asarray(c0.u, dtype=float) / root, np.asarray(c0.v, dtype=float) / root, c0.d))
    for _ in range(max(0, restarts - len(starts))):
        A0 = {}
        for i in idxs:
            M = rng.standard_normal((d, d))
            A0[i] = _clip_contraction(M)
        u0 = rng.standard_normal(d)
        u0 /= np.linalg.norm(u0)
        v0 = rng.standard_normal(d)
        v0 /= np.linalg.norm(v0)
        starts.append((A0, u0, v0, d))

    for A, u, v, dd in starts:
        val = family_value(A, u, v)
        for _ in range(sweeps):
            u, v, val_uv = best_uv(A, dd)
            G = gradient(A, u, v, dd)
            A = {i: _polar(G[i]) if np.linalg.norm(G[i]) > 1e-300 else A[i] for i in idxs}
            new_val = family_value(A, u, v)
            if new_val <= val + 1e-12 * max(1.0, abs(val)):
                val = max(val, new_val)
                break
            val = new_val
        # final certified evaluation with verified contractions
        A = {i: _clip_contraction(M) for i, M in A.items()}
        u = u / np.linalg.norm(u)
        v = v / np.linalg.norm(v)
        val = abs(family_value(A, u, v))
        if val > best_val:
            best_val = val
            best_witness = (u, v, A)
    return best_val, best_witness
