"""Explicit witness family showing the dual cb norm can be far below the
dual sup-norm: trilinear sign patterns built from the Moebius function over
three blocks of residues, their degree-4 extensions, and a graded
contraction-valued certificate of weight 1.

Everything here is exact: integer coefficients, integer certificate
entries, rational norms.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .certificates import CbCertificate
from .errors import CapExceededError, InputValidationError
from .hypercube import Partition, Polynomial

SIEVE_CAP = 100_000_000
EXACT_NORM_MAX_N = 8  # sup-norm enumeration over 2^{3n} points


# ---------------------------------------------------------------------------
# Moebius sieve
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MoebiusTable:
    N: int
    values: np.ndarray  # values[a] for a in 1..N; values[0] unused

    def __getitem__(self, a: int) -> int:
        if not 1 <= a <= self.N:
            raise InputValidationError(f"Moebius table covers 1..{self.N}, got {a}")
        return int(self.values[a])


def moebius_sieve(N: int) -> MoebiusTable:
    """Exact Moebius values mu(1..N): 0 on non-square-free integers, else
    (-1)^{number of prime factors}."""
    if N > SIEVE_CAP:
        raise CapExceededError(f"sieve cap is N <= {SIEVE_CAP}")
    N = int(N)
    mu = np.ones(N + 1, dtype=np.int64)
    is_comp = np.zeros(N + 1, dtype=bool)
    for p in range(2, N + 1):
        if is_comp[p]:
            continue
        mu[p::p] *= -1
        sq = p * p
        if sq <= N:
            mu[sq::sq] = 0
            is_comp[sq::p] = True  # mark proper multiples lazily
        is_comp[2 * p :: p] = True
    if N >= 1:
        mu[1] = 1
    mu[0] = 0
    return MoebiusTable(N=N, values=mu)


def squarefree_count(N: int, table: Optional[MoebiusTable] = None) -> int:
    table = table if table is not None and table.N >= N else moebius_sieve(N)
    return int(np.count_nonzero(table.values[1 : N + 1]))


def squarefree_density(N: int, table: Optional[MoebiusTable] = None) -> float:
    if N < 1:
        raise InputValidationError("N must be positive")
    return squarefree_count(N, table) / N


# ---------------------------------------------------------------------------
# the polynomials q_n, r_n, p_n
# ---------------------------------------------------------------------------

def _rep(x: int, n: int) -> int:
    """Representative of x mod n inside {1, ..., n}."""
    r = x % n
    return n if r == 0 else r


def build_qn(n: int, table: Optional[MoebiusTable] = None) -> Polynomial:
    """Trilinear form over 3n variables (three blocks of n residues):
    sum over (a, b) in Z_n^2 of mu([a+3b]_n) x_{[a]_n} x_{n+[a+b]_n}
    x_{2n+[a+2b]_n}.  Distinct (a, b) give distinct monomials."""
    if n < 2:
        raise InputValidationError("n >= 2 required")
    table = table if table is not None and table.N >= n else moebius_sieve(n)
    terms: Dict[Tuple[int, ...], int] = {}
    for a in range(n):
        for b in range(n):
            c = table[_rep(a + 3 * b, n)]
            if c == 0:
                continue
            i0 = _rep(a, n)
            i1 = n + _rep(a + b, n)
            i2 = 2 * n + _rep(a + 2 * b, n)
            alpha = [0] * (3 * n)
            alpha[i0 - 1] = alpha[i1 - 1] = alpha[i2 - 1] = 1
            key = tuple(alpha)
            if key in terms:
                raise InputValidationError("monomial collision: (a,b) map not injective")
            terms[key] = c
    return Polynomial(3 * n, terms)


def witness_partition(n: int) -> Partition:
    """Four blocks over 3n+1 variables: the three residue blocks plus the
    singleton extension variable."""
    return Partition(
        3 * n + 1,
        [range(1, n + 1), range(n + 1, 2 * n + 1), range(2 * n + 1, 3 * n + 1), [3 * n + 1]],
    )


@dataclass
class WitnessFamily:
    n: int
    q: Polynomial  # 3n variables, degree 3
    r: Polynomial  # 3n+1 variables, degree 4: q * x_{3n+1}
    p: Polynomial  # r / ||q||_inf
    partition: Partition
    q_norm_inf: object  # exact int/Fraction when exact=True, else float lower bound
    q_norm2_sq: int  # sum of squared coefficients = n * S(n)
    r_norm_1: object  # exact Fraction when exact=True
    exact: bool


def build_family(n: int, table: Optional[MoebiusTable] = None) -> WitnessFamily:
    """q_n, r_n = q_n x_{3n+1}, p_n = r_n/||q_n||_inf with cached norms.

    n must be odd (the certificate construction inverts 2 mod n).  For
    n <= 8 the sup-norm is exact (full 2^{3n} enumeration); beyond that a
    local-search lower bound is used and the family is flagged non-exact.
    """
    if n % 2 == 0:
        raise InputValidationError("n must be odd (2 must be invertible mod n)")
    q = build_qn(n, table)
    nv = 3 * n + 1
    r_terms = {}
    for alpha, c in q.terms.items():
        r_terms[alpha + (1,)] = c
    r = Polynomial(nv, r_terms)
    exact = n <= EXACT_NORM_MAX_N
    if exact:
        q_inf = q.norm_inf_exact(cap=3 * EXACT_NORM_MAX_N)
        # ||r||_1 = E|q * x_{3n+1}| = E|q|, exact rational
        vals = q.values_on_cube(cap=3 * EXACT_NORM_MAX_N)
        r_1 = Fraction(int(np.abs(vals).sum()), 1 << (3 * n))
    else:
        q_inf = q.norm_inf_lower_local_search(restarts=32, seed=0)
        vals = None
        r_1 = None
    q2 = sum(int(c) * int(c) for c in q.terms.values())
    p = r.scale(Fraction(1, int(q_inf)) if exact and float(q_inf).is_integer() else 1.0 / float(q_inf))
    return WitnessFamily(
        n=n,
        q=q,
        r=r,
        p=p,
        partition=witness_partition(n),
        q_norm_inf=q_inf,
        q_norm2_sq=q2,
        r_norm_1=r_1,
        exact=exact,
    )


# ---------------------------------------------------------------------------
# graded contraction certificate
# ---------------------------------------------------------------------------

def _solve_pair(block_a: int, val_a: int, block_b: int, val_b: int, n: int):
    """Recover (a, b) in Z_n^2 from two observations value = a + block*b mod n.
    Requires distinct blocks; uses 2^{-1} mod n for the {0, 2} pair (n odd)."""
    (B1, V1), (B2, V2) = sorted([(block_a, val_a % n), (block_b, val_b % n)])
    if (B1, B2) == (0, 1):
        a, b = V1, (V2 - V1) % n
    elif (B1, B2) == (1, 2):
        b = (V2 - V1) % n
        a = (V1 - b) % n
    elif (B1, B2) == (0, 2):
        inv2 = pow(2, -1, n)
        a = V1
        b = ((V2 - V1) * inv2) % n
    else:
        raise InputValidationError("blocks must be distinct")
    return a, b


def varopoulos_certificate(n: int, table: Optional[MoebiusTable] = None) -> CbCertificate:
    """Weight-1 certificate over 3n variables whose order-3 realization is
    exactly 3! times the symmetric tensor of q_n, and whose shorter words
    all realize 0 (graded structure).

    The space has four levels of dimension 1, 3n, 3n, 1.  Reading a word
    right-to-left from the top vector: the first letter records its (block,
    value); the second letter (of a different block) determines (a, b) and
    maps, signed by mu([a+3b]_n), to the missing block's forced value; the
    third letter annihilates unless it matches that forced observation.
    Every component of every operator is a signed partial permutation, so
    each operator norm is exactly 1.
    """
    if n % 2 == 0:
        raise InputValidationError("n must be odd (2 must be invertible mod n)")
    table = table if table is not None and table.N >= n else moebius_sieve(n)
    D = 6 * n + 2
    # layout: 0 -> bottom w0; 1..3n -> level G1 (missing-block, forced value);
    # 3n+1..6n -> level G2 (first-seen block, value); 6n+1 -> top w3
    def g1(block: int, val_res: int) -> int:
        return 1 + block * n + (val_res % n)

    def g2(block: int, val_res: int) -> int:
        return 1 + 3 * n + block * n + (val_res % n)

    A: Dict[int, np.ndarray] = {}
    for i in range(1, 3 * n + 1):
        Bi = (i - 1) // n
        Vi = ((i - 1) % n + 1) % n  # residue mod n of the value in {1..n}
        M = np.zeros((D, D), dtype=np.int64)
        # step from the top: record the first observation
        M[g2(Bi, Vi), 6 * n + 1] = 1
        # middle step: combine with each prior observation of another block
        for Bp in range(3):
            if Bp == Bi:
                continue
            Bm = 3 - Bi - Bp  # the missing block
            for Vp in range(n):
                a, b = _solve_pair(Bi, Vi, Bp, Vp, n)
                sign = table[_rep(a + 3 * b, n)]
                if sign == 0:
                    continue
                forced = (a + Bm * b) % n
                M[g1(Bm, forced), g2(Bp, Vp)] = sign
        # last step: annihilate unless this letter provides the forced value
        M[0, g1(Bi, Vi)] = 1
        A[i] = M
    u = np.zeros(D, dtype=np.int64)
    v = np.zeros(D, dtype=np.int64)
    u[0] = 1
    v[6 * n + 1] = 1
    return CbCertificate(n=3 * n, t=3, d=D, u=u, v=v, A=A, w=1.0)


def extend_with_identity(cert: CbCertificate, total_vars: Optional[int] = None) -> CbCertificate:
    """Order-4 extension: one extra variable acting as the identity.  The
    realization becomes 4! times the symmetric tensor of q_n * x_new: words
    using the new letter once reduce to the trilinear values, and all other
    words vanish by the grading.  Weight stays 1."""
    new_var = total_vars if total_vars is not None else cert.n + 1
    if new_var != cert.n + 1:
        raise InputValidationError("extension variable must be n+1")
    A = dict(cert.A)
    A[new_var] = np.eye(cert.d, dtype=np.int64)
    return CbCertificate(n=new_var, t=cert.t + 1, d=cert.d, u=cert.u, v=cert.v, A=A, w=cert.w)


# ---------------------------------------------------------------------------
# ratio experiment
# ---------------------------------------------------------------------------

@dataclass
class RatioRow:
    n: int
    q_norm2_sq: int  # = n * S(n), verified
    squarefree_count: int
    q_norm_inf: float
    exact: bool
    cbdual_upper: float  # certificate weight: always 1
    infdual_lower: float  # <r_n, p_n> = ||q_n||_2^2 / ||q_n||_inf
    ratio: float  # cbdual_upper / infdual_lower
    eps_lower: float  # (infdual_lower - 1)/||r_n||_1, clamped at 0
    r_norm_1: Optional[float]


def ratio_report(n_list: Sequence[int]) -> List[RatioRow]:
    """Per odd n: the certified dual-cb upper bound (1, from the graded
    certificate), the dual sup-norm lower bound from pairing with p_n, their
    ratio, and the induced 2-query error lower bound."""
    rows: List[RatioRow] = []
    for n in n_list:
        fam = build_family(n)
        S = squarefree_count(n)
        if fam.q_norm2_sq != n * S:
            raise InputValidationError(
                f"coefficient identity failed at n={n}: {fam.q_norm2_sq} != {n}*{S}"
            )
        q_inf = float(fam.q_norm_inf)
        infdual_lower = fam.q_norm2_sq / q_inf
        eps_lower = 0.0
        r1 = None
        if fam.exact:
            r1 = float(fam.r_norm_1)
            if r1 > 0:
                eps_lower = max(0.0, (infdual_lower - 1.0) / r1)
        rows.append(
            RatioRow(
                n=n,
                q_norm2_sq=fam.q_norm2_sq,
                squarefree_count=S,
                q_norm_inf=q_inf,
                exact=fam.exact,
                cbdual_upper=1.0,
                infdual_lower=infdual_lower,
                ratio=q_inf / fam.q_norm2_sq,
                eps_lower=eps_lower,
                r_norm_1=r1,
            )
        )
    return rows


def ratio_report_csv(rows: Sequence[RatioRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "n",
            "q_norm2_sq",
            "squarefree_count",
            "q_norm_inf",
            "exact",
            "cbdual_upper",
            "infdual_lower",
            "ratio",
            "eps_lower",
            "r_norm_1",
        ]
    )
    for r in rows:
        writer.writerow(
            [
                r.n,
                r.q_norm2_sq,
                r.squarefree_count,
                f"{r.q_norm_inf:.12g}",
                int(r.exact),
                f"{r.cbdual_upper:.12g}",
                f"{r.infdual_lower:.12g}",
                f"{r.ratio:.12g}",
                f"{r.eps_lower:.12g}",
                "" if r.r_norm_1 is None else f"{r.r_norm_1:.12g}",
            ]
        )
    return buf.getvalue()
