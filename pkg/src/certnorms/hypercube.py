"""Multilinear and general polynomials on the sign hypercube {-1,1}^n.

A polynomial is stored as a sparse map from exponent vectors (length-n
tuples of non-negative ints) to coefficients.  Coefficients may be ints,
floats or fractions.Fraction; integer/rational coefficients keep every
operation here exact, which the witness-family code relies on.

Variables are 1-based in all external formats (JSON, partitions, error
messages) and 0-based only inside exponent tuples.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np

from .errors import CapExceededError, DimensionMismatchError, InputValidationError

Exponents = Tuple[int, ...]

#: hard default on exact hypercube enumerations (2^24 points)
DEFAULT_ENUM_CAP = 24


def degree(alpha: Exponents) -> int:
    return sum(alpha)


def is_multilinear_exponent(alpha: Exponents) -> bool:
    return all(a in (0, 1) for a in alpha)


def exponent_bitmask(alpha: Exponents) -> int:
    """Bitmask for a multilinear exponent vector (bit i <-> variable i+1)."""
    mask = 0
    for i, a in enumerate(alpha):
        if a == 1:
            mask |= 1 << i
        elif a != 0:
            raise InputValidationError("exponent vector is not multilinear")
    return mask


class Partition:
    """A family of pairwise disjoint non-empty subsets of {1..n}.

    ``total`` is True when the parts cover all of [n] (a partition in the
    strict sense); otherwise this is a partial family Q.
    """

    def __init__(self, n: int, parts: Iterable[Iterable[int]]):
        self.n = int(n)
        self.parts = tuple(frozenset(int(v) for v in part) for part in parts)
        seen: set = set()
        for part in self.parts:
            if not part:
                raise InputValidationError("empty part in partition")
            for v in part:
                if not 1 <= v <= self.n:
                    raise InputValidationError(f"variable {v} outside 1..{self.n}")
                if v in seen:
                    raise InputValidationError(f"variable {v} appears in two parts")
                seen.add(v)
        self.total = len(seen) == self.n

    def __len__(self) -> int:
        return len(self.parts)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Partition)
            and self.n == other.n
            and set(self.parts) == set(other.parts)
        )

    def __repr__(self) -> str:
        parts = [sorted(p) for p in self.parts]
        return f"Partition(n={self.n}, parts={parts})"

    def to_json(self) -> dict:
        return {"n": self.n, "parts": [sorted(p) for p in self.parts]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Partition":
        return cls(obj["n"], obj["parts"])


class Polynomial:
    """Sparse real polynomial; immutable after construction."""

    __slots__ = ("n", "terms", "_hash")

    def __init__(self, n: int, terms: Mapping[Sequence[int], object] | None = None):
        self.n = int(n)
        clean: Dict[Exponents, object] = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.n:
                raise DimensionMismatchError(
                    f"exponent vector of length {len(alpha)}, expected {self.n}"
                )
            if any(a < 0 for a in alpha):
                raise InputValidationError("negative exponent")
            if c != 0:
                clean[alpha] = c
        self.terms = clean
        self._hash = None

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls(n, {})

    @classmethod
    def monomial(cls, n: int, variables: Iterable[int], c=1) -> "Polynomial":
        """Multilinear monomial c * prod x_v over 1-based variables."""
        alpha = [0] * n
        for v in variables:
            alpha[v - 1] += 1
        return cls(n, {tuple(alpha): c})

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if self.n != other.n:
            raise DimensionMismatchError("adding polynomials over different n")
        out = dict(self.terms)
        for alpha, c in other.terms.items():
            out[alpha] = out.get(alpha, 0) + c
        return Polynomial(self.n, out)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1)

    def scale(self, factor) -> "Polynomial":
        return Polynomial(self.n, {a: c * factor for a, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.n == other.n
            and self.terms == other.terms
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Polynomial(n={self.n}, terms={len(self.terms)})"

    # -- basic queries ---------------------------------------------------------

    @property
    def support(self):
        return self.terms.keys()

    def degree(self) -> int:
        return max((degree(a) for a in self.terms), default=0)

    def is_multilinear(self) -> bool:
        return all(is_multilinear_exponent(a) for a in self.terms)

    def is_homogeneous(self, d: int | None = None) -> bool:
        degs = {degree(a) for a in self.terms}
        if not degs:
            return True
        if len(degs) > 1:
            return False
        return d is None or degs == {d}

    def coefficients_l1(self):
        return sum(abs(c) for c in self.terms.values())

    # -- evaluation ------------------------------------------------------------

    def eval(self, x: Sequence) -> object:
        if len(x) != self.n:
            raise DimensionMismatchError(f"point of length {len(x)}, expected {self.n}")
        total = 0
        for alpha, c in self.terms.items():
            term = c
            for i, a in enumerate(alpha):
                if a:
                    term = term * x[i] ** a
            total = total + term
        return total

    def inner(self, other: "Polynomial") -> object:
        """Coefficient inner product sum_alpha c_alpha c'_alpha."""
        if self.n != other.n:
            raise DimensionMismatchError("inner product over different n")
        small, big = (self, other) if len(self.terms) <= len(other.terms) else (other, self)
        return sum(c * big.terms[a] for a, c in small.terms.items() if a in big.terms)

    def values_on_cube(self, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
        """Values at all 2^n sign points, ordered by the bits of 0..2^n-1
        (bit i = 1 means x_{i+1} = -1).  Exact for int coefficients (int64),
        float64 otherwise; raises on Fraction coefficients (use
        values_on_cube_exact)."""
        if self.n > cap:
            raise CapExceededError(
                f"exact enumeration over 2^{self.n} points exceeds cap 2^{cap}"
            )
        idx = np.arange(1 << self.n, dtype=np.int64)
        all_int = all(isinstance(c, (int, np.integer)) for c in self.terms.values())
        if not all_int and any(isinstance(c, Fraction) for c in self.terms.values()):
            raise InputValidationError(
                "Fraction coefficients: use values_on_cube_exact()"
            )
        dtype = np.int64 if all_int else np.float64
        vals = np.zeros(1 << self.n, dtype=dtype)
        sign_cols: Dict[int, np.ndarray] = {}
        for alpha, c in self.terms.items():
            parity = 0
            for i, a in enumerate(alpha):
                if a % 2:
                    parity ^= 1 << i
            if parity == 0:
                vals += c
                continue
            if parity not in sign_cols:
                bits = idx & parity
                # popcount of masked bits decides the sign of the monomial
                pop = np.zeros(1 << self.n, dtype=np.int64)
                b = parity
                while b:
                    low = b & -b
                    pop += (idx & low) != 0
                    b ^= low
                sign_cols[parity] = np.where(pop % 2 == 0, 1, -1).astype(dtype)
                del bits
            vals = vals + c * sign_cols[parity]
        return vals

    def values_on_cube_exact(self, cap: int = 20):
        """Exact values (python ints / Fractions) at all 2^n sign points."""
        if self.n > cap:
            raise CapExceededError(f"exact enumeration cap 2^{cap} exceeded")
        out = []
        for idx in range(1 << self.n):
            x = [(-1 if (idx >> i) & 1 else 1) for i in range(self.n)]
            out.append(self.eval(x))
        return out

    # -- norms -----------------------------------------------------------------

    def norm_inf_exact(self, cap: int = DEFAULT_ENUM_CAP):
        """max_{x in {-1,1}^n} |p(x)|, by full enumeration."""
        if not self.terms:
            return 0
        if any(isinstance(c, Fraction) for c in self.terms.values()):
            return max(abs(v) for v in self.values_on_cube_exact(cap=cap))
        vals = self.values_on_cube(cap=cap)
        m = np.abs(vals).max()
        return int(m) if vals.dtype == np.int64 else float(m)

    def norm_one_exact(self, cap: int = DEFAULT_ENUM_CAP, exact: bool = False):
        """E_x |p(x)| under the uniform measure, by full enumeration.

        With exact=True (or Fraction coefficients) the result is a Fraction.
        """
        if not self.terms:
            return Fraction(0) if exact else 0.0
        if exact or any(isinstance(c, Fraction) for c in self.terms.values()):
            vals = self.values_on_cube_exact(cap=cap)
            return Fraction(sum(abs(Fraction(v)) for v in vals), 1 << self.n)
        vals = self.values_on_cube(cap=cap)
        if vals.dtype == np.int64:
            return Fraction(int(np.abs(vals).sum()), 1 << self.n)
        return float(np.abs(vals).mean())

    def norm_inf_lower_local_search(self, restarts: int = 16, seed: int = 0):
        """Heuristic lower bound on the sup-norm for n beyond the cap.

        Greedy single-coordinate flips from random starts.  Only a lower
        bound; clearly labeled as such everywhere it is surfaced.
        """
        rng = np.random.default_rng(seed)
        best = 0.0
        for _ in range(restarts):
            x = rng.choice([-1.0, 1.0], size=self.n)
            val = abs(self.eval(x))
            improved = True
            while improved:
                improved = False
                for i in range(self.n):
                    x[i] = -x[i]
                    cand = abs(self.eval(x))
                    if cand > val + 1e-15:
                        val = cand
                        improved = True
                    else:
                        x[i] = -x[i]
            best = max(best, val)
        return best

    # -- structure -------------------------------------------------------------

    def homogeneous_part(self, d: int) -> "Polynomial":
        if d < 0:
            raise InputValidationError("degree must be >= 0")
        return Polynomial(self.n, {a: c for a, c in self.terms.items() if degree(a) == d})

    def project_WQ(self, Q: Partition) -> "Polynomial":
        """Coefficient filter onto W_Q: keep terms whose total degree inside
        every part of Q is odd."""
        if Q.n != self.n:
            raise DimensionMismatchError("partition over different n")
        kept = {}
        for alpha, c in self.terms.items():
            if all(sum(alpha[v - 1] for v in part) % 2 == 1 for part in Q.parts):
                kept[alpha] = c
        return Polynomial(self.n, kept)

    def project_WQ_by_averaging(self, Q: Partition, x: Sequence):
        """E_z[p(x*z) prod_I z_I] by full enumeration of the 2^|Q| sign
        assignments z; exact rational arithmetic so it matches the
        coefficient filter bit for bit on rational inputs."""
        if Q.n != self.n:
            raise DimensionMismatchError("partition over different n")
        if len(x) != self.n:
            raise DimensionMismatchError("point of wrong length")
        k = len(Q.parts)
        total = 0
        for zbits in range(1 << k):
            z = [(-1 if (zbits >> j) & 1 else 1) for j in range(k)]
            xz = list(x)
            sign = 1
            for j, part in enumerate(Q.parts):
                sign *= z[j]
                if z[j] == -1:
                    for v in part:
                        xz[v - 1] = -xz[v - 1]
            total = total + sign * self.eval(xz)
        if isinstance(total, (int, Fraction)):
            return Fraction(total, 1 << k)
        return total / (1 << k)

    def is_block_multilinear(self, P: Partition) -> bool:
        """Membership in V_P: every monomial uses exactly one variable,
        to the first power, from each part of the total partition P."""
        if P.n != self.n:
            raise DimensionMismatchError("partition over different n")
        if not P.total:
            raise InputValidationError("V_P requires a total partition")
        t = len(P.parts)
        for alpha in self.terms:
            if not is_multilinear_exponent(alpha) or degree(alpha) != t:
                return False
            for part in P.parts:
                if sum(alpha[v - 1] for v in part) != 1:
                    return False
        return True

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        terms = []
        for alpha in sorted(self.terms):
            c = self.terms[alpha]
            terms.append({"alpha": list(alpha), "c": float(c)})
        return {"n": self.n, "terms": terms}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Polynomial":
        n = int(obj["n"])
        terms: Dict[Exponents, object] = {}
        for item in obj.get("terms", []):
            alpha_raw = item["alpha"]
            if alpha_raw and isinstance(alpha_raw[0], (list, tuple)):
                # sparse [[var, exp], ...] alternative, 1-based variables
                alpha = [0] * n
                for var, exp in alpha_raw:
                    if not 1 <= var <= n:
                        raise InputValidationError(f"variable {var} outside 1..{n}")
                    alpha[var - 1] += int(exp)
                alpha = tuple(alpha)
            else:
                alpha = tuple(int(a) for a in alpha_raw)
            c = item["c"]
            terms[alpha] = terms.get(alpha, 0) + c
        return cls(n, terms)


def inner_pointwise(p: Polynomial, q: Polynomial, cap: int = DEFAULT_ENUM_CAP):
    """E_x[p(x)q(x)] over the hypercube, by enumeration.

    Distinct from the coefficient inner product unless both polynomials are
    multilinear (Parseval).
    """
    if p.n != q.n:
        raise DimensionMismatchError("pairing over different n")
    vp = p.values_on_cube(cap=cap)
    vq = q.values_on_cube(cap=cap)
    prod = vp.astype(np.float64) * vq.astype(np.float64)
    if vp.dtype == np.int64 and vq.dtype == np.int64:
        return Fraction(int((vp * vq).sum()), 1 << p.n)
    return float(prod.mean())


def random_polynomial(
    n: int,
    degree_profile: Mapping[int, int],
    seed: int,
    *,
    multilinear: bool = True,
    coefficient_range: Tuple[int, int] = (-3, 3),
    integer: bool = True,
) -> Polynomial:
    """Deterministic random polynomial fixture.

    degree_profile maps degree -> number of monomials of that degree.
    Coefficients are drawn uniformly from coefficient_range; integer=True
    keeps them integers so downstream checks stay exact.
    """
    rng = np.random.default_rng(seed)
    terms: Dict[Exponents, object] = {}
    for d, count in sorted(degree_profile.items()):
        for _ in range(count):
            alpha = [0] * n
            if multilinear:
                if d > n:
                    raise InputValidationError("multilinear degree exceeds n")
                for v in rng.choice(n, size=d, replace=False):
                    alpha[int(v)] = 1
            else:
                for _ in range(d):
                    alpha[int(rng.integers(0, n))] += 1
            lo, hi = coefficient_range
            if integer:
                c = int(rng.integers(lo, hi + 1))
                while c == 0:
                    c = int(rng.integers(lo, hi + 1))
            else:
                c = float(rng.uniform(lo, hi))
            key = tuple(alpha)
            terms[key] = terms.get(key, 0) + c
    return Polynomial(n, terms)


def random_block_multilinear(P: Partition, seed: int, integer: bool = False) -> Polynomial:
    """Random element of V_P with a coefficient on every block monomial."""
    rng = np.random.default_rng(seed)
    parts = [sorted(p) for p in P.parts]
    terms: Dict[Exponents, object] = {}
    for combo in itertools.product(*parts):
        alpha = [0] * P.n
        for v in combo:
            alpha[v - 1] = 1
        c = int(rng.integers(-3, 4)) if integer else float(rng.uniform(-1, 1))
        if c != 0:
            terms[tuple(alpha)] = c
    return Polynomial(P.n, terms)
