"""Order-t tensors backing forms: sparse index-tuple -> entry maps.

Index tuples use 1-based variable labels, matching the external formats.
The symmetric tensor of a homogeneous polynomial spreads each coefficient
over all distinct orderings of its variable multiset, divided by the number
of those orderings.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from typing import Dict, Mapping, Sequence, Tuple

import numpy as np

from .errors import CapExceededError, DimensionMismatchError, InputValidationError
from .hypercube import Partition, Polynomial

IndexTuple = Tuple[int, ...]

#: dense operator dimension cap for tensor_eval_ops
OPERATOR_DIM_CAP = 512


def distinct_permutation_count(ind: Sequence[int]) -> int:
    """Number of distinct orderings of the sequence: t! / prod(mult!)."""
    t = len(ind)
    denom = 1
    for m in Counter(ind).values():
        denom *= math.factorial(m)
    return math.factorial(t) // denom


def multiset_orderings(ind: Sequence[int]):
    """All distinct orderings of a multiset, generated combinatorially."""
    counter = Counter(ind)
    items = sorted(counter)
    t = len(ind)

    def rec(prefix, remaining):
        if len(prefix) == t:
            yield tuple(prefix)
            return
        for v in items:
            if remaining[v] > 0:
                remaining[v] -= 1
                prefix.append(v)
                yield from rec(prefix, remaining)
                prefix.pop()
                remaining[v] += 1

    yield from rec([], dict(counter))


def exponents_of_tuple(ind: IndexTuple, n: int) -> Tuple[int, ...]:
    alpha = [0] * n
    for i in ind:
        alpha[i - 1] += 1
    return tuple(alpha)


class Tensor:
    """Sparse order-t tensor over [n]^t; immutable after construction."""

    __slots__ = ("n", "t", "entries")

    def __init__(self, n: int, t: int, entries: Mapping[Sequence[int], object] | None = None):
        self.n = int(n)
        self.t = int(t)
        clean: Dict[IndexTuple, object] = {}
        for ind, v in (entries or {}).items():
            ind = tuple(int(i) for i in ind)
            if len(ind) != self.t:
                raise DimensionMismatchError(f"index tuple of length {len(ind)}, expected {self.t}")
            if any(not 1 <= i <= self.n for i in ind):
                raise InputValidationError(f"index outside 1..{self.n} in {ind}")
            if v != 0:
                clean[ind] = v
        self.entries = clean

    @classmethod
    def basis(cls, n: int, ind: Sequence[int]) -> "Tensor":
        return cls(n, len(ind), {tuple(ind): 1})

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Tensor)
            and (self.n, self.t) == (other.n, other.t)
            and self.entries == other.entries
        )

    def __repr__(self) -> str:
        return f"Tensor(n={self.n}, t={self.t}, nnz={len(self.entries)})"

    def __add__(self, other: "Tensor") -> "Tensor":
        if (self.n, self.t) != (other.n, other.t):
            raise DimensionMismatchError("tensor shape mismatch")
        out = dict(self.entries)
        for ind, v in other.entries.items():
            out[ind] = out.get(ind, 0) + v
        return Tensor(self.n, self.t, out)

    def scale(self, factor) -> "Tensor":
        return Tensor(self.n, self.t, {i: v * factor for i, v in self.entries.items()})

    def l1(self):
        return sum(abs(v) for v in self.entries.values())

    def inner(self, other: "Tensor"):
        if (self.n, self.t) != (other.n, other.t):
            raise DimensionMismatchError("tensor shape mismatch")
        small, big = (self, other) if len(self.entries) <= len(other.entries) else (other, self)
        return sum(v * big.entries[i] for i, v in small.entries.items() if i in big.entries)

    # -- evaluation ------------------------------------------------------------

    def eval_point(self, x: Sequence):
        if len(x) != self.n:
            raise DimensionMismatchError(f"point of length {len(x)}, expected {self.n}")
        total = 0
        for ind, v in self.entries.items():
            term = v
            for i in ind:
                term = term * x[i - 1]
            total = total + term
        return total

    def eval_ops(self, A: Mapping[int, np.ndarray]) -> np.ndarray:
        """sum_i T_i A(i_1)...A(i_t), tuple-ordered matrix product."""
        dims = {np.asarray(A[i]).shape for i in range(1, self.n + 1) if i in A}
        needed = {i for ind in self.entries for i in ind}
        missing = needed - set(A.keys())
        if missing:
            raise DimensionMismatchError(f"operator family missing indices {sorted(missing)}")
        for shape in dims:
            if len(shape) != 2 or shape[0] != shape[1]:
                raise DimensionMismatchError("operators must be square")
        if len({s[0] for s in dims}) > 1:
            raise DimensionMismatchError("operators of mixed dimensions")
        d = next(iter(dims))[0] if dims else 1
        if d > OPERATOR_DIM_CAP:
            raise CapExceededError(f"operator dimension {d} exceeds cap {OPERATOR_DIM_CAP}")
        out = np.zeros((d, d))
        for ind, v in self.entries.items():
            prod = np.asarray(A[ind[0]], dtype=float)
            for i in ind[1:]:
                prod = prod @ np.asarray(A[i], dtype=float)
            out = out + v * prod
        return out

    # -- structure -------------------------------------------------------------

    def permute(self, sigma: Sequence[int]) -> "Tensor":
        """(T o sigma)_i = T_{sigma(i)} with sigma a permutation of 0..t-1
        acting on positions: sigma(i) = (i_{sigma[0]}, ..., i_{sigma[t-1]})."""
        if sorted(sigma) != list(range(self.t)):
            raise InputValidationError("not a permutation of positions")
        out: Dict[IndexTuple, object] = {}
        for ind, v in self.entries.items():
            # find j with sigma(j) = ind, i.e. j[sigma[s]] = ind[s]
            j = [0] * self.t
            for s in range(self.t):
                j[sigma[s]] = ind[s]
            out[tuple(j)] = v
        return Tensor(self.n, self.t, out)

    def is_symmetric(self) -> bool:
        for sigma in itertools.permutations(range(self.t)):
            if self.permute(sigma) != self:
                return False
        return True

    def project(self, Q: Partition) -> "Tensor":
        """Keep entries whose tuples hit every part of Q an odd number of times."""
        if Q.n != self.n:
            raise DimensionMismatchError("partition over different n")
        kept = {}
        for ind, v in self.entries.items():
            ok = True
            for part in Q.parts:
                if sum(1 for i in ind if i in part) % 2 == 0:
                    ok = False
                    break
            if ok:
                kept[ind] = v
        return Tensor(self.n, self.t, kept)

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        ents = [{"i": list(ind), "v": float(self.entries[ind])} for ind in sorted(self.entries)]
        return {"n": self.n, "t": self.t, "entries": ents}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Tensor":
        return cls(
            obj["n"], obj["t"], {tuple(e["i"]): e["v"] for e in obj.get("entries", [])}
        )


def symmetric_tensor_of(p: Polynomial, t: int) -> Tensor:
    """The unique symmetric tensor T_p with T_p(x) = p(x), for p homogeneous
    of degree t.  Entry at each ordering of the variable multiset is the
    coefficient divided by the number of distinct orderings."""
    if not p.is_homogeneous(t):
        raise InputValidationError(f"polynomial is not homogeneous of degree {t}")
    entries: Dict[IndexTuple, object] = {}
    for alpha, c in p.terms.items():
        multiset = []
        for i, a in enumerate(alpha):
            multiset.extend([i + 1] * a)
        tau = distinct_permutation_count(multiset)
        for ind in multiset_orderings(multiset):
            entries[ind] = c / tau if not isinstance(c, int) else _exact_div(c, tau)
    return Tensor(p.n, t, entries)


def _exact_div(c, tau):
    from fractions import Fraction

    if c % tau == 0:
        return c // tau
    return Fraction(c, tau)


def consistency_check(T: Tensor, p: Polynomial, tol: float = 1e-9):
    """Check sum over I_alpha of T_i equals c_alpha for every alpha.

    Returns (ok, violations) where violations lists (alpha, tensor_sum,
    coefficient) triples.
    """
    if T.n != p.n:
        raise DimensionMismatchError("tensor and polynomial over different n")
    if not p.is_homogeneous(T.t):
        raise InputValidationError(f"polynomial is not homogeneous of degree {T.t}")
    sums: Dict[Tuple[int, ...], object] = {}
    for ind, v in T.entries.items():
        alpha = exponents_of_tuple(ind, T.n)
        sums[alpha] = sums.get(alpha, 0) + v
    violations = []
    for alpha in set(sums) | set(p.terms):
        got = sums.get(alpha, 0)
        want = p.terms.get(alpha, 0)
        if abs(got - want) > tol:
            violations.append((alpha, got, want))
    return (not violations, sorted(violations))
