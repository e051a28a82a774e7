"""Acceptance suite: one test per criterion, each printing a single
PASS/FAIL line (stdout capture is disabled via addopts = -s)."""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from certnorms.hypercube import Partition, Polynomial, random_polynomial
from certnorms.matnorms import (
    cb_dualnorm_matrix,
    cb_norm_matrix,
    grothendieck_experiment,
    norm_inf_to_one,
    poly_inf_dualnorm,
)
from certnorms.numopt import operator_norm
from certnorms.queryerror import (
    Sdp2Instance,
    eps_bilinear,
    sdp2_from_polynomial,
    sdp2_parity_lift,
    verify_sdp2_instance,
)
from certnorms.tensors import symmetric_tensor_of
from certnorms.witness import (
    build_family,
    extend_with_identity,
    ratio_report,
    squarefree_density,
    varopoulos_certificate,
)

CHSH = np.array([[1.0, 1.0], [1.0, -1.0]])


def report(num: int, ok: bool, detail: str):
    print(f"CRITERION {num}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, detail


def test_criterion_1_dual_norm_example():
    t0 = time.time()
    third = Fraction(1, 3)
    p = Polynomial(3, {(1, 0, 0): third, (0, 1, 0): third, (0, 0, 1): third})
    P = Partition(3, [[1, 2, 3]])
    iv = poly_inf_dualnorm(p, P)
    route_a = iv.upper
    route_b = iv.upper_witness["route_b_value"]
    elapsed = time.time() - t0
    ok = (
        abs(route_a - 1 / 3) < 1e-9
        and abs(route_b - 1 / 3) < 1e-9
        and abs(route_a - route_b) < 1e-9
        and p.norm_one_exact() == Fraction(1, 2)
        and elapsed < 1.0
    )
    report(1, ok, f"dual sup-norm 1/3 both routes ({route_a:.12f}, {route_b:.12f}), "
                  f"norm_one exactly 1/2, {elapsed:.2f}s")


def test_criterion_2_grothendieck_sandwich():
    t0 = time.time()
    total = 0
    worst_lo, worst_hi = 1.0, 1.0
    ok = True
    for k in (2, 3, 4, 5):
        rep = grothendieck_experiment(k, 25, seed=k)
        total += len(rep.samples)
        ok = ok and rep.all_within
        worst_lo = min(worst_lo, min(s.ratio_lower for s in rep.samples))
        worst_hi = max(worst_hi, max(s.ratio_upper for s in rep.samples))
    elapsed = time.time() - t0
    ok = ok and total == 100 and elapsed < 120.0
    report(2, ok, f"100 certified ratio intervals in [{worst_lo:.6f}, {worst_hi:.6f}] "
                  f"subset of [1-1e-6, 1.7821+1e-4], {elapsed:.1f}s")


def test_criterion_3_chsh_fixtures():
    inf1 = norm_inf_to_one(CHSH)
    cb = cb_norm_matrix(CHSH, seed=0)
    g2 = cb_dualnorm_matrix(CHSH)
    ok = (
        inf1 == 2.0
        and cb.lower <= 2 * math.sqrt(2) <= cb.upper
        and cb.upper - cb.lower < 1e-3
        and g2.lower <= math.sqrt(2) <= g2.upper
        and g2.upper - g2.lower < 1e-3
    )
    report(3, ok, f"inf->1 = {inf1} exact; cb in [{cb.lower:.6f}, {cb.upper:.6f}] "
                  f"(width {cb.upper-cb.lower:.1e}); cb-dual in [{g2.lower:.6f}, {g2.upper:.6f}] "
                  f"(width {g2.upper-g2.lower:.1e})")


def _bounded_2x2(rng):
    while True:
        A = rng.uniform(-1.0, 1.0, size=(2, 2))
        nrm = norm_inf_to_one(A)
        if nrm > 1e-6:
            return A / nrm


def test_criterion_4_certified_query_error():
    rng = np.random.default_rng(41)
    worst_gap = 0.0
    ok = True
    for i in range(25):
        A = _bounded_2x2(rng)
        res = eps_bilinear(A, tol=5e-3, seed=i)
        cb = cb_norm_matrix(A, seed=i)
        almost_gt = min(1.0, max(0.0, 1.0 * (1.0 - 1.0 / max(cb.upper, 1.0))))
        worst_gap = max(worst_gap, res.gap)
        ok = ok and res.gap < 5e-3 and 0.0 <= res.lower <= res.upper <= 1.0
        ok = ok and res.upper <= almost_gt + 1e-4
    report(4, ok, f"25 seeded bounded forms: worst primal-dual gap {worst_gap:.2e} < 5e-3, "
                  f"all E intervals in [0,1] and below the cb-based bound + 1e-4")


def test_criterion_5_desk_scale_analogue():
    grid = [-1.0, -0.5, 0.0, 0.5, 1.0]
    mats = [CHSH / 2.0]
    for a, b, c in itertools.product(grid, repeat=3):
        A = np.array([[1.0, a], [b, c]])
        nrm = norm_inf_to_one(A)
        if nrm > 1e-6:
            mats.append(A / nrm)
    best_lower = 0.0
    worst_upper = 0.0
    ok = True
    for i, A in enumerate(mats):
        res = eps_bilinear(A, tol=5e-3, seed=i)
        best_lower = max(best_lower, res.lower)
        worst_upper = max(worst_upper, res.upper)
        ok = ok and res.upper <= 1.0 - 1.0 / 1.7822 + 1e-2
    target = 1.0 - 1.0 / math.sqrt(2.0)
    ok = ok and best_lower >= target - 1e-2
    report(5, ok, f"sweep of {len(mats)} bounded forms: max certified lower {best_lower:.6f} "
                  f">= 1-1/sqrt2-1e-2, all uppers <= {worst_upper:.6f} <= 1-1/1.7822+1e-2")


def test_criterion_6_witness_certificate_exactness():
    t0 = time.time()
    ok = True
    details = []
    for n in (3, 5, 7):
        fam = build_family(n)
        ext = extend_with_identity(varopoulos_certificate(n))
        ext.require_valid()
        slack = max(abs(operator_norm(np.asarray(M, dtype=float)) - 1.0) for M in ext.A.values())
        T = symmetric_tensor_of(fam.r, 4).scale(24)
        diff = (ext.realize() + T.scale(-1)).l1()
        ok = ok and diff == 0 and slack < 1e-9 and ext.w == 1.0
        details.append(f"n={n}: entrywise diff {diff}, contraction slack {slack:.1e}")
    elapsed = time.time() - t0
    ok = ok and elapsed < 60.0
    report(6, ok, "; ".join(details) + f"; weight 1 certifies cb-dual <= 1; {elapsed:.1f}s")


def test_criterion_7_witness_ratio_table():
    rows = ratio_report([3, 5, 7])
    ok = True
    for r in rows:
        ok = ok and r.exact and 3 * r.n <= 21  # enumeration over 2^{3n} <= 2^21 points
        ok = ok and r.q_norm2_sq == r.n * r.squarefree_count
        ok = ok and abs(r.ratio - r.q_norm_inf / (r.n * r.squarefree_count)) < 1e-15
        ok = ok and r.ratio <= 1.0
    table = ", ".join(f"n={r.n}: ratio={r.ratio:.6f}" for r in rows)
    report(7, ok, f"exact sup-norms by full enumeration (<= 2^21 points); "
                  f"q2^2 = n*S(n) exactly; {table}")


def test_criterion_8_squarefree_density():
    d = squarefree_density(10**4)
    dev = abs(d - 6 / math.pi**2)
    report(8, dev < 0.05, f"S(1e4)/1e4 = {d:.4f}, |deviation from 6/pi^2| = {dev:.4f} < 0.05")


def _random_disjoint_parts(rng, n):
    vars_ = list(rng.permutation(np.arange(1, n + 1)))
    k = int(rng.integers(1, 4))
    parts = []
    for _ in range(k):
        if not vars_:
            break
        size = int(rng.integers(1, min(3, len(vars_)) + 1))
        parts.append([int(vars_.pop()) for _ in range(size)])
    return Partition(n, parts)


def _averaged_projection(p: Polynomial, Q: Partition) -> Polynomial:
    """Symbolic form of the averaging operator: exact coefficient arithmetic."""
    k = len(Q.parts)
    acc: dict = {}
    for zbits in range(1 << k):
        sign = 1
        flipped = set()
        for j, part in enumerate(Q.parts):
            if (zbits >> j) & 1:
                sign = -sign
                flipped |= part
        for alpha, c in p.terms.items():
            flips = sum(alpha[v - 1] for v in flipped)
            term_sign = sign * (-1 if flips % 2 else 1)
            acc[alpha] = acc.get(alpha, 0) + term_sign * Fraction(c) / (1 << k)
    return Polynomial(p.n, acc)


def test_criterion_9_projector_suite():
    rng = np.random.default_rng(90)
    ok = True
    for trial in range(200):
        n = int(rng.integers(4, 13))
        p = random_polynomial(
            n, {1: 2, 2: 3, 3: 2}, seed=int(rng.integers(0, 10**6)), multilinear=True
        )
        Q = _random_disjoint_parts(rng, n)
        proj = p.project_WQ(Q)
        ok = ok and _averaged_projection(p, Q) == proj
        ok = ok and proj.norm_inf_exact() <= p.norm_inf_exact()
        ok = ok and proj.norm_one_exact() <= p.norm_one_exact()
        if not ok:
            break
    report(9, ok, "200 seeded (p, Q) pairs (n <= 12): averaging identity equals the "
                  "coefficient filter exactly; projected sup- and l1-norms never increase "
                  "(exact enumeration)")


def test_criterion_10_parity_lift_round_trips():
    rng = np.random.default_rng(100)
    ok = True
    worst = 0.0
    for trial in range(50):
        coeffs = {}
        for i, j in itertools.product((1, 2), (3, 4)):
            c = float(rng.integers(-3, 4)) / 2.0
            if c:
                alpha = [0, 0, 0, 0]
                alpha[i - 1] = alpha[j - 1] = 1
                coeffs[tuple(alpha)] = c
        if not coeffs:
            coeffs[(1, 0, 1, 0)] = 1.0
        p = Polynomial(4, coeffs)
        P = Partition(4, [[1, 2], [3, 4]])
        base = sdp2_from_polynomial(p, P)
        lifted = sdp2_parity_lift(base, P)
        v_base = verify_sdp2_instance(base, P, p)
        v_lift = verify_sdp2_instance(lifted, P, p, tol=1e-12)
        ok = ok and v_base.ok and v_lift.ok
        if v_base.ok and v_lift.ok:
            worst = max(worst, abs(v_base.value - v_lift.value))
            ok = ok and abs(v_base.value - v_lift.value) < 1e-12
        # single-entry perturbation must be rejected
        i0 = sorted(lifted.A)[trial % len(lifted.A)]
        M = lifted.A[i0].copy()
        r_, c_ = np.unravel_index(np.argmax(np.abs(M)), M.shape)
        M[r_, c_] += 0.01
        bad = Sdp2Instance(
            n=lifted.n, t=lifted.t, d=lifted.d, u=lifted.u, v=lifted.v,
            w=lifted.w, A={**lifted.A, i0: M}, r=lifted.r,
        )
        ok = ok and not verify_sdp2_instance(bad, P, p).ok
        if not ok:
            break
    report(10, ok, f"50 seeded instances: parity lift verified at tol 1e-12 "
                   f"(worst objective drift {worst:.1e}); all 50 single-entry "
                   f"perturbations rejected")
