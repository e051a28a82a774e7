import math

import numpy as np
import pytest

from certnorms.errors import CertifiedBoundError, InputValidationError
from certnorms.hypercube import Partition, Polynomial
from certnorms.queryerror import (
    Sdp2Instance,
    all_orderings_tensor,
    alpha_of_tuple,
    eps_bilinear,
    eps_lower_from_witness,
    eps_upper_via_cb,
    probe_open_question,
    sdp2_from_polynomial,
    sdp2_parity_lift,
    verify_sdp2_instance,
    xor_game_values,
)

CHSH = np.array([[1.0, 1.0], [1.0, -1.0]])


def chsh_poly():
    return Polynomial(
        4,
        {(1, 0, 1, 0): 1, (1, 0, 0, 1): 1, (0, 1, 1, 0): 1, (0, 1, 0, 1): -1},
    )


def test_eps_bilinear_chsh_half():
    res = eps_bilinear(CHSH / 2.0, tol=1e-4, seed=0)
    target = 1.0 - 1.0 / math.sqrt(2.0)
    assert res.lower <= target + 1e-9
    assert res.upper >= target - 1e-9
    assert res.gap < 1e-4
    assert res.converged


def test_eps_interval_in_unit_range():
    rng = np.random.default_rng(11)
    for i in range(3):
        A = rng.uniform(-1, 1, size=(2, 2))
        from certnorms.matnorms import norm_inf_to_one

        A = A / norm_inf_to_one(A)
        res = eps_bilinear(A, tol=5e-3, seed=i)
        assert 0.0 <= res.lower <= res.upper <= 1.0


def test_eps_upper_via_cb_is_clamped():
    # the CHSH polynomial has sup norm 2; the raw bound 2(1 - 1/(2 sqrt 2))
    # exceeds 1, but E is an expectation error so it is clamped to [0, 1]
    p = chsh_poly()
    P = Partition(4, [[1, 2], [3, 4]])
    ub = eps_upper_via_cb(p, P)
    assert ub == 1.0


def test_eps_upper_via_cb_rejects_high_order_without_bound():
    p = Polynomial(3, {(1, 1, 1): 1})
    P = Partition(3, [[1], [2], [3]])
    with pytest.raises(InputValidationError):
        eps_upper_via_cb(p, P)
    assert eps_upper_via_cb(p, P, allow_l1=True) == 0.0  # cb upper = 1 here


def test_eps_lower_from_witness_with_graded_certificate():
    from certnorms.witness import build_family, extend_with_identity, varopoulos_certificate

    fam = build_family(3)
    cert = extend_with_identity(varopoulos_certificate(3))
    val = eps_lower_from_witness(fam.p, fam.r, cert, ub_infdual=float(fam.r_norm_1))
    # <p_3, r_3> = ||q_3||_2^2/||q_3||_inf = 1, so the bound degenerates to 0
    assert val == pytest.approx(0.0, abs=1e-12)


def test_alpha_of_tuple_parity():
    assert alpha_of_tuple((1, 1, 2, 3), 3) == (0, 1, 1)
    assert alpha_of_tuple((4, 4), 3) == (0, 0, 0)  # n+1 entries are ignored


def test_all_orderings_tensor_evaluates_scaled_polynomial():
    p = chsh_poly()
    T = all_orderings_tensor(p, 2)
    # the full coefficient sits at each of the 2! orderings, so T(x) = 2 p(x)
    for bits in range(16):
        x = [(-1 if (bits >> i) & 1 else 1) for i in range(4)]
        assert float(T.eval_point(x)) == pytest.approx(2 * p.eval(x))


def test_sdp2_round_trip_and_verification():
    p = Polynomial(4, {(1, 0, 1, 0): 0.5, (0, 1, 0, 1): -0.25})
    P = Partition(4, [[1, 2], [3, 4]])
    base = sdp2_from_polynomial(p, P)
    v1 = verify_sdp2_instance(base, P, p)
    assert v1.ok, v1.violations
    lifted = sdp2_parity_lift(base, P)
    v2 = verify_sdp2_instance(lifted, P, p)
    assert v2.ok, v2.violations
    assert v2.value == pytest.approx(v1.value, abs=1e-9)
    # JSON round trip preserves verification
    back = Sdp2Instance.from_json(lifted.to_json())
    assert verify_sdp2_instance(back, P, p).ok


def test_sdp2_rejects_perturbation():
    p = Polynomial(4, {(1, 0, 1, 0): 0.5, (0, 1, 0, 1): -0.25})
    P = Partition(4, [[1, 2], [3, 4]])
    inst = sdp2_parity_lift(sdp2_from_polynomial(p, P), P)
    i = sorted(inst.A)[0]
    M = inst.A[i].copy()
    r, c = np.unravel_index(np.argmax(np.abs(M)), M.shape)
    M[r, c] += 0.01
    bad = Sdp2Instance(
        n=inst.n, t=inst.t, d=inst.d, u=inst.u, v=inst.v, w=inst.w,
        A={**inst.A, i: M}, r=inst.r,
    )
    v = verify_sdp2_instance(bad, P, p)
    assert not v.ok
    assert v.violations


def test_xor_game_values_chsh():
    rec = xor_game_values(CHSH)
    assert rec.classical_unnormalized == pytest.approx(2.0)
    # quantum bias interval brackets Tsirelson 2 sqrt 2
    q = rec.quantum_unnormalized
    assert q.lower - 1e-9 <= 2 * math.sqrt(2) <= q.upper + 1e-9
    # normalized convention: divide by the total question mass
    assert rec.mass == pytest.approx(4.0)
    assert rec.classical_normalized == pytest.approx(0.5)
    assert rec.quantum_normalized.upper <= q.upper / 4 + 1e-12


def test_probe_open_question_rows_respect_bound():
    rows = probe_open_question(3, k=2, seed=7)
    assert rows  # includes the CHSH/2 fixture first
    assert rows[0].eps_lower == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-6)
    for r in rows:
        assert r.eps_upper <= r.almost_gt_upper + 1e-4
