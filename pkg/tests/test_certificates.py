import numpy as np
import pytest

from certnorms.certificates import (
    CbCertificate,
    CertifiedInterval,
    add,
    basis_certificate,
    cb_dualnorm_upper,
    cb_norm_lower,
    certificate_parity_lift,
    from_ell1,
    scale,
)
from certnorms.errors import CertifiedBoundError
from certnorms.hypercube import Partition
from certnorms.tensors import Tensor


def test_basis_certificate_realizes_basis_tensor():
    cert = basis_certificate((2, 1, 2), n=3, t=3)
    cert.require_valid()
    R = cert.realize()
    assert R == Tensor(3, 3, {(2, 1, 2): 1})
    assert cert.w == 1


def test_add_and_scale():
    c1 = scale(basis_certificate((1, 2), 2, 2), 2.0)
    c2 = scale(basis_certificate((2, 1), 2, 2), -0.5)
    c = add(c1, c2)
    c.require_valid()
    R = c.realize()
    assert float(R.entries[(1, 2)]) == pytest.approx(2.0, abs=1e-12)
    assert float(R.entries[(2, 1)]) == pytest.approx(-0.5, abs=1e-12)
    assert c.w == pytest.approx(2.5)


def test_from_ell1_weight_is_l1():
    T = Tensor(2, 2, {(1, 2): 3.0, (2, 2): -1.0})
    cert = from_ell1(T)
    cert.require_valid()
    assert cert.w == pytest.approx(4.0)
    R = cert.realize()
    for ind in set(R.entries) | set(T.entries):
        assert float(R.entries.get(ind, 0)) == pytest.approx(float(T.entries.get(ind, 0)), abs=1e-12)


def test_parity_lift_preserves_realization_and_weight():
    T = Tensor(4, 2, {(1, 3): 1.0, (2, 4): -2.0})
    cert = from_ell1(T)
    Q = Partition(4, [[1, 2], [3, 4]])
    lifted = certificate_parity_lift(cert, Q)
    lifted.require_valid()
    assert lifted.w == pytest.approx(cert.w)
    R = lifted.realize()
    # entries surviving the parity filter are reproduced; others vanish
    P = T.project(Q)
    for ind in set(R.entries) | set(P.entries):
        assert float(R.entries.get(ind, 0)) == pytest.approx(float(P.entries.get(ind, 0)), abs=1e-12)


def test_cb_dualnorm_upper_rejects_wrong_candidate():
    T = Tensor(2, 2, {(1, 2): 1.0})
    wrong = basis_certificate((2, 1), 2, 2)  # realizes a different tensor
    cheap = scale(wrong, 0.5)  # lighter than from_ell1, so it gets checked
    with pytest.raises(CertifiedBoundError):
        cb_dualnorm_upper(T, [cheap])


def test_cb_dualnorm_upper_accepts_exact_candidate():
    T = Tensor(2, 2, {(1, 2): 1.0, (2, 1): 1.0})
    # hand-built weight-1 certificate on a 4-dim graded space:
    # both words (1,2) and (2,1) walk e4 -> middle -> e1
    A1 = np.zeros((4, 4))
    A1[1, 3] = 1.0  # e4 -> e2
    A1[0, 2] = 1.0  # e3 -> e1
    A2 = np.zeros((4, 4))
    A2[2, 3] = 1.0  # e4 -> e3
    A2[0, 1] = 1.0  # e2 -> e1
    cand = CbCertificate(
        n=2,
        t=2,
        d=4,
        u=np.array([1.0, 0, 0, 0]),
        v=np.array([0, 0, 0, 1.0]),
        A={1: A1, 2: A2},
        w=1.0,
    )
    cand.require_valid()
    # <u, A(i1) A(i2) v>: A(1)A(2) and A(2)A(1) both step 1->4
    assert cand.value_at((1, 2)) == pytest.approx(1.0)
    assert cand.value_at((2, 1)) == pytest.approx(1.0)
    assert cand.value_at((1, 1)) == pytest.approx(0.0)
    assert cand.value_at((2, 2)) == pytest.approx(0.0)
    w, best = cb_dualnorm_upper(T, [cand])
    assert w == pytest.approx(1.0)


def test_cb_norm_lower_is_certified():
    T = Tensor(2, 2, {(1, 2): 1.0, (2, 1): 1.0})
    val, (u, v, A) = cb_norm_lower(T, d=3, restarts=8, seed=1, sweeps=60)
    # re-check: unit vectors, contractions, value
    assert np.linalg.norm(u) <= 1 + 1e-9 and np.linalg.norm(v) <= 1 + 1e-9
    from certnorms.numopt import operator_norm

    for M in A.values():
        assert operator_norm(M) <= 1 + 1e-8
    total = sum(val_ * float(u @ (A[i] @ (A[j] @ v))) for (i, j), val_ in T.entries.items())
    assert abs(total) == pytest.approx(val, abs=1e-8)
    assert val >= 1.0 - 1e-6  # l1-seeded start guarantees sum(T_i^2)/l1(T) = 1


def test_interval_invariant():
    with pytest.raises(CertifiedBoundError):
        CertifiedInterval(lower=2.0, upper=1.0)
    iv = CertifiedInterval(lower=1.0, upper=1.5)
    assert iv.to_json() == {"lower": 1.0, "upper": 1.5}


def test_certificate_json_round_trip():
    cert = basis_certificate((1, 2), 2, 2)
    back = CbCertificate.from_json(cert.to_json())
    back.require_valid()
    assert back.realize() == cert.realize()
    assert back.w == cert.w
