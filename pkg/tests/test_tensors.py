from fractions import Fraction

import numpy as np
import pytest

from certnorms.errors import InputValidationError
from certnorms.hypercube import Polynomial
from certnorms.tensors import Tensor, consistency_check, symmetric_tensor_of


def chsh_poly():
    # x1 y1 + x1 y2 + x2 y1 - x2 y2 on variables (1,2) x (3,4)
    return Polynomial(
        4,
        {
            (1, 0, 1, 0): 1,
            (1, 0, 0, 1): 1,
            (0, 1, 1, 0): 1,
            (0, 1, 0, 1): -1,
        },
    )


def test_symmetric_tensor_reproduces_polynomial():
    p = chsh_poly()
    T = symmetric_tensor_of(p, 2)
    assert T.is_symmetric()
    for bits in range(16):
        x = [(-1 if (bits >> i) & 1 else 1) for i in range(4)]
        assert T.eval_point(x) == p.eval(x)


def test_symmetric_entries_are_split_exactly():
    p = chsh_poly()
    T = symmetric_tensor_of(p, 2)
    # coefficient 1 on x1 y1 splits over the orderings (1,3) and (3,1)
    assert T.entries[(1, 3)] == Fraction(1, 2)
    assert T.entries[(3, 1)] == Fraction(1, 2)


def test_requires_homogeneous():
    p = Polynomial(2, {(1, 0): 1, (1, 1): 1})
    with pytest.raises(InputValidationError):
        symmetric_tensor_of(p, 2)


def test_permute_round_trip():
    T = Tensor(3, 2, {(1, 2): 1.0, (2, 3): -2.0})
    sigma = (1, 0)
    back = T.permute(sigma).permute(sigma)
    assert back == T


def test_project_parity_filter():
    T = Tensor(4, 2, {(1, 3): 1.0, (1, 2): 1.0})
    from certnorms.hypercube import Partition

    Q = Partition(4, [[1, 2], [3, 4]])
    P = T.project(Q)
    # (1,3) hits both parts once (odd/odd); (1,2) hits the first part twice
    assert (1, 3) in P.entries and (1, 2) not in P.entries


def test_eval_ops_matches_word_products():
    T = Tensor(2, 2, {(1, 2): 1.0, (2, 1): -0.5})
    A = {1: np.array([[0.0, 1.0], [0.0, 0.0]]), 2: np.array([[1.0, 0.0], [0.0, -1.0]])}
    M = T.eval_ops(A)
    expected = 1.0 * A[1] @ A[2] - 0.5 * A[2] @ A[1]
    assert np.allclose(M, expected)


def test_consistency_check():
    p = chsh_poly()
    T = symmetric_tensor_of(p, 2)
    ok, violations = consistency_check(T, p)
    assert ok and not violations


def test_json_round_trip():
    T = Tensor(3, 2, {(1, 2): 1.0, (3, 3): 2.5})
    assert Tensor.from_json(T.to_json()) == T
