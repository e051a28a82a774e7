import itertools
import math

import pytest

from certnorms.errors import InputValidationError
from certnorms.tensors import symmetric_tensor_of
from certnorms.witness import (
    build_family,
    build_qn,
    extend_with_identity,
    moebius_sieve,
    ratio_report,
    ratio_report_csv,
    squarefree_count,
    squarefree_density,
    varopoulos_certificate,
)


def mu_reference(a: int) -> int:
    m, cnt, d = a, 0, 2
    while d * d <= m:
        if m % d == 0:
            m //= d
            cnt += 1
            if m % d == 0:
                return 0
        else:
            d += 1
    if m > 1:
        cnt += 1
    return (-1) ** cnt


def test_moebius_sieve_matches_reference():
    tab = moebius_sieve(200)
    for a in range(1, 201):
        assert tab[a] == mu_reference(a), a


def test_squarefree_density_near_six_over_pi_squared():
    assert abs(squarefree_density(10**4) - 6 / math.pi**2) < 0.05


def test_build_qn_structure():
    q = build_qn(5)
    # one monomial per (a, b) with nonzero Moebius value; coefficients +-1
    assert all(c in (-1, 1) for c in q.terms.values())
    assert len(q.terms) == 5 * squarefree_count(5)
    # every monomial uses exactly one variable from each of the three blocks
    for alpha in q.terms:
        assert sum(alpha) == 3
        for blk in range(3):
            assert sum(alpha[blk * 5 : (blk + 1) * 5]) == 1


def test_family_exact_norms_small_n():
    fam = build_family(3)
    assert fam.exact
    assert fam.q_norm2_sq == 3 * squarefree_count(3) == 9
    assert fam.q_norm_inf == 9  # all nine signs align at some point
    assert float(fam.r_norm_1) == pytest.approx(81 / 32)


def test_even_n_rejected():
    with pytest.raises(InputValidationError):
        build_family(4)
    with pytest.raises(InputValidationError):
        varopoulos_certificate(6)


def test_certificate_realizes_6_times_symmetric_tensor():
    fam = build_family(3)
    cert = varopoulos_certificate(3)
    cert.require_valid()
    R = cert.realize()
    T = symmetric_tensor_of(fam.q, 3).scale(6)
    assert (R + T.scale(-1)).l1() == 0  # exact integer equality


def test_extension_realizes_24_times_extended_tensor():
    fam = build_family(3)
    ext = extend_with_identity(varopoulos_certificate(3))
    ext.require_valid()
    assert ext.w == 1.0
    R = ext.realize()
    T = symmetric_tensor_of(fam.r, 4).scale(24)
    assert (R + T.scale(-1)).l1() == 0


def test_shorter_words_vanish():
    # grading: any word of length != 3 pairs u with the wrong level
    cert = varopoulos_certificate(3)
    for ind in itertools.product(range(1, 10), repeat=2):
        assert cert.value_at(ind) == 0


def test_ratio_report_exact_identities():
    rows = ratio_report([3, 5])
    for r in rows:
        assert r.exact
        assert r.q_norm2_sq == r.n * r.squarefree_count
        assert r.cbdual_upper == 1.0
        assert r.ratio == pytest.approx(r.q_norm_inf / r.q_norm2_sq)
        assert r.ratio <= 1.0 + 1e-12
    # the ratio shrinks with n (finite-scale trend of the vanishing ratio)
    assert rows[1].ratio < rows[0].ratio


def test_ratio_report_csv_schema():
    text = ratio_report_csv(ratio_report([3]))
    header = text.splitlines()[0]
    assert header == (
        "n,q_norm2_sq,squarefree_count,q_norm_inf,exact,cbdual_upper,"
        "infdual_lower,ratio,eps_lower,r_norm_1"
    )
