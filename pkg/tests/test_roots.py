import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from tenspec.closed import avg_coeffs, mu_from_tilde
from tenspec.fuss_catalan import fc_number
from tenspec.roots import (
    ScaledPoly,
    avg_roots,
    find_roots,
    lift_roots,
    power_sums,
    power_sums_from_coeffs,
    reduce_by_symmetry,
    verify_generating_identity,
)


def same_multiset(a, b, tol):
    d = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(d)
    return len(a) == len(b) and float(d[r, c].max()) < tol


mu = Fraction(1, 5)


def test_reduction_examples():
    m, W = reduce_by_symmetry(avg_coeffs(5, 3, mu))
    assert m == 2 and W.exact == [-60 * mu, 1]
    m, W = reduce_by_symmetry(avg_coeffs(4, 2, mu))
    assert m == 0 and W.exact == [12 * mu ** 2, -12 * mu, 1]
    for p in (2, 3, 5):
        m, W = reduce_by_symmetry(avg_coeffs(p, p, mu))
        assert m == 0 and W.exact == [-mu * math.factorial(p), 1]


def test_linear_root():
    rs = find_roots(ScaledPoly.from_exact([-1, 1]))
    assert abs(rs.roots[0] - 1) < 1e-15


def test_cube_roots_lift():
    rs = lift_roots([1.0], 3, 0)
    want = np.exp(2j * np.pi * np.arange(3) / 3)
    assert same_multiset(rs.roots, want, 1e-14)
    rs = avg_roots(3, 3, Fraction(1, 6))
    assert same_multiset(rs.roots, want, 1e-13)


def test_zero_roots_from_n_mod_p():
    rs = avg_roots(11, 3, Fraction(1, 3) / 121)
    assert rs.multiplicity_at_zero == 2
    assert np.sum(rs.roots == 0) == 2


@pytest.mark.parametrize("n,p", [(30, 2), (40, 3), (60, 4), (35, 5)])
def test_against_mpmath_polyroots(n, p):
    """Aberth roots of W agree with an independent arbitrary-precision solver."""
    Z = avg_coeffs(n, p, mu_from_tilde(Fraction(1, p), n, p))
    _, W = reduce_by_symmetry(Z)
    ours = find_roots(W).roots
    coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(W.exact)]
    ref = np.array([complex(r) for r in mpmath.polyroots(coeffs, maxsteps=400, extraprec=400)])
    scale = float(np.max(np.abs(ref)))
    assert same_multiset(ours, ref, 1e-11 * scale)


def test_init_strategies_agree():
    _, W = reduce_by_symmetry(avg_coeffs(120, 3, mu_from_tilde(Fraction(1, 3), 120, 3)))
    a = find_roots(W, init="polygon").roots
    b = find_roots(W, init="circle").roots
    assert same_multiset(a, b, 1e-12 * float(np.max(np.abs(a))))


def test_companion_agrees_at_low_degree():
    # double precision is only trustworthy while W stays well conditioned
    _, W = reduce_by_symmetry(avg_coeffs(45, 3, mu_from_tilde(Fraction(1, 3), 45, 3)))
    a = find_roots(W).roots
    b = find_roots(W, method="companion").roots
    assert same_multiset(a, b, 1e-10 * float(np.max(np.abs(a))))


def test_large_degree_residuals():
    n, p = 1200, 4
    rs = avg_roots(n, p, mu_from_tilde(Fraction(1, 4), n, p))
    assert len(rs) == n
    assert float(rs.residual.max()) <= 1e-13
    assert rs.precision_bits >= 64


def test_float_mu_path():
    n, p = 45, 3
    exact_rs = avg_roots(n, p, mu_from_tilde(Fraction(1, 3), n, p))
    float_rs = avg_roots(n, p, (1 / 3) / n ** 2)
    assert same_multiset(exact_rs.sroots, float_rs.sroots, 1e-10 * float(np.max(np.abs(exact_rs.sroots))))


def test_unknown_method():
    with pytest.raises(ValueError):
        find_roots(ScaledPoly.from_exact([1, 0, 1]), method="nope")


def test_power_sums_unit_roots():
    rs = lift_roots([1.0], 3, 0)
    ps = power_sums(rs, 6)
    assert abs(ps[3] - 3) < 1e-14 and ps[1] == 0 and abs(ps[6] - 3) < 1e-14


def test_power_sums_routes_agree():
    n, p = 60, 3
    Z = avg_coeffs(n, p, mu_from_tilde(Fraction(1, 3), n, p))
    via_roots = power_sums(avg_roots(n, p, Z.mu), 12)
    via_newton = power_sums_from_coeffs(Z.exact_coeffs(), 12)
    for k in range(13):
        assert abs(via_roots[k] - float(via_newton[k])) < 1e-9 * max(1.0, abs(float(via_newton[k])))


def test_newton_identities_on_known_polynomial():
    # (λ-1)(λ-2)(λ-3)
    assert power_sums_from_coeffs([-6, 11, -6, 1], 3) == [3, 6, 14, 36]
    with pytest.raises(ValueError):
        power_sums_from_coeffs([1, 2], 2)


def test_power_sum_bias_scales_inverse_n():
    """N (Ξ_N(3k)/N - F_3(k)) approaches a k-dependent constant."""
    limits = {1: -3, 2: -24, 3: -174}
    prev = None
    for n in (300, 1200):
        P = power_sums_from_coeffs(avg_coeffs(n, 3, mu_from_tilde(Fraction(1, 3), n, 3)).exact_coeffs(), 9)
        scaled = {k: float((P[3 * k] / n - fc_number(3, k)) * n) for k in limits}
        gaps = {k: abs(scaled[k] - limits[k]) for k in limits}
        if prev:
            assert all(gaps[k] < prev[k] / 3 for k in limits)
        prev = gaps
    assert all(prev[k] < 0.01 * abs(limits[k]) for k in limits)


def test_generating_identity_quadratic():
    from tenspec.algebra import LambdaPoly

    gap, bound = verify_generating_identity(LambdaPoly([-1, 0, 1]), 2, 20)
    assert gap <= bound and bound < 2 ** -19 * 4


def test_generating_identity_tensor_case():
    n, p = 50, 4
    Z = avg_coeffs(n, p, mu_from_tilde(Fraction(1, 4), n, p))
    gap, bound = verify_generating_identity(Z, 3, 40)
    assert gap <= bound


def test_generating_identity_inside_disk():
    with pytest.raises(ValueError):
        verify_generating_identity(avg_coeffs(10, 2, Fraction(1, 2)), Fraction(1, 10), 10)
