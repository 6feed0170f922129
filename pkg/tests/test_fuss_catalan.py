import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from tenspec.fuss_catalan import (
    FCParams,
    HypergeometricError,
    density_P,
    fc_branch_solve,
    fc_cdf,
    fc_density,
    fc_number,
    fc_series,
    hypergeometric_series,
    r_max,
    radial_cdf,
    rho_gurau,
    rho_radial,
    x_max,
    z_c,
)


def test_catalan_and_fuss_numbers():
    assert [fc_number(2, k) for k in range(5)] == [1, 1, 2, 5, 14]
    assert fc_number(3, 3) == 12
    assert [fc_number(3, k) for k in range(6)] == [1, 1, 3, 12, 55, 273]
    with pytest.raises(ValueError):
        fc_number(3, -1)


@pytest.mark.parametrize("p", [2, 3, 4, 5])
def test_recursion_of_fuss_numbers(p):
    # F(k+1) = Σ over p-compositions of k of the product of F's (coefficients of q = 1 + z q^p)
    poly = np.array([float(fc_number(p, k)) for k in range(8)])
    prod = np.array([1.0])
    for _ in range(p):
        prod = np.convolve(prod, poly)[:8]
    assert np.allclose(poly[1:], prod[:7])


def test_edge_constants():
    assert z_c(2) == 0.25 and x_max(2) == 4
    assert abs(z_c(3) - 4 / 27) < 1e-16
    assert FCParams(2).w_c == 2
    with pytest.raises(ValueError):
        FCParams(1)


# --- branch solve --------------------------------------------------------------------

def test_branch_quadratic():
    assert abs(fc_branch_solve(2, 1 / 8) - (1 - math.sqrt(0.5)) / 0.25) < 1e-13


def test_branch_matches_series():
    assert abs(fc_branch_solve(3, 0.05) - fc_series(3, 0.05, 40)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.floats(0.01, 3.0), st.floats(0.05, math.pi - 0.05))
def test_branch_solves_equation_off_axis(p, mod, arg):
    z = mod * z_c(p) * cmath.exp(1j * arg)
    q = fc_branch_solve(p, z)
    assert abs(q - 1 - z * q ** p) < 1e-10 * max(1, abs(q) ** p)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.floats(-0.9, 0.9))
def test_branch_is_the_series_inside_disk(p, frac):
    z = frac * z_c(p)
    assert abs(fc_branch_solve(p, z) - fc_series(p, z, 400)) < 1e-9


def test_branch_at_critical_point():
    # double root q = p/(p-1) at z_c
    for p in (2, 3, 4):
        q = fc_branch_solve(p, z_c(p) * (1 - 1e-12))
        assert abs(q - p / (p - 1)) < 1e-4


# --- hypergeometric series -----------------------------------------------------------

def test_binomial_case():
    assert abs(hypergeometric_series([0.5], [], 0.25) - 2 / math.sqrt(3)) < 1e-15


def test_terminating_case():
    # 2F1(-2, b; c; x) is a quadratic
    b, c, x = 1.5, 2.5, 0.7
    want = 1 + (-2 * b / c) * x + (-2 * -1 * b * (b + 1)) / (c * (c + 1) * 2) * x ** 2
    assert abs(hypergeometric_series([-2, b], [c], x) - want) < 1e-14


def density_params(p):
    return fc_density(p).params


@pytest.mark.parametrize("p", [3, 4])
@pytest.mark.parametrize("x", [-0.6, 0.2, 0.5, 0.9, 0.99, 0.9999, 1.0])
def test_against_mpmath(p, x):
    for up, lo in density_params(p):
        want = float(mpmath.hyper(up, lo, x))
        got, err = hypergeometric_series(up, lo, x, return_error=True)
        assert abs(got - want) <= 1e-12 * max(1, abs(want))
        assert err <= 1e-12 * max(1, abs(want))


def test_brute_force_partial_sum():
    up, lo = density_params(3)[1]
    t, s = 1.0, 1.0
    for k in range(10 ** 6):
        t *= (up[0] + k) * (up[1] + k) / ((lo[0] + k) * (k + 1)) * 0.5
        s += t
        if t < 1e-300:
            break
    assert abs(hypergeometric_series(up, lo, 0.5) - s) < 1e-12


def test_generic_levin_route():
    # integer excess, so the Levin path rather than the edge model is taken
    up, lo = [0.3, 0.4], [1.7]
    for x in (0.9, 0.99):
        assert abs(hypergeometric_series(up, lo, x) - float(mpmath.hyp2f1(0.3, 0.4, 1.7, x))) < 1e-12


@pytest.mark.parametrize("args", [([1.0], [0.0], 0.5), ([1.0], [-2.0], 0.5), ([1.0, 1.0], [1.0], 1.5),
                                  ([1.0, 1.0], [1.5], 0.95)])
def test_hypergeometric_errors(args):
    with pytest.raises(HypergeometricError):
        hypergeometric_series(*args)


# --- densities -----------------------------------------------------------------------

def stieltjes_density(p, x):
    """P_p(x) = Im q(1/x)/(π x) with q the upper root continuing q(0)=1 (polynomial roots)."""
    z = 1 / x
    c = np.zeros(p + 1)
    c[0], c[p - 1], c[p] = z, -1.0, 1.0  # z q^p - q + 1, highest power first
    roots = np.roots(c)
    up = [q for q in roots if q.imag > 1e-12]
    q = min(up, key=lambda w: cmath.phase(w))
    return q.imag / (math.pi * x)


def test_p2_closed_form():
    for x in np.linspace(0.01, 3.99, 37):
        assert abs(density_P(2, x) - math.sqrt(4 - x) / (2 * math.pi * math.sqrt(x))) < 1e-12


@pytest.mark.parametrize("p", [3, 4, 5])
def test_density_matches_stieltjes_inversion(p):
    for x in np.linspace(0.02, 0.999, 25) * x_max(p):
        assert abs(density_P(p, x) - stieltjes_density(p, x)) < 1e-9 * max(1.0, stieltjes_density(p, x))


@pytest.mark.parametrize("p", [2, 3, 4])
def test_density_vanishes_at_edge(p):
    vals = [density_P(p, x_max(p) * (1 - eps)) for eps in (1e-2, 1e-4, 1e-6)]
    assert vals[0] > vals[1] > vals[2] >= 0 and vals[2] < 1e-2


def test_density_domain():
    with pytest.raises(ValueError):
        density_P(3, 0.0)
    with pytest.raises(ValueError):
        density_P(3, x_max(3) + 0.1)


@pytest.mark.parametrize("p", [2, 3, 4])
def test_cdf(p):
    assert fc_cdf(p, 0) == 0 and fc_cdf(p, x_max(p)) == 1
    assert abs(fc_cdf(p, x_max(p) * (1 - 1e-12)) - 1) < 1e-6
    xs = np.linspace(0.1, 0.9, 5) * x_max(p)
    vals = [fc_cdf(p, x) for x in xs]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_gurau_semicircle():
    for y in np.linspace(-1.99, 1.99, 41):
        assert abs(rho_gurau(2, y) - math.sqrt(4 - y * y) / (2 * math.pi)) < 1e-12


@pytest.mark.parametrize("p", [2, 3, 4])
def test_gurau_normalisation(p):
    wc = math.sqrt(x_max(p))
    val, _ = integrate.quad(lambda y: rho_gurau(p, y), 0, wc, points=[wc / 2], limit=200)
    assert abs(2 * val - 1) < 1e-6
    assert rho_gurau(p, 0.3) == rho_gurau(p, -0.3)
    with pytest.raises(ValueError):
        rho_gurau(p, wc)


def test_gurau_at_zero():
    assert abs(rho_gurau(2, 0.0) - 1 / math.pi) < 1e-12
    assert rho_gurau(3, 0.0) == math.inf


def test_radial_p2():
    assert r_max(2, 0.5) == 2
    for r in np.linspace(0.05, 1.95, 20):
        assert abs(rho_radial(2, 0.5, r) - math.sqrt(4 - r * r) / math.pi) < 1e-12
    with pytest.raises(ValueError):
        rho_radial(2, 0.5, 2.0)


@pytest.mark.parametrize("p,mt", [(2, 0.5), (3, 1 / 3), (4, 0.25), (4, 1.0)])
def test_radial_cdf_against_quadrature(p, mt):
    rm = r_max(p, mt)
    rs = rm * np.array([0.9, 0.2, 0.5, 0.999])
    cdf = radial_cdf(p, mt, rs)
    for r, c in zip(rs, cdf):
        val, _ = integrate.quad(lambda s: rho_radial(p, mt, s), 0, r, limit=200)
        assert abs(c - val) < 1e-8
    assert abs(radial_cdf(p, mt, [rm * 2])[0] - 1) < 1e-10
    assert radial_cdf(p, mt, [0.0])[0] == 0


def test_radial_cdf_matches_fc_cdf():
    p, mt = 3, Fraction(1, 3)
    x = 2.5
    r = (x * p * float(mt)) ** (1 / p)
    assert abs(radial_cdf(p, float(mt), [r])[0] - fc_cdf(p, x)) < 1e-9
