"""Densities on the real axis, atoms, tails and curve assembly."""

import json
import math

import numpy as np
import pytest

from htspectra.density import (
    DensityCurve,
    atom_at_zero_wishart,
    build_density_curve,
    default_eps_schedule,
    density_band,
    density_band_detail,
    density_wigner_formula,
    density_wishart,
    semicircle_cdf,
    semicircle_density,
    tail_constant,
)
from htspectra.matrices import SigmaProfile
from htspectra.special import AlphaParam


CONST = SigmaProfile("constant", c=1.0)
BAND = SigmaProfile("band", breakpoints=(0.0, 0.25, 0.75, 1.0),
                    values=(1.0, 0.0, 1.0))


def test_semicircle_closed_form():
    assert abs(semicircle_density(0.0) - 1.0 / math.pi) < 1e-15
    assert semicircle_density(2.5) == 0.0
    assert semicircle_cdf(-2.0) == 0.0
    assert abs(semicircle_cdf(0.0) - 0.5) < 1e-14
    assert semicircle_cdf(2.0) == 1.0


def test_alpha_two_reduces_to_semicircle():
    a = AlphaParam(2.0, alpha_two_mode=True)
    for t in (0.3, 1.0, 1.7):
        got = density_wigner_formula(a, t)
        assert abs(got - semicircle_density(t)) < 1e-8


def test_cauchy_center_value():
    # at alpha=1 the density at 0+ equals 1/pi
    a = AlphaParam(1.0)
    got = density_wigner_formula(a, 1e-3)
    assert abs(math.pi * got - 1.0) < 1e-3


def test_wigner_density_even():
    a = AlphaParam(1.5)
    assert abs(density_wigner_formula(a, 0.8)
               - density_wigner_formula(a, -0.8)) < 1e-11


def test_two_wigner_expressions_cross_check():
    # density_wigner_formula raises unless both algebraic forms agree;
    # also check it against the generic band route
    a = AlphaParam(1.2)
    for t in (0.5, 2.0, 10.0):
        v1 = density_wigner_formula(a, t)
        v2 = density_band(a, CONST, t)
        assert abs(v1 - v2) < 1e-9 * max(1.0, v1)


def test_plemelj_extrapolation_consistent():
    a = AlphaParam(1.5)
    value, plemelj, eps = density_band_detail(a, CONST, 1.3)
    assert eps <= 1e-5
    assert abs(value - plemelj) < 1e-6


def test_tail_constants_exact():
    a = AlphaParam(1.0)
    assert abs(tail_constant(a, CONST) - 0.5) < 1e-15
    # band: integral of |phi|^alpha = 0.5 exactly from the breakpoints
    assert abs(tail_constant(AlphaParam(1.5), BAND) - 0.75 * 0.5) < 1e-15
    from htspectra.matrices import covariance_profile
    prof = covariance_profile(0.5)
    want = 0.5 * 2.0 * 0.5 / 1.5**2      # (alpha/2) * 2 gamma/(1+gamma)^2
    assert abs(tail_constant(a, prof) - want) < 1e-14


def test_tail_fit_matches_exact_constant():
    a = AlphaParam(1.0)
    const, disc = tail_constant(a, CONST, with_fit=True)
    assert const == 0.5
    assert disc < 0.05


def test_band_equals_scaled_wigner():
    # the band profile is spectrally equivalent to the constant profile
    # sigma = (int |phi|^alpha)^(1/alpha)
    a = AlphaParam(1.5)
    sig = 0.5 ** (1.0 / 1.5)
    for t in (0.4, 1.1):
        lhs = density_band(a, BAND, t)
        rhs = density_wigner_formula(a, t / sig) / sig
        assert abs(lhs - rhs) < 1e-8


def test_wishart_gamma_one_alpha_two_is_marchenko_pastur():
    a = AlphaParam(2.0, alpha_two_mode=True)
    # MP(1) density at t: sqrt(4/t - 1)/(2 pi); at t=1 this is sqrt(3)/(2 pi)
    got = density_wishart(a, 1.0, 1.0)
    assert abs(got - math.sqrt(3.0) / (2.0 * math.pi)) < 1e-8
    assert density_wishart(a, 1.0, 4.5) < 1e-8


def test_wishart_validation():
    a = AlphaParam(1.2)
    with pytest.raises(ValueError):
        density_wishart(a, 0.5, -1.0)
    with pytest.raises(ValueError):
        density_wishart(a, 1.5, 1.0)
    with pytest.raises(ValueError):
        atom_at_zero_wishart(a, 1.0)


def test_wishart_atom_equals_one_minus_gamma():
    a = AlphaParam(1.2)
    atom = atom_at_zero_wishart(a, 0.5)
    assert abs(atom - 0.5) < 1e-3
    atom9 = atom_at_zero_wishart(a, 0.9)
    assert abs(atom9 - 0.1) < 1e-3


def test_wishart_density_positive_near_zero():
    a = AlphaParam(1.2)
    for t in (0.05, 0.2, 1.0):
        assert density_wishart(a, 0.5, t) > 0.0


def test_eps_schedule_shape():
    sched = default_eps_schedule()
    assert sched[0] == 0.5
    assert all(b < a for a, b in zip(sched, sched[1:]))
    assert sched[-1] >= 1e-6


def test_curve_mass_and_cdf():
    a = AlphaParam(1.0)
    curve = build_density_curve(a, "wigner", t_min=1e-3, t_max=200.0,
                                points=60)
    mass = curve.total_mass()
    # trapezoid error on a 60-point log grid dominates the defect
    assert abs(mass - 1.0) < 2e-2
    cdf = curve.cdf()
    assert abs(cdf(0.0) - 0.5) < 5e-3
    assert cdf(250.0) <= 1.0
    assert cdf(-0.5) < cdf(0.5)


def test_curve_validation():
    with pytest.raises(ValueError):
        DensityCurve(alpha=1.0, model="wigner", grid=np.array([1.0]),
                     rho=np.array([1.0]))
    with pytest.raises(ValueError):
        DensityCurve(alpha=1.0, model="wigner", grid=np.array([1.0, 0.5]),
                     rho=np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        DensityCurve(alpha=1.0, model="wigner", grid=np.array([0.5, 1.0]),
                     rho=np.array([-1.0, 1.0]))


def test_curve_csv_round_trip():
    c = DensityCurve(alpha=1.2, model="wishart",
                     grid=np.array([0.5, 1.0, 2.0]),
                     rho=np.array([0.3, 0.2, 0.1]),
                     atom_at_zero=0.5, tail_constant_estimate=0.3,
                     tail_exponent=1.6, symmetric=False)
    text = c.to_csv()
    side = json.loads(json.dumps(c.sidecar()))
    back = DensityCurve.from_csv(text, side)
    assert np.array_equal(back.grid, c.grid)
    assert np.array_equal(back.rho, c.rho)
    assert back.atom_at_zero == 0.5 and not back.symmetric
    with pytest.raises(ValueError, match="header"):
        DensityCurve.from_csv("x,y\n1,2\n", side)
    with pytest.raises(ValueError, match="line"):
        DensityCurve.from_csv("t,rho\n1.0,0.1\n2.0,zap\n", side)


def test_build_curve_rejects_unknown_model():
    with pytest.raises(ValueError):
        build_density_curve(AlphaParam(1.5), "perturbed")
