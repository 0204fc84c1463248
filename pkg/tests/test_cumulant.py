"""Limit cumulant: series vs closed forms, functional equation, convexity."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ar1fpt import (
    CappedAbove,
    Deterministic,
    Gaussian,
    LimitCumulant,
    StableSpectrallyNegative,
    TwoPoint,
    check_functional_equation,
    slope_probe,
    stationary_reference,
    truncate_floor_positive,
)

U_GRID = np.linspace(0.0, 50.0, 26)
LAMBDAS = (0.3, 0.5, 0.9)

FAMILIES = [
    Gaussian(0.0, 1.0),
    Gaussian(0.4, 2.0),
    Deterministic(1.0),
    TwoPoint(1.0, -1.0, 0.5),
    StableSpectrallyNegative(1.5, 1.0, 0.0),
    StableSpectrallyNegative(0.7, 1.0, 0.0),
    CappedAbove(Gaussian(0.0, 1.0), 1.0),
    truncate_floor_positive(Gaussian(0.0, 1.0), 1.0),
]


@pytest.mark.parametrize("lam", LAMBDAS)
@pytest.mark.parametrize(
    "spec",
    [Gaussian(0.0, 1.0), Gaussian(0.4, 2.0)],
    ids=["std", "shifted"],
)
def test_series_matches_gaussian_closed_form(spec, lam):
    closed = LimitCumulant(spec, lam)
    series = LimitCumulant(spec, lam, mode="series")
    assert closed.mode == "closed_form_stable"
    for u in U_GRID:
        a, _ = closed.phi(float(u))
        b, err = series.phi(float(u))
        assert abs(a - b) < 1e-10 + err, f"u={u}"


@pytest.mark.parametrize("alpha", [1.5, 0.7])
def test_series_matches_stable_closed_form(alpha):
    spec = StableSpectrallyNegative(alpha, 1.0, 0.1)
    closed = LimitCumulant(spec, 0.5)
    series = LimitCumulant(spec, 0.5, mode="series")
    for u in np.linspace(0.0, 20.0, 21):
        a, _ = closed.phi(float(u))
        b, err = series.phi(float(u))
        assert abs(a - b) < 1e-10 + err


def test_deterministic_closed_form():
    lc = LimitCumulant(Deterministic(1.5), 0.25)
    assert lc.mode == "closed_form_deterministic"
    assert math.isclose(lc.phi(3.0)[0], 1.5 * 3.0 / 0.75, rel_tol=1e-15)


@pytest.mark.parametrize("lam", LAMBDAS)
@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: type(s).__name__)
def test_functional_equation_all_families(spec, lam):
    lc = LimitCumulant(spec, lam)
    grid = U_GRID if spec.psi(50.0) < 1e6 else np.linspace(0.0, 20.0, 11)
    assert check_functional_equation(lc, grid) < 1e-8


def test_phi_zero_is_zero():
    for spec in FAMILIES:
        assert LimitCumulant(spec, 0.5).phi(0.0)[0] == 0.0


def test_phi_rejects_negative_u():
    with pytest.raises(ValueError):
        LimitCumulant(Gaussian(0, 1), 0.5).phi(-1.0)


@settings(max_examples=25, deadline=None)
@given(u=st.floats(0.1, 30.0), lam=st.sampled_from(LAMBDAS))
def test_phi_midpoint_convex_two_point(u, lam):
    lc = LimitCumulant(TwoPoint(1.0, -1.0, 0.5), lam)
    mid = lc.phi(0.5 * u)[0]
    assert mid <= 0.5 * (lc.phi(0.0)[0] + lc.phi(u)[0]) + 1e-9


def test_phi_value_vectorized_matches_scalar():
    lc = LimitCumulant(TwoPoint(1.0, -1.0, 0.5), 0.5)
    u = np.array([0.0, 0.5, 2.0, 10.0])
    vec = lc.phi_value(u)
    np.testing.assert_allclose(vec, [lc.phi(float(x))[0] for x in u], rtol=1e-14)


def test_mode_validation():
    with pytest.raises(ValueError):
        LimitCumulant(Gaussian(0, 1), 0.5, mode="closed_form_deterministic")
    with pytest.raises(ValueError):
        LimitCumulant(Deterministic(1.0), 0.5, mode="closed_form_stable")
    with pytest.raises(ValueError):
        LimitCumulant(Gaussian(0, 1), 1.5)


def test_stationary_reference_moments():
    mean, var = stationary_reference(Gaussian(0.0, 1.0), 0.5)
    assert mean == 0.0
    assert math.isclose(var, 4.0 / 3.0, rel_tol=1e-15)
    mean, var = stationary_reference(StableSpectrallyNegative(1.5, 1.0, 0.3), 0.5)
    assert math.isclose(mean, 0.6, rel_tol=1e-12)
    assert var is None  # alpha < 2: infinite variance


def test_slope_probe_validates_grid():
    lc = LimitCumulant(Gaussian(0, 1), 0.5)
    with pytest.raises(ValueError):
        slope_probe(lc, np.array([1.0, 10.0]))  # does not reach 1e3
    with pytest.raises(ValueError):
        slope_probe(lc, np.array([1e4, 1e3]))  # not increasing


def test_slope_probe_gaussian_superlinear():
    lc = LimitCumulant(Gaussian(0, 1), 0.5)
    rep = slope_probe(lc, np.geomspace(1.0, 1e4, 17))
    assert rep.superlinear
    assert rep.theoretical_slope is None


def test_slope_probe_floored_linear_limit():
    fl = truncate_floor_positive(Gaussian(0.0, 1.0), 1.0)
    rep = slope_probe(LimitCumulant(fl, 0.5), np.geomspace(1.0, 1e4, 17))
    assert rep.theoretical_slope == 2.0
    assert not rep.superlinear
    assert abs(rep.slope_estimate - 2.0) < 0.02
