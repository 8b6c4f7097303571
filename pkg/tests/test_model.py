from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perturbed_gamma.model import (
    GridError,
    IncrementPanel,
    InversionStatus,
    ModelError,
    ModelParams,
    MomentVector,
    NonInvertibleError,
    ObservationGrid,
    forward_moments,
    gamma_raw_moment,
    invert_moments,
    raw_increment_moments,
)
from perturbed_gamma.simulate import standard_gamma, stream

log_positive = st.floats(-3 * math.log(10), 3 * math.log(10)).map(math.exp)
params = st.builds(ModelParams, log_positive, log_positive, st.floats(0.0, 10.0))


@pytest.mark.parametrize(
    "theta, expected",
    [
        ((1, 0.02, 0.02), (0.02, 0.04, 0.04)),
        ((1, 1, 0), (1, 1, 2)),
        ((2, 4, 0.5), (2, 1.5, 1)),
    ],
)
def test_forward_moments_examples(theta, expected):
    assert forward_moments(ModelParams(*theta)) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize(
    "m, expected",
    [((0.02, 0.04, 0.04), (1, 0.02, 0.02)), ((1, 3, 2), (1, 1, 2)), ((1, 1, 2), (1, 1, 0))],
)
def test_invert_moments_examples(m, expected):
    raw = invert_moments(MomentVector(*m))
    assert tuple(raw) == pytest.approx(expected, rel=1e-14, abs=1e-16)
    assert raw.status is InversionStatus.VALID


def test_invert_reports_negative_tau2_without_clamping():
    raw = invert_moments((1.0, 0.5, 2.0))
    assert raw.tau2 == pytest.approx(-0.5)
    assert raw.status is InversionStatus.NEGATIVE_TAU2
    assert raw.to_params().tau2 == 0.0


@pytest.mark.parametrize("m", [(0.0, 1.0, 1.0), (-1.0, 1.0, 1.0), (1.0, 1.0, 0.0), (1.0, 1.0, -0.1)])
def test_invert_outside_domain(m):
    with pytest.raises(NonInvertibleError):
        invert_moments(m)


@settings(max_examples=300, deadline=None)
@given(params)
def test_roundtrip_property(theta):
    back = invert_moments(forward_moments(theta))
    np.testing.assert_allclose(back[:2], theta.as_array()[:2], rtol=1e-12)
    # tau2 is recovered as a difference, so its error is relative to cm2
    assert abs(back.tau2 - theta.tau2) <= 1e-12 * max(theta.tau2, forward_moments(theta).cm2)


@pytest.mark.parametrize("order, expected", [(1, 4.0), (2, 24.0), (3, 168.0)])
def test_raw_increment_moments_examples(theta0, order, expected):
    assert raw_increment_moments(theta0, 200.0, order) == pytest.approx(expected, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(params, log_positive)
def test_raw_moments_consistent_with_moment_map(theta, dt):
    m = forward_moments(theta)
    r1 = raw_increment_moments(theta, dt, 1)
    assert r1 == dt * m.m1 or math.isclose(r1, dt * m.m1, rel_tol=1e-15)
    r2 = raw_increment_moments(theta, dt, 2)
    assert math.isclose(r2 - r1**2, m.cm2 * dt, rel_tol=1e-9)
    r3 = raw_increment_moments(theta, dt, 3)
    third = r3 - 3 * r1 * r2 + 2 * r1**3
    assert math.isclose(third, m.cm3 * dt, rel_tol=1e-6, abs_tol=1e-9 * r3)


def test_central_identity_tight_at_reference_point(theta0):
    for dt in (1.0, 200.0, 500.0):
        r1, r2 = (raw_increment_moments(theta0, dt, k) for k in (1, 2))
        assert math.isclose(r2 - r1**2, forward_moments(theta0).cm2 * dt, rel_tol=1e-12)


@pytest.mark.parametrize("a, xi, s, expected", [(4, 1, 2, 20.0), (0.5, 2, 1, 0.25), (3.3, 0.7, 0, 1.0)])
def test_gamma_raw_moment_examples(a, xi, s, expected):
    assert gamma_raw_moment(a, xi, s) == pytest.approx(expected, rel=1e-15)


@pytest.mark.slow
@pytest.mark.parametrize("a", [0.5, 4.0])
@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_gamma_raw_moment_against_samples(a, order):
    rng = stream(11, 7, int(a * 10), order)
    g = standard_gamma(np.full(10**6, a), rng) / 1.5
    x = g**order
    se = x.std(ddof=1) / math.sqrt(x.size)
    assert abs(x.mean() - gamma_raw_moment(a, 1.5, order)) < 5 * se


def test_weak_limit_to_brownian_with_drift():
    b, t2 = 0.3, 0.7
    for big in (1e4, 1e6, 1e8):
        m = forward_moments(ModelParams(big, big * b, t2))
        assert m.m1 == pytest.approx(b)
        assert abs(m.cm2 - t2) < 2 * b / big
        assert m.cm3 < 3 * b / big**2


@pytest.mark.parametrize("bad", [(0, 1, 0), (1, 0, 0), (1, 1, -1e-9), (math.nan, 1, 0), (1, math.inf, 0)])
def test_params_invariants(bad):
    with pytest.raises(ModelError):
        ModelParams(*bad)


def test_grid_from_instants_and_dt():
    g = ObservationGrid(([200.0, 500.0, 1000.0], [10.0, 30.0]))
    assert g.n_items == 2 and g.total == 5
    np.testing.assert_array_equal(g.counts, [3, 2])
    np.testing.assert_allclose(g.dt[0], [200, 300, 500])
    assert ObservationGrid.from_dt([[200, 300, 500], [10, 20]]) == g


@pytest.mark.parametrize("times", [([0.0, 1.0],), ([1.0, 1.0],), ([2.0, 1.0],), ([],)])
def test_grid_rejects_bad_instants(times):
    with pytest.raises(GridError):
        ObservationGrid(times)


def test_panel_shape_must_match_grid():
    g = ObservationGrid.repeated([1.0, 2.0], 2)
    IncrementPanel((np.zeros(2), np.array([-1.0, 3.0]))).check_matches(g)
    with pytest.raises(GridError):
        IncrementPanel((np.zeros(2), np.zeros(3))).check_matches(g)
    with pytest.raises(GridError):
        IncrementPanel((np.zeros(2),)).check_matches(g)
