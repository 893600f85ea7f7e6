"""Tests for the geometric Lorenz model: maps, validation, periodic orbits and experiments."""

import math

import numpy as np
import pytest

from src.config import override_settings
from src.dynamics.lorenz import (
    CurvePoint,
    LorenzModel,
    LorenzObservable,
    alpha,
    alpha_array,
    alpha_prime,
    assemble_curve,
    canonical_itinerary,
    check_grid,
    classify_shape,
    constrained_M_curve,
    constrained_point,
    dirac_mass_experiment,
    enumerate_orbits,
    find_periodic,
    itineraries,
    locally_eventually_onto,
    lorenz_observable,
    near_singular_family,
    orbit_stats,
    poincare,
    roof,
    roof_comparability,
    validate_model,
)
from src.errors import BudgetExceeded, CurveNotMonotone, EmptyFamily, InputError, SingularInput

# Positive point of the period-two orbit: (1 + a) c**gamma - 1 = -c.
TWO_ORBIT = 0.26986


@pytest.fixture
def model():
    return LorenzModel()


# ---------------------------------------------------------------------------
# Maps
# ---------------------------------------------------------------------------

class TestMaps:

    def test_singular_point(self, model):
        with pytest.raises(SingularInput):
            alpha(model, 0.0)
        with pytest.raises(SingularInput):
            roof(model, 0.0)

    def test_outside_interval(self, model):
        with pytest.raises(InputError):
            alpha(model, 1.5)

    def test_endpoints(self, model):
        assert alpha(model, 1.0) == pytest.approx(0.95)
        assert alpha(model, -1.0) == pytest.approx(-0.95)
        assert roof(model, 1.0) == pytest.approx(1.0)
        assert roof(model, -0.5) == pytest.approx(1.0 + math.log(2.0))

    def test_odd(self, model):
        xs = np.linspace(0.01, 1.0, 50)
        assert np.array_equal(alpha_array(model, -xs), -alpha_array(model, xs))

    @pytest.mark.parametrize("x", [0.27, -0.27, 0.05, -0.3, 0.6, -0.9])
    def test_scalar_matches_array(self, model, x):
        assert alpha(model, x) == pytest.approx(alpha_array(model, np.array([x]))[0], abs=1e-15)

    def test_small_points_cross_sides(self, model):
        # (1 + a)|x|**gamma < 1 here, so the image lands on the other side
        assert alpha(model, -0.27) > 0.0
        assert alpha(model, 0.27) < 0.0
        assert alpha(model, TWO_ORBIT) == pytest.approx(-TWO_ORBIT, abs=1e-4)

    def test_expansion(self, model):
        assert model.expansion == pytest.approx(1.4625)
        assert alpha_prime(model, 1.0) == pytest.approx(1.4625)
        assert alpha_prime(model, 1e-8) > alpha_prime(model, 1e-4)

    def test_poincare(self, model):
        x, y = poincare(model, 0.5, 0.0)
        assert x == pytest.approx(alpha(model, 0.5))
        assert y == pytest.approx(0.25)
        _, y_neg = poincare(model, -0.5, 1.0)
        assert y_neg == pytest.approx(0.0)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

class TestValidation:

    def test_defaults_pass(self, model):
        report = validate_model(model, grid_points=1000)
        assert report.passed, report.failures

    def test_gamma_out_of_range(self):
        report = validate_model(LorenzModel(gamma=1.2), grid_points=100)
        assert not report.passed
        assert "gamma_in_unit_interval" in report.failures

    def test_weak_expansion(self):
        report = validate_model(LorenzModel(a=0.8), grid_points=100)
        assert "expansion_analytic" in report.failures
        assert "expansion_grid" in report.failures

    def test_eigenvalues_checked_when_given(self):
        ok = validate_model(LorenzModel(lambda2=2.0, lambda3=0.5), grid_points=100)
        assert ok.passed
        bad = validate_model(LorenzModel(lambda2=2.0), grid_points=100)
        assert bad.failures == ["eigenvalue_ordering"]

    def test_roof_comparability(self, model):
        comp = roof_comparability(model)
        assert 0 < comp.c1 <= comp.c2
        for x in (0.5, 0.1, 1e-3, 1e-8, -0.2):
            assert comp.holds(model, x)

    def test_roof_comparability_rejects_bad_threshold(self, model):
        with pytest.raises(InputError):
            roof_comparability(model, xbar=1.5)


# ---------------------------------------------------------------------------
# Periodic orbits
# ---------------------------------------------------------------------------

class TestPeriodicOrbits:

    def test_canonical_itinerary(self):
        assert canonical_itinerary("RL") == "LR"
        assert canonical_itinerary("RLRL") == "LR"
        assert canonical_itinerary("RLL") == "LLR"
        with pytest.raises(InputError):
            canonical_itinerary("LX")

    def test_no_fixed_points(self, model):
        assert find_periodic(model, "R") is None
        assert find_periodic(model, "L") is None

    def test_period_two(self, model):
        orbit = find_periodic(model, "RL")
        assert orbit is not None
        assert orbit.itinerary == "LR"
        assert orbit.points[0] < 0 < orbit.points[1]
        assert orbit.points[1] == pytest.approx(TWO_ORBIT, abs=1e-4)
        assert orbit.points[0] == pytest.approx(-orbit.points[1], abs=1e-12)
        assert orbit.verify(model)
        assert orbit.residual(model) <= 1e-10

    def test_catalogue_is_not_empty(self, model):
        periods = {o.period for o in enumerate_orbits(model, 6)}
        assert 2 in periods
        assert max(periods) > 2

    def test_itineraries(self):
        assert itineraries(3) == ["L", "LLR", "LR", "LRR", "R"]

    def test_itinerary_limit(self):
        with pytest.raises(BudgetExceeded):
            itineraries(17)
        with pytest.raises(InputError):
            itineraries(0)

    def test_enumerated_orbits_verify(self, model):
        orbits = enumerate_orbits(model, 8)
        assert orbits
        for o in orbits:
            assert o.period <= 8
            assert o.verify(model)
            assert canonical_itinerary(o.itinerary) == o.itinerary

    def test_eps_filter(self, model):
        every = enumerate_orbits(model, 8)
        far = enumerate_orbits(model, 8, eps=0.2)
        assert {o.itinerary for o in far} <= {o.itinerary for o in every}
        assert all(o.min_abs_x >= 0.2 for o in far)
        with pytest.raises(InputError):
            enumerate_orbits(model, 8, eps=-0.1)


# ---------------------------------------------------------------------------
# Orbit statistics and observables
# ---------------------------------------------------------------------------

class TestOrbitStats:

    def test_constant_observable(self, model):
        orbit = find_periodic(model, "LR")
        stats = orbit_stats(model, orbit, lorenz_observable(model, "constant"))
        assert stats.map_avg == pytest.approx(1.0)
        assert stats.flow_avg == pytest.approx(1.0)
        assert stats.roof_sum == pytest.approx(2 * roof(model, orbit.points[1]))
        assert stats.lyap == pytest.approx(math.log(alpha_prime(model, orbit.points[1])))

    def test_fiber_observable_uses_quadrature(self, model):
        orbit = find_periodic(model, "LR")
        obs = LorenzObservable("height", lambda x: np.zeros_like(x), fiber=lambda x, s: 2.0 * s)
        stats = orbit_stats(model, orbit, obs)
        # int_0^r 2s ds = r**2 on both points
        assert stats.flow_avg == pytest.approx(roof(model, orbit.points[1]))

    def test_bump_peaks_on_two_orbit(self, model):
        bump = lorenz_observable(model, "bump")
        assert bump.point(np.array([TWO_ORBIT]))[0] == pytest.approx(1.0, abs=1e-3)
        assert bump.point(np.array([0.9]))[0] < 1e-6

    def test_spike_near_singularity(self, model):
        spike = lorenz_observable(model, "bump_spike")
        assert spike.point(np.array([0.001]))[0] > 30.0

    def test_unknown_observable(self, model):
        with pytest.raises(InputError):
            lorenz_observable(model, "nope")


# ---------------------------------------------------------------------------
# Constrained curves
# ---------------------------------------------------------------------------

class TestConstrainedCurve:

    def test_classify_shape(self):
        assert classify_shape([1.0, 2.0, 3.0]) == "strict_decrease"
        assert classify_shape([1.0, 2.0, 2.0]) == "plateau"
        assert classify_shape([1.0, 1.0, 2.0]) == "mixed"
        assert classify_shape([math.nan, 1.0]) == "undetermined"

    def test_empty_point_is_nan(self, model):
        orbits = enumerate_orbits(model, 6)
        point = constrained_point(0.9, orbits, [0.0] * len(orbits))
        assert math.isnan(point.m_hat)
        assert point.itinerary is None

    def test_monotonicity_enforced(self):
        points = [CurvePoint(0.1, 2.0, "LR", 2), CurvePoint(0.01, 1.0, "LR", 2)]
        with pytest.raises(CurveNotMonotone):
            assemble_curve(points)

    def test_nan_points_warn(self):
        curve = assemble_curve([CurvePoint(0.5, math.nan, None, None), CurvePoint(0.1, 1.0, "LR", 2)])
        assert curve.warnings
        assert curve.shape == "undetermined"

    def test_grid_must_decrease(self):
        with pytest.raises(InputError):
            check_grid([0.1, 0.3])
        with pytest.raises(InputError):
            check_grid([])

    def test_constant_curve_is_plateau(self, model):
        curve = constrained_M_curve(model, lorenz_observable(model, "constant"), [0.1, 0.01, 0.001], 8)
        assert curve.values == pytest.approx([1.0, 1.0, 1.0])
        assert curve.shape == "plateau"

    def test_curve_is_non_increasing_in_eps(self, model):
        curve = constrained_M_curve(model, lorenz_observable(model, "log_singular"),
                                    [0.3, 0.1, 0.03, 0.01, 0.003], 10)
        defined = [v for v in curve.values if not math.isnan(v)]
        assert all(b >= a for a, b in zip(defined, defined[1:]))


# ---------------------------------------------------------------------------
# Near-singular family and Dirac experiment
# ---------------------------------------------------------------------------

class TestDirac:

    def test_family_roof_means_increase(self, model):
        family = near_singular_family(model, 10)
        assert len(family) >= 2
        means = [orbit_stats(model, o, lorenz_observable(model, "constant")).roof_sum / o.period for o in family]
        assert all(b > a for a, b in zip(means, means[1:]))
        depths = [o.min_abs_x for o in family]
        assert all(b <= a for a, b in zip(depths, depths[1:]))

    def test_family_starts_at_shallowest_orbit(self, model):
        orbits = enumerate_orbits(model, 10)
        family = near_singular_family(model, 10)
        assert family[0].min_abs_x == max(o.min_abs_x for o in orbits)
        best_mean = max(orbit_stats(model, o, lorenz_observable(model, "constant")).roof_sum / o.period
                        for o in orbits)
        last = family[-1]
        assert orbit_stats(model, last, lorenz_observable(model, "constant")).roof_sum / last.period == \
            pytest.approx(best_mean, abs=1e-12)

    def test_family_defaults_to_period_limit(self, model):
        override_settings(lorenz_p_limit=8)
        assert near_singular_family(model) == near_singular_family(model, 8)

    def test_bound_holds(self, model):
        exp = dirac_mass_experiment(model, near_singular_family(model, 10), 0.1)
        assert exp.bound_ok
        for row in exp.rows:
            assert 0.0 <= row.f_eps <= 1.0
            assert set(row.to_dict()) == {"itinerary", "min_abs_x", "roof_mean", "lyap", "c_eps", "f_eps", "bound"}

    def test_empty_family(self, model):
        with pytest.raises(EmptyFamily):
            dirac_mass_experiment(model, [], 0.1)

    def test_eps_range(self, model):
        with pytest.raises(InputError):
            dirac_mass_experiment(model, near_singular_family(model, 6), 1.5)


# ---------------------------------------------------------------------------
# Locally eventually onto
# ---------------------------------------------------------------------------

class TestEventuallyOnto:

    def test_whole_interval_covers_at_once(self, model):
        assert locally_eventually_onto(model, (-1.0, 1.0)) == 1

    def test_bad_interval(self, model):
        with pytest.raises(InputError):
            locally_eventually_onto(model, (0.5, 0.2))
