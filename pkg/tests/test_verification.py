"""
Tests for the Schwarzian oracles and the verification suite.
"""
import numpy as np
import pytest

from src.core.classifier import classify_singularity, gauge_deviation
from src.core.devmap import DevelopingMapSpec, LogMap, PowerMap, SeriesMap, dev_post_compose
from src.core.errors import DomainError, VerificationFailed
from src.core.mobius import Model, random_isometry
from src.core.series import TruncatedSeries
from src.core.verification import (
    CheckResult,
    parabolic_displacement_excess,
    random_cone_parameters,
    random_half_plane_points,
    report_allowance,
    report_crosscheck,
    roundtrip_inputs,
    run_suite,
    schwarz_pick_margin,
    schwarzian,
    schwarzian_expand,
    schwarzian_fd,
    squared_half_plane_map,
    synthesize_conical,
    synthesize_cusp,
    truncation_allowance,
)
from src.utils.config import RunConfig


class TestSchwarzian:
    """Exact and finite-difference Schwarzian derivatives."""

    @pytest.mark.parametrize("theta", [0.3, 0.5, 2.0])
    def test_power_map(self, theta):
        """{w^theta, w} = (1 - theta^2) / (2 w^2)."""
        z = 0.3 + 0.1j
        assert schwarzian(DevelopingMapSpec(PowerMap(theta)), z) == pytest.approx((1 - theta ** 2) / (2 * z * z))

    def test_log_map(self):
        """{-i log w, w} = 1 / (2 w^2)."""
        z = -0.2 + 0.3j
        assert schwarzian(DevelopingMapSpec(LogMap()), z) == pytest.approx(0.5 / (z * z))

    def test_undefined_at_puncture(self):
        """The Schwarzian is not evaluated at 0."""
        with pytest.raises(DomainError):
            schwarzian(DevelopingMapSpec(LogMap()), 0.0)
        with pytest.raises(DomainError):
            schwarzian_fd(DevelopingMapSpec(LogMap()), 0.0)

    def test_finite_differences_agree(self):
        """The finite-difference path matches the exact one."""
        F = DevelopingMapSpec(SeriesMap(TruncatedSeries.from_coeffs([1, 0.2, 0.05], lead=0.4)))
        z = 0.35 * np.exp(0.7j)
        exact = schwarzian(F, z)
        assert abs(schwarzian_fd(F, z) - exact) / abs(exact) < 1e-6

    def test_mobius_invariance(self, rng):
        """Post-composing with an isometry leaves the Schwarzian unchanged."""
        base = DevelopingMapSpec(PowerMap(0.5))
        for _ in range(5):
            moved = dev_post_compose(base, random_isometry(rng, Model.DISK, max_radius=0.5))
            z = 0.4 * np.exp(2j * np.pi * rng.uniform())
            exact = schwarzian(base, z)
            assert abs(schwarzian_fd(moved, z) - exact) / abs(exact) < 1e-6


class TestExpansion:
    """Laurent expansion of the Schwarzian on a circle."""

    @pytest.mark.parametrize("theta", [0.1, 0.5, 1.5, 3.0])
    def test_leading_coefficient(self, theta):
        """c_{-2} = (1 - theta^2)/2 recovers theta."""
        expansion = schwarzian_expand(DevelopingMapSpec(PowerMap(theta)), 0.25, 512, 32)
        assert expansion.window[-2] == pytest.approx((1 - theta ** 2) / 2, abs=1e-12)
        assert expansion.theta_estimate == pytest.approx(theta, abs=1e-9)
        assert abs(expansion.d_estimate) < 1e-12

    def test_cusp_estimate_is_zero(self):
        """The log map reads as theta = 0."""
        expansion = schwarzian_expand(DevelopingMapSpec(LogMap()), 0.25, 512, 32)
        assert expansion.theta_estimate < 1e-6

    def test_perturbed_series(self):
        """Holomorphic perturbations leave the leading coefficient alone."""
        F = DevelopingMapSpec(SeriesMap(TruncatedSeries.from_coeffs([1, 1], order=32, lead=0.3)))
        expansion = schwarzian_expand(F, 0.1, 512, 32)
        assert expansion.theta_estimate == pytest.approx(0.3, abs=1e-8)
        assert expansion.holomorphic_tail_norm > 0

    def test_critical_point_inside_circle(self):
        """w^0.3 (1 + w) has F' = 0 near w = -0.23, so at radius 0.25 the expansion picks up negative powers."""
        F = DevelopingMapSpec(SeriesMap(TruncatedSeries.from_coeffs([1, 1], order=32, lead=0.3)))
        with pytest.raises(VerificationFailed) as info:
            schwarzian_expand(F, 0.25, 512, 32)
        assert info.value.name == "schwarzian_structure"

    def test_bad_sampling(self):
        """Sample counts must be powers of two and at least 4N."""
        with pytest.raises(ValueError):
            schwarzian_expand(DevelopingMapSpec(LogMap()), 0.25, 100, 32)


class TestCrosscheck:
    """Report versus Schwarzian agreement."""

    def test_conical_report(self, config):
        """A correct conical report passes."""
        F = DevelopingMapSpec(PowerMap(0.5))
        residuals = report_crosscheck(classify_singularity(F, config), F, config)
        assert residuals["theta_gap"] < 1e-6

    def test_cusp_report(self, config):
        """A correct cusp report passes."""
        F = DevelopingMapSpec(LogMap())
        residuals = report_crosscheck(classify_singularity(F, config), F, config)
        assert residuals["theta_estimate"] < 1e-6

    def test_wrong_angle_fails(self, config):
        """A report with a tampered angle is caught."""
        F = DevelopingMapSpec(PowerMap(0.5))
        report = classify_singularity(F, config)
        report.theta = 0.6
        with pytest.raises(VerificationFailed) as info:
            report_crosscheck(report, F, config)
        assert info.value.name == "theta"

    def test_mismatched_map_fails(self, config):
        """A report checked against a different map is caught."""
        report = classify_singularity(DevelopingMapSpec(PowerMap(0.5)), config)
        with pytest.raises(VerificationFailed):
            report_crosscheck(report, DevelopingMapSpec(PowerMap(0.7)), config)


class TestSchwarzPick:
    """Contraction of holomorphic self-maps."""

    def test_squaring_contracts(self, rng):
        """The conjugated squaring map strictly contracts distances."""
        pairs = list(zip(random_half_plane_points(rng, 50), random_half_plane_points(rng, 50)))
        assert schwarz_pick_margin(squared_half_plane_map, pairs) > 0

    def test_isometry_has_zero_margin(self, rng):
        """An isometry neither contracts nor expands."""
        L = random_isometry(rng, Model.HALF_PLANE)
        pairs = list(zip(random_half_plane_points(rng, 20), random_half_plane_points(rng, 20)))
        assert abs(schwarz_pick_margin(L, pairs)) < 1e-9


class TestSynthesis:
    """Synthesized inputs with known answers."""

    def test_conical_roundtrip(self, config):
        """Classification recovers the synthesized angle and coordinate."""
        F, xi = synthesize_conical(1.5, [0.02, -0.01j, 0.005], config.truncation_order)
        report = classify_singularity(F, config)
        assert report.theta == pytest.approx(1.5, abs=1e-9)
        assert gauge_deviation(report.xi_series, xi) < 1e-8

    def test_cusp_roundtrip(self, config):
        """Classification recovers the synthesized cusp coordinate."""
        F, xi = synthesize_cusp([0.4, 0.03, 0.01j], config.truncation_order)
        report = classify_singularity(F, config)
        assert gauge_deviation(report.xi_series, xi) < 1e-8

    def test_coarse_allowance_covers_integer_angle(self):
        """At N = 4 the measured Fourier tail covers the pullback gap of a k = 3 cone."""
        config = RunConfig(truncation_order=4)
        F, _ = synthesize_conical(3.0, [0.05, 0.02], 4)
        report = classify_singularity(F, config)
        allowance = report_allowance(report, config.radius)
        assert report.diagnostics["truncation_tail"] == pytest.approx(0.02 * 0.25 ** 2, rel=1e-6)
        assert report.diagnostics["pullback_residual"] > config.tol("pullback")
        assert report.diagnostics["pullback_residual"] <= allowance
        assert truncation_allowance(report.xi_series, config.radius) < allowance

    def test_fine_order_has_no_tail(self, config):
        """At the default order a short perturbation leaves nothing past N."""
        F, _ = synthesize_conical(3.0, [0.05, 0.02], config.truncation_order)
        report = classify_singularity(F, config)
        assert report.diagnostics["truncation_tail"] < 1e-12

    def test_truncation_allowance_shrinks_with_order(self):
        """Higher truncation orders leave less behind."""
        coarse = TruncatedSeries(0.5 ** np.arange(5))
        fine = TruncatedSeries(0.5 ** np.arange(17))
        assert truncation_allowance(fine, 0.25) < truncation_allowance(coarse, 0.25)


@pytest.fixture(scope="module")
def default_results():
    return run_suite(RunConfig())


class TestSuite:
    """The full oracle suite."""

    def test_default_suite_passes(self, default_results):
        """Every check passes at default settings."""
        failed = [r for r in default_results if not r.passed]
        assert failed == []

    def test_results_are_check_rows(self, default_results):
        """The suite returns named rows with residuals and tolerances."""
        assert all(isinstance(r, CheckResult) for r in default_results)
        names = {r.name for r in default_results}
        assert {"curvature", "roundtrip_theta", "schwarzian_leading", "series_algebra",
                "uniqueness_gauge", "parabolic_displacement"} <= names

    def test_deterministic(self, default_results):
        """The suite is seeded and reproducible."""
        again = run_suite(RunConfig())
        assert [r.worst_residual for r in again] == [r.worst_residual for r in default_results]

    def test_impossible_tolerance_fails(self):
        """A curvature tolerance below the stencil error fails."""
        results = run_suite(RunConfig(tolerances={"curvature": 1e-15}))
        curvature = next(r for r in results if r.name == "curvature")
        assert not curvature.passed

    def test_coarse_order_passes(self):
        """N = 4 still passes with larger recorded residuals."""
        results = run_suite(RunConfig(truncation_order=4, samples=512))
        failed = [r.name for r in results if not r.passed]
        assert failed == []


class TestInputMatrix:
    """The built-in round-trip inputs."""

    def test_fifty_inputs(self, rng):
        """Fixed and random cone parameters plus cusps make fifty inputs."""
        cases = roundtrip_inputs(rng, 8)
        assert len(cases) == 50
        thetas = [theta for _, _, theta, _ in cases if theta is not None]
        assert sum(theta is None for _, _, theta, _ in cases) == 10
        assert all(0 < theta <= 3 for theta in thetas)
        assert len(set(thetas)) > 20

    def test_random_cone_parameters_avoid_integers(self, rng):
        """Random cone parameters stay off the integers."""
        thetas = random_cone_parameters(rng, 200)
        assert all(0.05 <= t <= 3.0 and abs(t - round(t)) > 0.01 for t in thetas)


class TestDisplacementWitness:
    """d(iy, T(iy)) <= 2 pi / y for the normalized parabolic monodromy."""

    def test_classified_cusp_satisfies_bound(self, config):
        """A classified cusp input leaves no excess."""
        F, _ = synthesize_cusp([0.2, 0.05, 0.01j], config.truncation_order)
        report = classify_singularity(F, config)
        assert parabolic_displacement_excess([report.diagnostics]) == 0.0

    def test_non_decreasing_values_fail(self):
        """Displacements that grow with y are an excess."""
        d = {"displacement_y100": 1e-5, "displacement_y1000": 2e-5, "displacement_y10000": 3e-5}
        assert parabolic_displacement_excess([d]) == 1.0

    def test_no_cusps_fail(self):
        """Without a classified cusp there is nothing to witness the bound."""
        assert parabolic_displacement_excess([]) == float("inf")
