"""
Independent numerical oracles for the classification.

The Schwarzian of a developing map has at most a double pole at the puncture with
leading coefficient (1 - theta^2)/2, which gives a cone-angle estimate that does not
use the monodromy at all.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.classifier import (
    SingularityKind,
    SingularityReport,
    build_xi_conical,
    build_xi_cusp,
    classify_singularity,
    gauge_deviation,
    rotate_series_input,
)
from src.core.devmap import (
    DevelopingMapSpec,
    LogMap,
    LogSeriesMap,
    PowerMap,
    SeriesMap,
    core_derivative,
    dev_change_model,
    dev_eval_near,
    dev_post_compose,
    dev_rotate_input,
    validated_radius,
)
from src.core.errors import DomainError, SingularityError, VerificationFailed
from src.core.metrics import (
    Conical,
    Cusp,
    HyperbolicDisk,
    HyperbolicHalfPlane,
    Pullback,
    annulus_grid,
    curvature_refinement_ratio,
    max_curvature_residual,
    rect_grid,
)
from src.core.mobius import (
    CayleyDirection,
    Model,
    cayley,
    dilation,
    displacement_infimum,
    hyperbolic_distance,
    mobius_apply,
    random_isometry,
)
from src.core.series import (
    LaurentWindow,
    TruncatedSeries,
    series_compose,
    series_exp,
    series_log,
    series_mul,
    series_pow,
    series_reversion,
)
from src.utils.config import SCHWARZIAN_FD_RELATIVE_STEP, RunConfig

logger = logging.getLogger(__name__)

THETA_GRID = (0.1, 0.3, 0.5, 0.9, 1.5, 2.0, 3.0)
CURVATURE_THETAS = (0.1, 0.5, 0.9, 2.0, 3.0)
RANDOM_CONES = 26
ROUNDTRIP_CUSPS = 10
GAUGE_ANGLES = (0.1, 1.0, 2.5)
DISPLACEMENT_HEIGHTS = (100.0, 1000.0, 10000.0)
NOISE_FLOOR_FACTOR = 64.0


@dataclass(frozen=True)
class SchwarzianExpansion:
    window: LaurentWindow
    theta_estimate: float
    d_estimate: complex
    holomorphic_tail_norm: float


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst_residual: float
    tolerance: float


# Schwarzian

def schwarzian(F: DevelopingMapSpec, z) -> complex:
    """{F, z} = F'''/F' - 3/2 (F''/F')^2 from exact derivatives of the core map."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("the Schwarzian is undefined at the puncture")
    log_z = np.log(z) + 2j * np.pi * F.branch_index
    d1, d2, d3 = (core_derivative(F.core, z, log_z, k) for k in (1, 2, 3))
    out = d3 / d1 - 1.5 * (d2 / d1) ** 2
    return complex(out) if np.ndim(out) == 0 else out


def _central_derivatives(values: Dict[int, complex], h: float) -> Tuple[complex, complex, complex]:
    f = values
    d1 = (f[-2] - 8 * f[-1] + 8 * f[1] - f[2]) / (12 * h)
    d2 = (-f[-2] + 16 * f[-1] - 30 * f[0] + 16 * f[1] - f[2]) / (12 * h * h)
    d3 = (f[-3] - 8 * f[-2] + 13 * f[-1] - 13 * f[1] + 8 * f[2] - f[3]) / (8 * h ** 3)
    return d1, d2, d3


def schwarzian_fd(F: DevelopingMapSpec, z: complex, step: float = SCHWARZIAN_FD_RELATIVE_STEP) -> complex:
    """
    Schwarzian of the full map (post-composition included) by finite differences.

    Fourth-order central differences at steps h and h/2 are combined by Richardson
    extrapolation; h = step * |z|.
    """
    z = complex(z)
    if z == 0:
        raise DomainError("the Schwarzian is undefined at the puncture")
    h = step * abs(z)
    if h < 1e-8 * abs(z) or h == 0.0:
        raise DomainError(f"finite-difference step {h:.3e} underflows at z={z}")

    def derivatives(hh: float):
        offsets = np.arange(-3, 4)
        vals = dev_eval_near(F, z, offsets * hh)
        return _central_derivatives(dict(zip(offsets.tolist(), vals)), hh)

    coarse, fine = derivatives(h), derivatives(h / 2)
    d1, d2, d3 = ((16 * b - a) / 15 for a, b in zip(coarse, fine))
    return d3 / d1 - 1.5 * (d2 / d1) ** 2


def schwarzian_expand(F: DevelopingMapSpec, radius: float, samples: int, order: int = 32,
                      structure_tol: float = 1e-8,
                      method: Callable[[DevelopingMapSpec, np.ndarray], np.ndarray] = schwarzian
                      ) -> SchwarzianExpansion:
    """Laurent coefficients c_{-2}..c_N of the Schwarzian on |z| = radius."""
    if not 0 < radius < 1:
        raise ValueError(f"radius must lie in (0, 1), got {radius}")
    if samples < 4 * order or samples & (samples - 1):
        raise ValueError(f"samples must be a power of two >= 4*N, got {samples}")
    z = radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    Q = z * z * method(F, z)
    spectrum = np.fft.fft(Q) / samples

    scale = max(1.0, float(np.max(np.abs(Q))))
    below_window = np.abs(spectrum[samples - order:])
    worst = float(np.max(below_window)) if below_window.size else 0.0
    if worst > structure_tol * scale:
        raise VerificationFailed("schwarzian_structure", worst / scale, structure_tol)

    floor = NOISE_FLOOR_FACTOR * np.finfo(float).eps * scale
    sampled = spectrum[:order + 3].copy()
    sampled[np.abs(sampled) < floor] = 0.0
    q = sampled * radius ** (-np.arange(order + 3, dtype=float))
    window = LaurentWindow(q, low=-2)

    gap = 1.0 - 2.0 * window[-2].real
    theta = 0.0 if gap < floor else math.sqrt(gap)
    tail = window.tail()
    tail_norm = float(np.sum(np.abs(tail) * radius ** np.arange(tail.size)))
    return SchwarzianExpansion(window, theta, window[-1], tail_norm)


def crosscheck_radius(F: DevelopingMapSpec, config: RunConfig) -> float:
    return min(config.radius, 0.5 * validated_radius(F))


def report_crosscheck(report: SingularityReport, F: DevelopingMapSpec,
                      config: Optional[RunConfig] = None,
                      pullback_allowance: float = 0.0) -> Dict[str, float]:
    """Compare a report against the Schwarzian of F; raise VerificationFailed on disagreement."""
    config = config or RunConfig()
    expansion = schwarzian_expand(F, crosscheck_radius(F, config), config.samples,
                                  config.truncation_order, config.tol("structure"))
    expected = report.theta if report.kind is SingularityKind.CONICAL else 0.0
    theta_gap = abs(expansion.theta_estimate - expected)
    residuals = {
        "theta_estimate": expansion.theta_estimate,
        "theta_gap": theta_gap,
        "d_estimate_abs": abs(expansion.d_estimate),
        "holomorphic_tail_norm": expansion.holomorphic_tail_norm,
        "pullback_residual": report.diagnostics.get("pullback_residual", float("nan")),
    }
    if theta_gap > config.tol("theta"):
        raise VerificationFailed("theta", theta_gap, config.tol("theta"))
    pullback_tol = max(config.tol("pullback"), pullback_allowance)
    if not residuals["pullback_residual"] <= pullback_tol:
        raise VerificationFailed("pullback", residuals["pullback_residual"], pullback_tol)
    return residuals


# Schwarz-Pick

def squared_half_plane_map(z):
    """Cayley conjugate of zeta -> zeta^2: a holomorphic self-map of H that is not an isometry."""
    zeta = cayley(z, CayleyDirection.TO_DISK)
    return cayley(np.asarray(zeta) ** 2, CayleyDirection.TO_HALF_PLANE)


def schwarz_pick_margin(f: Callable, pairs: Sequence[Tuple[complex, complex]],
                        model: Model = Model.HALF_PLANE) -> float:
    """min over pairs of d(z1, z2) - d(f z1, f z2); positive means strict contraction."""
    z1 = np.array([p[0] for p in pairs], dtype=complex)
    z2 = np.array([p[1] for p in pairs], dtype=complex)
    before = hyperbolic_distance(z1, z2, model)
    after = hyperbolic_distance(f(z1), f(z2), model)
    return float(np.min(before - after))


def random_half_plane_points(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(-2.0, 2.0, n) + 1j * rng.uniform(0.1, 3.0, n)


# synthesized inputs

def synthesize_conical(theta: float, perturbation: Sequence[complex], order: int) -> Tuple[DevelopingMapSpec, TruncatedSeries]:
    """w^theta (1 + sum p_n w^n) and the normalizing coordinate it should produce."""
    coeffs = TruncatedSeries.from_coeffs([1.0, *perturbation], order, lead=theta)
    F = DevelopingMapSpec(SeriesMap(coeffs))
    alpha = theta - math.floor(theta)
    k = int(math.floor(theta))
    shifted = np.zeros(order + 1, dtype=complex)
    shifted[k:] = coeffs.coeffs[:order + 1 - k]
    xi = build_xi_conical(TruncatedSeries(shifted), alpha, k)
    return F, xi


def synthesize_cusp(coeffs: Sequence[complex], order: int) -> Tuple[DevelopingMapSpec, TruncatedSeries]:
    series = TruncatedSeries.from_coeffs(coeffs, order)
    k = int(np.flatnonzero(np.abs(series.coeffs) > 0)[0]) if np.any(series.coeffs != 0) else 0
    return DevelopingMapSpec(LogSeriesMap(series)), build_xi_cusp(series, k)


def _random_perturbation(rng: np.random.Generator, degree: int = 8, size: float = 0.05) -> List[complex]:
    scale = size / 2.0 ** np.arange(1, degree + 1)
    return list(scale * (rng.normal(size=degree) + 1j * rng.normal(size=degree)) / math.sqrt(2))


def _with_random_target(F: DevelopingMapSpec, rng: np.random.Generator, change_model: bool) -> DevelopingMapSpec:
    if change_model:
        F = dev_change_model(F)
    return dev_post_compose(F, random_isometry(rng, F.target_model, max_radius=0.5))


def random_cone_parameters(rng: np.random.Generator, n: int, low: float = 0.05, high: float = 3.0,
                           integer_gap: float = 0.01) -> List[float]:
    """n cone parameters uniform on [low, high], kept off the integers where the monodromy degenerates."""
    thetas: List[float] = []
    while len(thetas) < n:
        theta = float(rng.uniform(low, high))
        if abs(theta - round(theta)) > integer_gap:
            thetas.append(theta)
    return thetas


def roundtrip_inputs(rng: np.random.Generator, order: int, random_cones: int = RANDOM_CONES,
                     cusps: int = ROUNDTRIP_CUSPS) -> List[Tuple[str, DevelopingMapSpec, Optional[float], TruncatedSeries]]:
    """(label, map, theta or None for cusps, expected xi) for the built-in input matrix."""
    cases = []
    for theta in THETA_GRID:
        for change_model in (False, True):
            F, xi = synthesize_conical(theta, _random_perturbation(rng), order)
            cases.append((f"conical_{theta}_{'h' if change_model else 'd'}",
                          _with_random_target(F, rng, change_model), theta, xi))
    for i, theta in enumerate(random_cone_parameters(rng, random_cones)):
        F, xi = synthesize_conical(theta, _random_perturbation(rng), order)
        cases.append((f"conical_random_{i}", _with_random_target(F, rng, bool(i % 2)), theta, xi))
    for i in range(cusps):
        a0 = complex(rng.uniform(-1.0, 1.0))
        F, xi = synthesize_cusp([a0, *_random_perturbation(rng)], order)
        cases.append((f"cusp_{i}", _with_random_target(F, rng, bool(i % 2)), None, xi))
    return cases


def truncation_allowance(xi: TruncatedSeries, radius: float, factor: float = 100.0) -> float:
    """Rough relative size of the terms of xi dropped at order N on |w| = radius."""
    n = xi.order
    top = (abs(xi[n - 1]) + abs(xi[n])) * radius ** (n - 1)
    return factor * top / max(abs(xi[1]), 1e-300)


def report_allowance(report: SingularityReport, radius: float, factor: float = 20.0) -> float:
    """
    Pullback slack owed to truncation at order N.

    The measured Fourier tail past N bounds what the truncated development misses on the
    sampling circle; xi' picks up a factor of at most N + 2 from it, divided by theta for cones.
    """
    n = report.xi_series.order
    tail = report.diagnostics.get("truncation_tail", 0.0)
    gain = (n + 2) if report.kind is SingularityKind.CUSP else 1 + (n + 2) / report.theta
    return max(truncation_allowance(report.xi_series, radius), factor * gain * tail)


# suite

def _check(name: str, residual: float, tolerance: float) -> CheckResult:
    passed = bool(np.isfinite(residual)) and bool(residual <= tolerance)
    if not passed:
        logger.warning(f"Check {name} failed: residual {residual:.3e} > {tolerance:.3e}")
    return CheckResult(name, passed, float(residual), float(tolerance))


def _model_identity(config: RunConfig, rng: np.random.Generator) -> CheckResult:
    r = np.sqrt(rng.uniform(0.05 ** 2, 0.8 ** 2, 200))
    z = r * np.exp(2j * np.pi * rng.uniform(size=200))
    worst = 0.0
    for theta in CURVATURE_THETAS:
        pulled = Pullback(DevelopingMapSpec(PowerMap(theta)), HyperbolicDisk()).density(z)
        model = Conical(theta).density(z)
        worst = max(worst, float(np.max(np.abs(pulled - model) / model)))
    pulled = Pullback(DevelopingMapSpec(LogMap()), HyperbolicHalfPlane()).density(z)
    model = Cusp().density(z)
    worst = max(worst, float(np.max(np.abs(pulled - model) / model)))
    return _check("model_identity", worst, config.tol("model_identity"))


def _curvature(config: RunConfig) -> List[CheckResult]:
    annulus = annulus_grid(0.3, 0.7, (20, 20))
    metrics = [HyperbolicDisk(), Cusp()] + [Conical(t) for t in CURVATURE_THETAS]
    worst = max(max_curvature_residual(m, annulus) for m in metrics)
    worst = max(worst, max_curvature_residual(HyperbolicHalfPlane(), rect_grid((-0.5, 0.5), (0.5, 1.5), (20, 20))))
    ratios = [curvature_refinement_ratio(m, 0.3) for m in (HyperbolicDisk(), Conical(0.5), Cusp())]
    return [
        _check("curvature", worst, config.tol("curvature")),
        _check("curvature_order", max(abs(r - 4.0) for r in ratios), 0.5),
    ]


def _gauge_deviation_under_rotation(F: DevelopingMapSpec, xi: TruncatedSeries, config: RunConfig) -> float:
    """Worst gauge deviation between the xi of F(e^{i phi} w) and xi(e^{i phi} w)."""
    worst = 0.0
    for phi in GAUGE_ANGLES:
        rotated = classify_singularity(dev_rotate_input(F, phi), config)
        worst = max(worst, gauge_deviation(rotated.xi_series, rotate_series_input(xi, phi)))
    return worst


def _roundtrip(config: RunConfig, rng: np.random.Generator) -> Tuple[List[CheckResult], List[Dict[str, float]]]:
    """Round-trip checks plus the diagnostics of every classified cusp."""
    theta_worst, xi_worst, cross_worst, pullback_excess, misclassified = 0.0, 0.0, 0.0, 0.0, 0
    gauge_worst = 0.0
    cusp_diagnostics: List[Dict[str, float]] = []
    xi_tol = config.tol("xi")
    for label, F, theta, expected_xi in roundtrip_inputs(rng, config.truncation_order):
        try:
            report = classify_singularity(F, config)
        except SingularityError as e:
            logger.warning(f"Roundtrip input {label} failed to classify: {e}")
            misclassified += 1
            continue
        want = SingularityKind.CUSP if theta is None else SingularityKind.CONICAL
        if report.kind is not want:
            misclassified += 1
            continue
        if theta is not None:
            theta_worst = max(theta_worst, abs(report.theta - theta))
        else:
            cusp_diagnostics.append(report.diagnostics)
        xi_worst = max(xi_worst, gauge_deviation(report.xi_series, expected_xi))
        try:
            gauge_worst = max(gauge_worst, _gauge_deviation_under_rotation(F, report.xi_series, config))
        except SingularityError as e:
            logger.warning(f"Rotated copy of {label} failed to classify: {e}")
            gauge_worst = float("inf")
        allowance = report_allowance(report, config.radius)
        try:
            residuals = report_crosscheck(report, F, config, pullback_allowance=allowance)
            cross_worst = max(cross_worst, residuals["theta_gap"])
        except VerificationFailed as e:
            logger.warning(f"Cross-check failed for {label}: {e}")
            if e.name == "theta":
                cross_worst = max(cross_worst, e.residual)
            else:
                pullback_excess = max(pullback_excess, e.residual - e.tolerance)
    results = [
        _check("roundtrip_misclassified", float(misclassified), 0.0),
        _check("roundtrip_theta", theta_worst, config.tol("roundtrip_theta")),
        _check("roundtrip_xi", xi_worst, xi_tol),
        _check("uniqueness_gauge", gauge_worst, xi_tol),
        _check("theta_crosscheck", cross_worst, config.tol("theta")),
        _check("pullback_excess", pullback_excess, 0.0),
    ]
    return results, cusp_diagnostics


def parabolic_displacement_excess(diagnostics: Sequence[Dict[str, float]]) -> float:
    """
    How far the normalized parabolic monodromies miss d(iy, T(iy)) <= 2 pi / y.

    Each cusp report carries the displacement of iy at the heights in DISPLACEMENT_HEIGHTS;
    a value that fails to decrease with y counts as an excess of 1.
    """
    if not diagnostics:
        return float("inf")
    excess = 0.0
    for d in diagnostics:
        values = [d[f"displacement_y{int(y)}"] for y in DISPLACEMENT_HEIGHTS]
        excess = max(excess, *(v - 2 * math.pi / y * (1 + 1e-6) for v, y in zip(values, DISPLACEMENT_HEIGHTS)))
        if not all(a > b for a, b in zip(values, values[1:])):
            excess = max(excess, 1.0)
    return max(excess, 0.0)


def _displacement(config: RunConfig, cusp_diagnostics: Sequence[Dict[str, float]]) -> List[CheckResult]:
    shortfall = 0.0
    points = [1j * y for y in (0.01, 0.1, 1.0, 10.0, 100.0)]
    for lam in (2.0, 4.0, 10.0):
        shortfall = max(shortfall, math.log(lam) - displacement_infimum(dilation(lam), points))
    return [
        _check("parabolic_displacement", parabolic_displacement_excess(cusp_diagnostics), 0.0),
        _check("hyperbolic_displacement", max(shortfall, 0.0), 1e-9),
    ]


def _schwarzian(config: RunConfig, rng: np.random.Generator) -> List[CheckResult]:
    worst_c2 = 0.0
    for theta in THETA_GRID:
        expansion = schwarzian_expand(DevelopingMapSpec(PowerMap(theta)), config.radius, config.samples,
                                      config.truncation_order, config.tol("structure"))
        worst_c2 = max(worst_c2, abs(expansion.window[-2] - (1 - theta * theta) / 2))
    log_expansion = schwarzian_expand(DevelopingMapSpec(LogMap()), config.radius, config.samples,
                                      config.truncation_order, config.tol("structure"))
    worst_c2 = max(worst_c2, abs(log_expansion.window[-2] - 0.5))

    worst_invariance = 0.0
    for _ in range(50):
        base = DevelopingMapSpec(PowerMap(float(rng.choice(THETA_GRID))))
        moved = dev_post_compose(base, random_isometry(rng, Model.DISK, max_radius=0.5))
        z = rng.uniform(0.2, 0.6) * np.exp(2j * np.pi * rng.uniform())
        exact = schwarzian(base, z)
        worst_invariance = max(worst_invariance, abs(schwarzian_fd(moved, z) - exact) / abs(exact))
    return [
        _check("schwarzian_leading", worst_c2, config.tol("theta")),
        _check("schwarzian_invariance", worst_invariance, 1e-6),
    ]


def _series_algebra(config: RunConfig, rng: np.random.Generator, instances: int = 1000) -> CheckResult:
    order = 16
    worst = 0.0

    def rand(zero_constant: bool = False) -> TruncatedSeries:
        c = (rng.normal(size=order + 1) + 1j * rng.normal(size=order + 1)) / 2.0 ** np.arange(order + 1)
        if zero_constant:
            c[0] = 0.0
        return TruncatedSeries(c)

    for _ in range(instances):
        a, b, c = rand(), rand(), rand()
        worst = max(worst, series_mul(a, b).max_deviation(series_mul(b, a)))
        worst = max(worst, series_mul(series_mul(a, b), c).max_deviation(series_mul(a, series_mul(b, c))))
        worst = max(worst, series_mul(a, b + c).max_deviation(series_mul(a, b) + series_mul(a, c)))
        x, y = rand(True), rand(True)
        worst = max(worst, series_exp(x + y).max_deviation(series_mul(series_exp(x), series_exp(y))))
        worst = max(worst, series_log(series_exp(x)).max_deviation(x))
        p = float(rng.uniform(0.2, 4.0)) * (1 if rng.uniform() < 0.5 else -1)
        positive = TruncatedSeries(np.concatenate([[1.0], a.coeffs[1:] / 4]))
        worst = max(worst, series_pow(series_pow(positive, p), 1.0 / p).max_deviation(positive))
        s = TruncatedSeries(np.concatenate([[0.0, 1.0 + abs(x[1])], x.coeffs[2:] / 4]))
        worst = max(worst, series_compose(s, series_reversion(s)).max_deviation(TruncatedSeries.variable(order)))
    return _check("series_algebra", worst, config.tol("series"))


def _schwarz_pick(config: RunConfig, rng: np.random.Generator) -> List[CheckResult]:
    z1, z2 = random_half_plane_points(rng, 100), random_half_plane_points(rng, 100)
    pairs = list(zip(z1, z2))
    margin = schwarz_pick_margin(squared_half_plane_map, pairs)
    worst_iso = 0.0
    for model in (Model.DISK, Model.HALF_PLANE):
        L = random_isometry(rng, model)
        if model is Model.DISK:
            a, b = cayley(z1, CayleyDirection.TO_DISK), cayley(z2, CayleyDirection.TO_DISK)
        else:
            a, b = z1, z2
        gap = np.abs(hyperbolic_distance(mobius_apply(L, a), mobius_apply(L, b), model)
                     - hyperbolic_distance(a, b, model))
        worst_iso = max(worst_iso, float(np.max(gap)))
    return [
        _check("schwarz_pick_strict", 0.0 if margin > 0 else -margin + 1e-300, 0.0),
        _check("isometry", worst_iso, config.tol("isometry")),
    ]


def run_suite(config: Optional[RunConfig] = None, seed: int = 20240611) -> List[CheckResult]:
    """Run every oracle over the built-in input matrix."""
    config = config or RunConfig()
    rng = np.random.default_rng(seed)
    logger.info(f"Running verification suite (N={config.truncation_order}, r={config.radius}, M={config.samples})")
    results = [_model_identity(config, rng)]
    results += _curvature(config)
    roundtrip, cusp_diagnostics = _roundtrip(config, rng)
    results += roundtrip
    results += _displacement(config, cusp_diagnostics)
    results += _schwarzian(config, rng)
    results.append(_series_algebra(config, rng))
    results += _schwarz_pick(config, rng)
    failed = [r.name for r in results if not r.passed]
    logger.info(f"Verification suite: {len(results) - len(failed)}/{len(results)} checks passed")
    return results
