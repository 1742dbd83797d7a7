"""
Developing maps on the punctured unit disk.

A developing map is multivalued around 0. Every evaluation goes through an explicit
logarithm log z + 2*pi*i*branch, so values on any sheet are closed-form and analytic
continuation reduces to choosing the sheet.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.errors import ContinuationError, DomainError, MobiusError, MonodromyFitError, SeriesError
from src.core.mobius import (
    CayleyDirection,
    IsometryClass,
    Model,
    MobiusTransform,
    cayley,
    cayley_conjugate,
    cayley_derivative,
    classify_isometry,
    mobius_compose,
    rotation,
    three_point_fit,
    translation,
)
from src.core.series import TruncatedSeries, evaluate_with_log
from src.utils.config import CONTINUATION_STEPS, DEFAULT_TOLERANCES, MAX_CONTINUATION_STEPS

logger = logging.getLogger(__name__)

BASEPOINT_FRACTIONS = (0.5, 0.45, 0.4, 0.35, 0.3)
BASEPOINT_ANGLES = (0.37, 1.91, 3.29, 4.53, 5.71)


@dataclass(frozen=True)
class PowerMap:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"power map exponent must be positive, got {self.alpha}")

    @property
    def native_model(self) -> Model:
        return Model.DISK


@dataclass(frozen=True)
class LogMap:
    """-i log z, landing in the upper half-plane."""

    @property
    def native_model(self) -> Model:
        return Model.HALF_PLANE


@dataclass(frozen=True)
class SeriesMap:
    """w^lead * sum c_n w^n."""
    series: TruncatedSeries

    def __post_init__(self):
        k = first_nonzero(self.series.coeffs)
        if k is None:
            raise SeriesError("series map has no nonzero coefficient")
        if self.series.lead_exponent + k == 0 and (k + 1 > self.series.order or self.series.coeffs[k + 1] == 0):
            raise SeriesError("series map is not locally univalent at the puncture")

    @property
    def native_model(self) -> Model:
        return Model.DISK


@dataclass(frozen=True)
class LogSeriesMap:
    """-i log w + sum a_n w^n, the half-plane form of a parabolic developing map."""
    series: TruncatedSeries

    def __post_init__(self):
        if self.series.lead_exponent != 0.0:
            raise SeriesError("log-series map needs lead exponent 0")

    @property
    def native_model(self) -> Model:
        return Model.HALF_PLANE


Core = Union[PowerMap, LogMap, SeriesMap, LogSeriesMap]


def first_nonzero(coeffs, tol: float = 0.0) -> Optional[int]:
    nz = np.flatnonzero(np.abs(coeffs) > tol)
    return int(nz[0]) if nz.size else None


@dataclass(frozen=True)
class DevelopingMapSpec:
    core: Core
    chart: Optional[CayleyDirection] = None
    post: Optional[MobiusTransform] = None
    branch_index: int = 0

    def __post_init__(self):
        native = self.core.native_model
        if self.chart is not None and self.chart.source is not native:
            raise MobiusError(f"chart {self.chart.value} does not start from the {native.value} model")
        if self.post is not None and self.post.model is not self.target_model:
            raise MobiusError(f"post-composition acts on {self.post.model.value}, "
                              f"map targets {self.target_model.value}")

    @property
    def target_model(self) -> Model:
        return self.chart.target if self.chart is not None else self.core.native_model

    def with_branch(self, branch_index: int) -> "DevelopingMapSpec":
        return replace(self, branch_index=branch_index)


@dataclass(frozen=True)
class MonodromyResult:
    transform: MobiusTransform
    classification: IsometryClass
    fit_residual: float


def validated_radius(F: DevelopingMapSpec) -> float:
    """Half the convergence radius suggested by the coefficient growth, capped at 1."""
    if isinstance(F.core, (PowerMap, LogMap)):
        return 1.0
    c = F.core.series.coeffs
    if isinstance(F.core, LogSeriesMap):
        c = c[1:]
    k = first_nonzero(c)
    if k is None:
        return 1.0
    n = np.arange(c.size) - k
    tail = np.abs(c[k + 1:] / c[k])
    if not np.any(tail > 0):
        return 1.0
    growth = float(np.max(tail ** (1.0 / n[k + 1:])))
    return min(1.0, 0.5 / growth)


def _core_value(core: Core, z: np.ndarray, log_z: np.ndarray) -> np.ndarray:
    if isinstance(core, PowerMap):
        return np.exp(core.alpha * log_z)
    if isinstance(core, LogMap):
        return -1j * log_z
    if isinstance(core, SeriesMap):
        return evaluate_with_log(core.series, z, log_z)
    return -1j * log_z + evaluate_with_log(core.series, z, log_z)


def core_derivative(core: Core, z, log_z, order: int = 1) -> np.ndarray:
    """order-th derivative of the core map on the sheet fixed by log_z."""
    z = np.asarray(z, dtype=complex)
    log_z = np.asarray(log_z, dtype=complex)
    if order == 0:
        return _core_value(core, z, log_z)
    if isinstance(core, PowerMap):
        falling = np.prod([core.alpha - j for j in range(order)])
        return falling * np.exp((core.alpha - order) * log_z)
    log_term = -1j * (-1) ** (order - 1) * math.factorial(order - 1) / z ** order
    if isinstance(core, LogMap):
        return log_term
    series_part = evaluate_with_log(core.series, z, log_z, order)
    if isinstance(core, SeriesMap):
        return series_part
    return log_term + series_part


def _check_domain(F: DevelopingMapSpec, z: np.ndarray):
    r = np.abs(z)
    if np.any(r == 0):
        raise DomainError("developing maps are undefined at the puncture")
    limit = validated_radius(F)
    if np.any(r >= 1.0) or np.any(r > limit * (1 + 1e-12)):
        raise DomainError(f"point outside the validated radius {limit:.6g}")


def _finish(F: DevelopingMapSpec, u: np.ndarray) -> np.ndarray:
    if F.chart is not None:
        u = np.asarray(cayley(u, F.chart))
    if F.post is not None:
        u = F.post.act(u)
    return u


def _log_on_branch(z: np.ndarray, branch) -> np.ndarray:
    return np.log(z) + 2j * np.pi * np.asarray(branch)


def _scalar(out: np.ndarray):
    return complex(out) if np.ndim(out) == 0 else out


def dev_eval(F: DevelopingMapSpec, z, branch: Optional[int] = None):
    """Value on the given sheet (default: the map's current branch)."""
    z = np.asarray(z, dtype=complex)
    _check_domain(F, z)
    b = F.branch_index if branch is None else branch
    return _scalar(_finish(F, _core_value(F.core, z, _log_on_branch(z, b))))


def dev_eval_with_log(F: DevelopingMapSpec, z, log_z):
    z = np.asarray(z, dtype=complex)
    return _scalar(_finish(F, _core_value(F.core, z, np.asarray(log_z, dtype=complex))))


def dev_eval_near(F: DevelopingMapSpec, z0: complex, dz):
    """Values at z0 + dz on the sheet continued from z0 (|dz| < |z0|)."""
    dz = np.asarray(dz, dtype=complex)
    z = z0 + dz
    _check_domain(F, z)
    log_z = _log_on_branch(np.asarray(z0, dtype=complex), F.branch_index) + np.log1p(dz / z0)
    return dev_eval_with_log(F, z, log_z)


def dev_deriv(F: DevelopingMapSpec, z, branch: Optional[int] = None):
    """F'(z) through the chain rule over core, chart and post-composition."""
    z = np.asarray(z, dtype=complex)
    _check_domain(F, z)
    log_z = _log_on_branch(z, F.branch_index if branch is None else branch)
    u = _core_value(F.core, z, log_z)
    out = core_derivative(F.core, z, log_z, 1)
    if F.chart is not None:
        out = out * cayley_derivative(u, F.chart)
        u = cayley(u, F.chart)
    if F.post is not None:
        out = out * F.post.derivative(u)
    return _scalar(out)


# spec transformations

def dev_post_compose(F: DevelopingMapSpec, L: MobiusTransform) -> DevelopingMapSpec:
    """L o F."""
    post = L if F.post is None else mobius_compose(L, F.post)
    return replace(F, post=post)


def dev_change_model(F: DevelopingMapSpec) -> DevelopingMapSpec:
    """The same map followed by the Cayley transform into the other model."""
    post = None if F.post is None else cayley_conjugate(F.post)
    if F.chart is not None:
        return replace(F, chart=None, post=post)
    direction = CayleyDirection.TO_HALF_PLANE if F.target_model is Model.DISK else CayleyDirection.TO_DISK
    return replace(F, chart=direction, post=post)


def dev_to_model(F: DevelopingMapSpec, model: Model) -> DevelopingMapSpec:
    return F if F.target_model is model else dev_change_model(F)


def _chart_conjugate(F: DevelopingMapSpec, L: MobiusTransform) -> MobiusTransform:
    """Express a native-model isometry in the target model."""
    return L if F.chart is None else cayley_conjugate(L)


def dev_rotate_input(F: DevelopingMapSpec, phi: float) -> DevelopingMapSpec:
    """The map w -> F(e^{i phi} w)."""
    core = F.core
    if isinstance(core, SeriesMap):
        s = core.series
        n = np.arange(s.coeffs.size)
        rotated = TruncatedSeries(s.coeffs * np.exp(1j * (s.lead_exponent + n) * phi), s.lead_exponent)
        return replace(F, core=SeriesMap(rotated))
    if isinstance(core, LogSeriesMap):
        s = core.series
        c = s.coeffs * np.exp(1j * np.arange(s.coeffs.size) * phi)
        c[0] += phi
        return replace(F, core=LogSeriesMap(TruncatedSeries(c)))
    if isinstance(core, PowerMap):
        shift = rotation(core.alpha * phi, Model.DISK)
    else:
        shift = translation(phi, Model.HALF_PLANE)
    shift = _chart_conjugate(F, shift)
    post = shift if F.post is None else mobius_compose(F.post, shift)
    return replace(F, post=post)


# continuation and monodromy

def continue_loop(F: DevelopingMapSpec, basepoint: complex, steps: int = CONTINUATION_STEPS,
                  orientation: int = 1) -> Tuple[complex, int]:
    """
    Continue F once around the circle through basepoint.

    At every step the candidate sheets next to the predicted one are evaluated and the
    value closest to the previous step is taken. Steps double until the choice is
    unambiguous.

    Returns:
        The value after one loop and the new branch index
    """
    if steps < 16:
        raise ContinuationError(f"continuation needs at least 16 steps, got {steps}")
    if orientation not in (1, -1):
        raise ContinuationError(f"orientation must be +1 or -1, got {orientation}")
    basepoint = complex(basepoint)
    _check_domain(F, np.asarray(basepoint))

    n = steps
    while n <= MAX_CONTINUATION_STEPS:
        if _track_circle(F, basepoint, n, orientation):
            end_branch = F.branch_index + orientation
            return dev_eval(F, basepoint, end_branch), end_branch
        logger.warning(f"Continuation with {n} steps was ambiguous, retrying with {2 * n}")
        n *= 2
    raise ContinuationError(f"continuation still ambiguous at {MAX_CONTINUATION_STEPS} steps")


def _track_circle(F: DevelopingMapSpec, basepoint: complex, steps: int, orientation: int) -> bool:
    r, phi0 = abs(basepoint), math.atan2(basepoint.imag, basepoint.real)
    angles = phi0 + orientation * 2 * np.pi * np.arange(steps + 1) / steps
    points = r * np.exp(1j * angles)
    predicted = F.branch_index + np.round((angles - np.angle(points)) / (2 * np.pi)).astype(int)
    log_r = math.log(r)

    candidates = []
    for delta in (0, -1, 1):
        log_z = log_r + 1j * np.angle(points) + 2j * np.pi * (predicted + delta)
        candidates.append(dev_eval_with_log(F, points, log_z))
    chosen, below, above = candidates

    prev = chosen[:-1]
    step = np.abs(chosen[1:] - prev)
    tie = 1e-12 * (1.0 + np.abs(prev))
    separation = np.minimum(np.abs(below[1:] - chosen[1:]), np.abs(above[1:] - chosen[1:]))
    closer = np.minimum(np.abs(below[1:] - prev), np.abs(above[1:] - prev)) < step - tie
    distinct = separation > tie
    bad = distinct & (closer | (step >= 0.5 * separation))
    return not bool(np.any(bad))


def default_basepoints(F: DevelopingMapSpec) -> List[complex]:
    rho = validated_radius(F)
    return [rho * f * complex(math.cos(a), math.sin(a)) for f, a in zip(BASEPOINT_FRACTIONS, BASEPOINT_ANGLES)]


def extract_monodromy(F: DevelopingMapSpec, basepoints: Optional[Sequence[complex]] = None,
                      steps: int = CONTINUATION_STEPS, fit_tol: Optional[float] = None,
                      orientation: int = 1) -> MonodromyResult:
    """Fit the isometry relating F to its continuation around the puncture."""
    fit_tol = DEFAULT_TOLERANCES["fit"] if fit_tol is None else fit_tol
    points = list(default_basepoints(F) if basepoints is None else basepoints)
    if len(points) < 4:
        raise MonodromyFitError(f"need at least 4 basepoints, got {len(points)}")
    if any(p == 0 for p in points):
        raise MonodromyFitError("basepoints must be nonzero")

    before = [dev_eval(F, p) for p in points]
    after = [continue_loop(F, p, steps, orientation)[0] for p in points]

    try:
        transform = three_point_fit(before[:3], after[:3], F.target_model, shape_tol=fit_tol)
    except MobiusError as e:
        raise MonodromyFitError(f"monodromy fit failed: {e}") from e

    predicted = transform.act(np.array(before[3:]))
    actual = np.array(after[3:])
    residual = float(np.max(np.abs(predicted - actual) / np.maximum(1.0, np.abs(actual))))
    if residual > fit_tol:
        raise MonodromyFitError(f"validation residual {residual:.3e} exceeds {fit_tol:.1e}; "
                                f"continued values are not related by one isometry")

    classification = classify_isometry(transform)
    logger.info(f"Monodromy is {classification.kind.value} "
                f"(parameter {classification.parameter:.6g}, fit residual {residual:.2e})")
    return MonodromyResult(transform, classification, residual)
