"""
Singularity classification pipeline.

Monodromy type decides the singularity type: elliptic or trivial monodromy gives a
conical point, parabolic monodromy a cusp, and hyperbolic monodromy cannot occur for a
genuine hyperbolic metric. After conjugating the monodromy to its normal form the
single-valued part of the developing map is expanded on a circle and the normalizing
coordinate xi is built from its Fourier coefficients.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from src.core.devmap import (
    DevelopingMapSpec,
    MonodromyResult,
    dev_eval_with_log,
    dev_post_compose,
    dev_to_model,
    extract_monodromy,
    first_nonzero,
    validated_radius,
)
from src.core.errors import (
    ClassificationError,
    HyperbolicMonodromyError,
    InconsistentInputError,
    NegativeTranslationError,
)
from src.core.metrics import Conical, ConformalMetric, Cusp, HyperbolicDisk, HyperbolicHalfPlane, Pullback
from src.core.mobius import (
    IsometryKind,
    Model,
    MobiusTransform,
    classify_isometry,
    conjugate_by,
    disk_automorphism,
    displacement_infimum,
    mobius_compose,
    mobius_inverse,
    normal_form,
    to_model,
)
from src.core.series import TruncatedSeries, series_exp, series_pow, series_scale, series_shift
from src.utils.config import RunConfig

logger = logging.getLogger(__name__)

PULLBACK_POINTS = 64
NOISE_FLOOR_FACTOR = 64.0
WITNESS_HEIGHTS = (100.0, 1000.0, 10000.0)


class SingularityKind(Enum):
    CONICAL = "conical"
    CUSP = "cusp"


@dataclass
class SingularityReport:
    kind: SingularityKind
    theta: Optional[float]
    alpha: Optional[float]
    k: int
    monodromy: MonodromyResult
    fourier: TruncatedSeries
    xi_series: TruncatedSeries
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def cone_split(self) -> Tuple[int, float]:
        """theta as k + alpha with alpha in (0, 1]; integer angles read as (theta - 1, 1)."""
        if self.kind is not SingularityKind.CONICAL:
            raise ClassificationError("cusps have no cone angle")
        if self.monodromy.classification.kind is IsometryKind.IDENTITY:
            return self.k - 1, 1.0
        return self.k, self.alpha


@dataclass(frozen=True)
class FourierStats:
    negative_mass: float
    floor_count: int
    resolved_order: int
    tail_mass: float = 0.0


# circle sampling

def _single_valued_part(F: DevelopingMapSpec, monodromy: MonodromyResult, w: np.ndarray,
                        log_w: np.ndarray) -> Tuple[np.ndarray, float]:
    """Samples of the periodic part and the magnitude of the terms that produced them."""
    values = dev_eval_with_log(F, w, log_w)
    magnitude = float(np.max(np.abs(values)))
    cls = monodromy.classification
    if cls.kind is IsometryKind.PARABOLIC:
        correction = 1j * cls.parameter / (2 * math.pi) * log_w
        return values + correction, max(magnitude, float(np.max(np.abs(correction))))
    if cls.kind is IsometryKind.ELLIPTIC:
        G = values * np.exp(-cls.parameter / (2 * math.pi) * log_w)
        return G, max(magnitude, float(np.max(np.abs(G))))
    return values, magnitude


def _check_normal_form(F: DevelopingMapSpec, monodromy: MonodromyResult):
    cls = monodromy.classification
    if cls.kind is IsometryKind.HYPERBOLIC:
        raise HyperbolicMonodromyError("hyperbolic monodromy has no periodic part")
    expected = Model.HALF_PLANE if cls.kind is IsometryKind.PARABOLIC else Model.DISK
    if F.target_model is not expected:
        raise ClassificationError(f"{cls.kind.value} monodromy must be expanded in the {expected.value} model")
    target = normal_form(cls.kind, cls.parameter, expected)
    if not monodromy.transform.isclose(target, tol=1e-8):
        raise ClassificationError("monodromy is not in normal form; apply its conjugator first")


def fourier_development(F: DevelopingMapSpec, monodromy: MonodromyResult, radius: float, samples: int,
                        order: int, negative_tol: float = 1e-8) -> Tuple[TruncatedSeries, FourierStats]:
    """Coefficients a_0..a_N of the single-valued part, with sampling statistics."""
    if not 0 < radius < 1:
        raise ClassificationError(f"sampling radius must lie in (0, 1), got {radius}")
    if samples < 4 * order or samples & (samples - 1):
        raise ClassificationError(f"samples must be a power of two >= 4*N, got {samples}")
    _check_normal_form(F, monodromy)

    angles = 2 * np.pi * np.arange(samples) / samples
    w = radius * np.exp(1j * angles)
    log_w = math.log(radius) + 1j * angles + 2j * np.pi * F.branch_index
    G, magnitude = _single_valued_part(F, monodromy, w, log_w)

    spectrum = np.fft.fft(G) / samples
    scale = max(1.0, float(np.max(np.abs(G))))
    negative = np.abs(spectrum[samples - order:][::-1])
    negative_mass = float(np.max(negative)) if negative.size else 0.0
    if negative_mass > negative_tol * scale:
        raise InconsistentInputError(
            f"negative Fourier coefficient {negative_mass:.3e} above {negative_tol:.1e}: "
            f"the periodic part has a pole or essential singularity at the puncture")

    sampled = spectrum[:order + 1].copy()
    # cancellation noise in G is relative to the terms, not to G itself
    floor = NOISE_FLOOR_FACTOR * np.finfo(float).eps * magnitude
    below = np.abs(sampled) < floor
    floor_count = int(np.count_nonzero(below & (sampled != 0)))
    sampled[below] = 0.0
    resolved = np.flatnonzero(~below)
    resolved_order = int(resolved[-1]) if resolved.size else -1

    # sampled size on |w| = radius of the terms past the truncation order
    tail = np.abs(spectrum[order + 1:samples // 2])
    tail_mass = float(np.sum(tail[tail >= floor]))

    coeffs = sampled * radius ** (-np.arange(order + 1, dtype=float))
    stats = FourierStats(negative_mass / scale, floor_count, resolved_order, tail_mass)
    return TruncatedSeries(coeffs), stats


def fourier_extract(F: DevelopingMapSpec, monodromy: MonodromyResult, radius: float, samples: int,
                    order: int = 32, negative_tol: float = 1e-8) -> TruncatedSeries:
    """Fourier coefficients a_0..a_N of the periodic part of a normalized developing map."""
    return fourier_development(F, monodromy, radius, samples, order, negative_tol)[0]


# normalizing coordinates

def build_xi_cusp(fourier: TruncatedSeries, k: int) -> TruncatedSeries:
    """xi = w e^{i a_0} exp(i sum_{n >= max(k,1)} a_n w^n)."""
    if k < 0:
        raise ClassificationError(f"first index must be >= 0, got {k}")
    c = np.array(fourier.coeffs)
    c[:max(k, 1)] = 0.0
    e = series_exp(series_scale(TruncatedSeries(c), 1j))
    return series_scale(series_shift(e, 1), np.exp(1j * fourier[0]))


def build_xi_conical(fourier: TruncatedSeries, alpha: float, k: int) -> TruncatedSeries:
    """xi = w (sum_{n >= k} a_n w^{n-k})^{1/(alpha+k)}."""
    if alpha + k <= 0:
        raise ClassificationError(f"cone parameter alpha + k must be positive, got {alpha + k}")
    if fourier[k] == 0:
        raise ClassificationError(f"a_{k} vanishes; k is not the first nonzero index")
    head = np.zeros_like(fourier.coeffs)
    head[:fourier.coeffs.size - k] = fourier.coeffs[k:]
    root = series_pow(TruncatedSeries(head), 1.0 / (alpha + k))
    return series_shift(root, 1)


def gauge_fix(xi: TruncatedSeries) -> TruncatedSeries:
    """Rotate xi so its linear coefficient is positive real."""
    lead = xi[1]
    if lead == 0:
        raise ClassificationError("normalizing coordinate has vanishing linear coefficient")
    return series_scale(xi, abs(lead) / lead)


def gauge_deviation(xi_a: TruncatedSeries, xi_b: TruncatedSeries) -> float:
    """Coefficientwise distance after fixing the unimodular gauge of both."""
    return gauge_fix(xi_a).max_deviation(gauge_fix(xi_b))


def rotate_series_input(s: TruncatedSeries, phi: float) -> TruncatedSeries:
    """Coefficients of w -> s(e^{i phi} w)."""
    n = np.arange(s.coeffs.size)
    return TruncatedSeries(s.coeffs * np.exp(1j * (s.lead_exponent + n) * phi), s.lead_exponent)


# checks

def _base_metric(model: Model) -> ConformalMetric:
    return HyperbolicDisk() if model is Model.DISK else HyperbolicHalfPlane()


def model_metric(kind: SingularityKind, theta: Optional[float] = None) -> ConformalMetric:
    if kind is SingularityKind.CUSP:
        return Cusp()
    # theta = 1 is the smooth disk metric itself
    return HyperbolicDisk() if theta == 1.0 else Conical(theta)


def pullback_residual(F: DevelopingMapSpec, kind: SingularityKind, theta: Optional[float],
                      xi: TruncatedSeries, radius: float, points: int = PULLBACK_POINTS) -> float:
    """Max relative gap between F's metric and the model metric pulled back through xi on |w| = radius."""
    w = radius * np.exp(2j * np.pi * (np.arange(points) + 0.5) / points)
    actual = Pullback(F, _base_metric(F.target_model)).density(w)
    model = model_metric(kind, theta).density(xi.evaluate(w)) * np.abs(xi.evaluate(w, 1)) ** 2
    return float(np.max(np.abs(model - actual) / actual))


def _relative_tail(kind: SingularityKind, fourier: TruncatedSeries, k: int, radius: float,
                   tail_mass: float) -> float:
    """Dropped Fourier terms measured against what xi is built from: a_k w^k for cones, 1 for cusps."""
    if kind is SingularityKind.CUSP:
        return tail_mass
    return tail_mass / max(abs(fourier[k]) * radius ** k, 1e-300)


def first_index(fourier: TruncatedSeries, tol: float) -> Optional[int]:
    scale = max(1.0, float(np.max(np.abs(fourier.coeffs))))
    return first_nonzero(fourier.coeffs, tol * scale)


# pipeline

def _normalized(transform: MobiusTransform, L: MobiusTransform, fit_residual: float) -> MonodromyResult:
    moved = conjugate_by(transform, L)
    return MonodromyResult(moved, classify_isometry(moved), fit_residual)


def _parabolic_monodromy(F: DevelopingMapSpec, monodromy: MonodromyResult,
                         config: RunConfig) -> Tuple[MobiusTransform, float, MobiusTransform]:
    """Half-plane monodromy with positive translation, its translation and conjugator."""
    H = to_model(monodromy.transform, Model.HALF_PLANE)
    cls = classify_isometry(H, config.tol("parabolic"), config.tol("identity"))
    if cls.parameter < 0:
        logger.warning(f"Negative translation {cls.parameter:.6g}; retrying with reversed loop orientation")
        reverse = extract_monodromy(F, steps=config.continuation_steps, fit_tol=config.tol("fit"),
                                    orientation=-1)
        H = to_model(mobius_inverse(reverse.transform), Model.HALF_PLANE)
        cls = classify_isometry(H, config.tol("parabolic"), config.tol("identity"))
        if cls.kind is not IsometryKind.PARABOLIC or cls.parameter < 0:
            raise NegativeTranslationError(
                f"parabolic monodromy translates by {cls.parameter:.6g} < 0; "
                f"no hyperbolic metric near a puncture has this orientation")
    return H, cls.parameter, cls.conjugator


def _classify_parabolic(F: DevelopingMapSpec, monodromy: MonodromyResult, config: RunConfig,
                        radius: float, diagnostics: Dict[str, float]):
    H, t, K = _parabolic_monodromy(F, monodromy, config)
    s = math.sqrt(2 * math.pi / t)
    S = MobiusTransform(s, 0.0, 0.0, 1.0 / s, Model.HALF_PLANE)
    L = mobius_compose(S, K)
    F1 = dev_post_compose(dev_to_model(F, Model.HALF_PLANE), L)
    normalized = _normalized(H, L, monodromy.fit_residual)
    logger.info(f"Parabolic monodromy, translation {t:.6g} rescaled to 2*pi")

    fourier, stats = fourier_development(F1, normalized, radius, config.samples,
                                         config.truncation_order, config.tol("negative_coeff"))
    k = first_index(fourier, config.tol("k_detect"))
    k = 0 if k is None else k
    xi = build_xi_cusp(fourier, k)

    for y in WITNESS_HEIGHTS:
        diagnostics[f"displacement_y{int(y)}"] = displacement_infimum(normalized.transform, [1j * y])
    diagnostics["translation"] = t
    return SingularityKind.CUSP, None, None, k, fourier, xi, stats


def _classify_conical(F: DevelopingMapSpec, monodromy: MonodromyResult, config: RunConfig,
                      radius: float, diagnostics: Dict[str, float]):
    Fd = dev_to_model(F, Model.DISK)
    M = to_model(monodromy.transform, Model.DISK)
    cls = classify_isometry(M, config.tol("parabolic"), config.tol("identity"))

    if cls.kind is IsometryKind.ELLIPTIC:
        F1 = dev_post_compose(Fd, cls.conjugator)
        normalized = _normalized(M, cls.conjugator, monodromy.fit_residual)
        alpha = cls.parameter / (2 * math.pi)
    else:
        # trivial monodromy: the map extends over the puncture; move F(0) to 0
        normalized = MonodromyResult(M, cls, monodromy.fit_residual)
        center = fourier_extract(Fd, normalized, radius, config.samples, config.truncation_order,
                                 config.tol("negative_coeff"))[0]
        F1 = dev_post_compose(Fd, disk_automorphism(center))
        alpha = 0.0
        diagnostics["center_abs"] = abs(center)

    fourier, stats = fourier_development(F1, normalized, radius, config.samples,
                                         config.truncation_order, config.tol("negative_coeff"))
    k = first_index(fourier, config.tol("k_detect"))
    if k is None:
        raise InconsistentInputError("periodic part vanishes identically")
    if cls.kind is IsometryKind.IDENTITY and k == 0:
        raise InconsistentInputError("trivial-monodromy map does not vanish at the puncture after centering")
    xi = build_xi_conical(fourier, alpha, k)
    theta = k + alpha
    logger.info(f"Conical singularity, theta = {theta:.10g} (k={k}, alpha={alpha:.10g})")
    report_alpha = 1.0 if cls.kind is IsometryKind.IDENTITY else alpha
    return SingularityKind.CONICAL, theta, report_alpha, k, fourier, xi, stats


def classify_singularity(F: DevelopingMapSpec, config: Optional[RunConfig] = None) -> SingularityReport:
    """
    Classify the isolated singularity at 0 of the metric developed by F.

    Args:
        F: Developing map on a punctured disk
        config: Truncation order, sampling radius, sample count and tolerances

    Returns:
        SingularityReport with the cone parameter or cusp, the Fourier development and xi
    """
    config = config or RunConfig()
    logger.info(f"Classifying {type(F.core).__name__} (target {F.target_model.value})")
    monodromy = extract_monodromy(F, steps=config.continuation_steps, fit_tol=config.tol("fit"))
    kind = monodromy.classification.kind
    if kind is IsometryKind.HYPERBOLIC:
        raise HyperbolicMonodromyError(
            f"monodromy is hyperbolic (dilation {monodromy.classification.parameter:.6g}); "
            f"the input is not a developing map of a hyperbolic metric near a puncture")

    radius = config.radius
    limit = validated_radius(F)
    if radius > limit:
        logger.warning(f"Sampling radius {radius} exceeds validated radius {limit:.6g}; using {limit:.6g}")
        radius = limit

    diagnostics: Dict[str, float] = {"fit_residual": monodromy.fit_residual}
    if kind is IsometryKind.PARABOLIC:
        result = _classify_parabolic(F, monodromy, config, radius, diagnostics)
    else:
        result = _classify_conical(F, monodromy, config, radius, diagnostics)
    sing_kind, theta, alpha, k, fourier, xi, stats = result

    xi = gauge_fix(xi)
    diagnostics["neg_mass"] = stats.negative_mass
    diagnostics["fourier_floor_count"] = float(stats.floor_count)
    diagnostics["fourier_resolved_order"] = float(stats.resolved_order)
    diagnostics["truncation_tail"] = _relative_tail(sing_kind, fourier, k, radius, stats.tail_mass)
    diagnostics["pullback_residual"] = pullback_residual(F, sing_kind, theta, xi, radius)
    return SingularityReport(sing_kind, theta, alpha, k, monodromy, fourier, xi, diagnostics)
