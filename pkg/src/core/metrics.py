"""
Conformal metrics e^{2u}|dz|^2 of curvature -1 and their numerical checks.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from src.core.devmap import DevelopingMapSpec, dev_deriv, dev_eval
from src.core.errors import DomainError
from src.utils.config import FD_STEP

logger = logging.getLogger(__name__)

GRID_COLUMNS = ("re", "im", "u", "density", "curvature_residual")


class ConformalMetric(ABC):
    """A conformal metric given by its density, the coefficient of |dz|^2."""

    singular = False

    @abstractmethod
    def contains(self, z) -> np.ndarray:
        """Mask of points where the density is defined."""

    @abstractmethod
    def _density(self, z: np.ndarray) -> np.ndarray:
        ...

    def density(self, z):
        z = np.asarray(z, dtype=complex)
        if not np.all(self.contains(z)):
            raise DomainError(f"{type(self).__name__} density requested outside its domain")
        out = self._density(z)
        return float(out) if np.ndim(out) == 0 else out

    def log_density(self, z):
        """u = log(density)/2."""
        return 0.5 * np.log(self.density(z))


@dataclass(frozen=True)
class HyperbolicDisk(ConformalMetric):
    def contains(self, z):
        return np.abs(np.asarray(z)) < 1.0

    def _density(self, z):
        return 4.0 / (1.0 - np.abs(z) ** 2) ** 2


@dataclass(frozen=True)
class HyperbolicHalfPlane(ConformalMetric):
    def contains(self, z):
        return np.asarray(z, dtype=complex).imag > 0.0

    def _density(self, z):
        return 1.0 / z.imag ** 2


def _punctured(z) -> np.ndarray:
    r = np.abs(np.asarray(z))
    return (r > 0.0) & (r < 1.0)


@dataclass(frozen=True)
class Conical(ConformalMetric):
    """4 theta^2 |z|^(2 theta - 2) / (1 - |z|^(2 theta))^2, cone angle 2 pi theta."""
    theta: float
    singular = True

    def __post_init__(self):
        if not self.theta > 0 or self.theta == 1.0:
            raise ValueError(f"cone parameter must be positive and different from 1, got {self.theta}")

    def contains(self, z):
        return _punctured(z)

    def _density(self, z):
        r = np.abs(z)
        t = self.theta
        return 4.0 * t * t * r ** (2 * t - 2) / (1.0 - r ** (2 * t)) ** 2


@dataclass(frozen=True)
class Cusp(ConformalMetric):
    """|z|^-2 (ln|z|)^-2."""
    singular = True

    def contains(self, z):
        return _punctured(z)

    def _density(self, z):
        r = np.abs(z)
        return 1.0 / (r * np.log(r)) ** 2


@dataclass(frozen=True)
class Pullback(ConformalMetric):
    """F* base: density(base, F(z)) * |F'(z)|^2, independent of the sheet of F."""
    developing_map: DevelopingMapSpec
    base: ConformalMetric
    singular = True

    def contains(self, z):
        return _punctured(z)

    def _density(self, z):
        value = dev_eval(self.developing_map, z)
        return self.base.density(value) * np.abs(dev_deriv(self.developing_map, z)) ** 2


class GridSampled(ConformalMetric):
    """Bilinear interpolation of u sampled on a rectangular grid."""

    def __init__(self, x: Sequence[float], y: Sequence[float], u: np.ndarray, singular: bool = True):
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.u = np.asarray(u, dtype=float)
        if self.u.shape != (self.x.size, self.y.size):
            raise ValueError(f"samples of shape {self.u.shape} do not match grid {(self.x.size, self.y.size)}")
        self.singular = singular
        self._interp = RegularGridInterpolator((self.x, self.y), self.u, method="linear")

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        return ((z.real >= self.x[0]) & (z.real <= self.x[-1])
                & (z.imag >= self.y[0]) & (z.imag <= self.y[-1]))

    def _density(self, z):
        pts = np.stack([np.ravel(z.real), np.ravel(z.imag)], axis=-1)
        return np.exp(2.0 * self._interp(pts)).reshape(z.shape)


def density(m: ConformalMetric, z):
    return m.density(z)


def sample_metric_grid(m: ConformalMetric, x_range: Tuple[float, float], y_range: Tuple[float, float],
                       shape: Tuple[int, int]) -> GridSampled:
    """Sample u of a metric on a rectangle and wrap it as a GridSampled metric."""
    x = np.linspace(x_range[0], x_range[1], shape[0])
    y = np.linspace(y_range[0], y_range[1], shape[1])
    X, Y = np.meshgrid(x, y, indexing="ij")
    u = m.log_density(X + 1j * Y)
    logger.info(f"Sampled {type(m).__name__} on a {shape[0]}x{shape[1]} grid")
    return GridSampled(x, y, u, singular=m.singular)


# finite-difference curvature

_STENCIL = np.array([1.0, -1.0, 1j, -1j])


def _check_stencil(m: ConformalMetric, z: complex, h: float):
    if h <= 0:
        raise ValueError(f"finite-difference step must be positive, got {h}")
    if m.singular and abs(z) < 10 * h:
        raise DomainError(f"stencil at {z} too close to the puncture for h={h}")
    if not np.all(m.contains(z + h * np.append(_STENCIL, 0.0))):
        raise DomainError(f"stencil at {z} with h={h} leaves the domain")


def log_density_gradient_check(m: ConformalMetric, z: complex, h: float = FD_STEP,
                               relative: bool = False) -> float:
    """
    Liouville residual of u = log(density)/2 from the 5-point Laplacian.

    Args:
        m: Metric to check
        z: Stencil center
        h: Stencil spacing
        relative: Return |K + 1| (residual divided by the density) instead

    Returns:
        |Laplacian(u) - e^{2u}| at z
    """
    z = complex(z)
    _check_stencil(m, z, h)
    u0 = float(m.log_density(z))
    around = m.log_density(z + h * _STENCIL)
    laplacian = (float(np.sum(around)) - 4.0 * u0) / (h * h)
    e2u = np.exp(2.0 * u0)
    if relative:
        return abs(laplacian / e2u - 1.0)
    return abs(laplacian - e2u)


def curvature_refinement_ratio(m: ConformalMetric, z: complex, h: float = FD_STEP) -> float:
    """residual(h) / residual(h/2); close to 4 for a second-order stencil."""
    coarse = log_density_gradient_check(m, z, h)
    fine = log_density_gradient_check(m, z, h / 2)
    if fine == 0.0:
        return float("inf")
    return coarse / fine


def curve_length(m: ConformalMetric, path: Sequence[complex], subdivisions: int = 1) -> float:
    """Midpoint-rule length of a polyline, each segment split into `subdivisions` pieces."""
    pts = np.asarray(list(path), dtype=complex)
    if pts.size == 0:
        raise ValueError("curve length needs at least one point")
    if pts.size == 1:
        return 0.0
    if subdivisions < 1:
        raise ValueError(f"subdivisions must be >= 1, got {subdivisions}")
    total = 0.0
    for start, end in zip(pts[:-1], pts[1:]):
        if m.singular and _segment_distance_to_origin(start, end) == 0.0:
            raise DomainError(f"segment {start} -> {end} crosses the puncture")
        t = (np.arange(subdivisions) + 0.5) / subdivisions
        mids = start + (end - start) * t
        if not (np.all(m.contains(np.array([start, end]))) and np.all(m.contains(mids))):
            raise DomainError(f"segment {start} -> {end} leaves the domain")
        total += float(np.sum(np.sqrt(m.density(mids)))) * abs(end - start) / subdivisions
    return total


def _segment_distance_to_origin(a: complex, b: complex) -> float:
    d = b - a
    if d == 0:
        return abs(a)
    t = min(1.0, max(0.0, -(a.conjugate() * d).real / abs(d) ** 2))
    return abs(a + t * d)


# grids

def annulus_grid(r_min: float, r_max: float, shape: Tuple[int, int] = (20, 20),
                 phase: float = 0.1) -> np.ndarray:
    """Points r e^{i phi} on a polar grid, row-major in (r, phi)."""
    if not 0 < r_min <= r_max:
        raise ValueError(f"annulus needs 0 < r_min <= r_max, got {r_min}, {r_max}")
    radii = np.linspace(r_min, r_max, shape[0])
    angles = phase + 2 * np.pi * np.arange(shape[1]) / shape[1]
    return (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()


def rect_grid(x_range: Tuple[float, float], y_range: Tuple[float, float],
              shape: Tuple[int, int] = (10, 10)) -> np.ndarray:
    x = np.linspace(x_range[0], x_range[1], shape[0])
    y = np.linspace(y_range[0], y_range[1], shape[1])
    return (x[:, None] + 1j * y[None, :]).ravel()


def grid_rows(m: ConformalMetric, points: Sequence[complex], h: float = FD_STEP) -> List[Dict[str, float]]:
    """One row per point with the CSV columns re, im, u, density, curvature_residual."""
    rows = []
    for z in np.asarray(list(points), dtype=complex):
        dens = float(m.density(z))
        rows.append({
            "re": float(z.real),
            "im": float(z.imag),
            "u": 0.5 * float(np.log(dens)),
            "density": dens,
            "curvature_residual": log_density_gradient_check(m, z, h),
        })
    return rows


def max_curvature_residual(m: ConformalMetric, points: Sequence[complex], h: float = FD_STEP) -> float:
    return max(log_density_gradient_check(m, z, h) for z in points)
