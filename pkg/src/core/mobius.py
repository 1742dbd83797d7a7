"""
Orientation-preserving isometries of the hyperbolic plane.

Transforms are stored as unit-determinant 2x2 complex matrices tagged with the model
they act on: PSU(1,1) for the disk, PSL(2,R) for the upper half-plane.
"""
import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.core.errors import DomainError, MobiusError
from src.utils.config import DEFAULT_TOLERANCES

logger = logging.getLogger(__name__)

SHAPE_TOL = 1e-10
DET_TOL = 1e-12
NEAR_PARABOLIC_WARN = 1e-12

# z -> (z - i)/(z + i), half-plane to disk
_CAYLEY = np.array([[1.0, -1j], [1.0, 1j]]) / cmath.sqrt(2j)
_CAYLEY_INV = np.array([[1j, 1j], [-1.0, 1.0]]) / cmath.sqrt(2j)


class Model(Enum):
    DISK = "disk"
    HALF_PLANE = "halfplane"

    @property
    def other(self) -> "Model":
        return Model.HALF_PLANE if self is Model.DISK else Model.DISK


class CayleyDirection(Enum):
    TO_DISK = "to_disk"
    TO_HALF_PLANE = "to_halfplane"

    @property
    def target(self) -> Model:
        return Model.DISK if self is CayleyDirection.TO_DISK else Model.HALF_PLANE

    @property
    def source(self) -> Model:
        return self.target.other


class IsometryKind(Enum):
    IDENTITY = "identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


def _normalize(m: np.ndarray, model: Model, shape_tol: float) -> np.ndarray:
    m = np.asarray(m, dtype=complex).reshape(2, 2)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    scale = max(float(np.max(np.abs(m))), 1e-300)
    if abs(det) < DET_TOL * scale ** 2:
        raise MobiusError(f"degenerate matrix, determinant {abs(det):.3e}")
    m = m / cmath.sqrt(det)
    size = max(1.0, float(np.max(np.abs(m))))
    if model is Model.DISK:
        err = max(abs(m[1, 0] - m[0, 1].conjugate()), abs(m[1, 1] - m[0, 0].conjugate()))
        if err > shape_tol * size:
            raise MobiusError(f"matrix is not in PSU(1,1) shape (deviation {err:.3e})")
        a = 0.5 * (m[0, 0] + m[1, 1].conjugate())
        b = 0.5 * (m[0, 1] + m[1, 0].conjugate())
        m = np.array([[a, b], [b.conjugate(), a.conjugate()]])
    else:
        err = float(np.max(np.abs(m.imag)))
        if err > shape_tol * size:
            raise MobiusError(f"matrix is not real, not in PSL(2,R) (deviation {err:.3e})")
        m = m.real.astype(complex)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    m = m / cmath.sqrt(det)
    a, b = m[0, 0], m[0, 1]
    eps = 1e-14 * float(np.max(np.abs(m)))
    if abs(a.real) > eps:
        flip = a.real < 0
    elif abs(a.imag) > eps:
        flip = a.imag < 0
    else:
        flip = b.real < 0
    return -m if flip else m


@dataclass(frozen=True)
class MobiusTransform:
    a: complex
    b: complex
    c: complex
    d: complex
    model: Model = Model.DISK

    def __post_init__(self):
        m = _normalize(np.array([[self.a, self.b], [self.c, self.d]]), self.model, SHAPE_TOL)
        object.__setattr__(self, "a", complex(m[0, 0]))
        object.__setattr__(self, "b", complex(m[0, 1]))
        object.__setattr__(self, "c", complex(m[1, 0]))
        object.__setattr__(self, "d", complex(m[1, 1]))

    @classmethod
    def from_matrix(cls, m, model: Model, shape_tol: float = SHAPE_TOL) -> "MobiusTransform":
        """Build from any scalar multiple of a group element, projecting onto the model's shape."""
        m = _normalize(m, model, shape_tol)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1], model)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> complex:
        return self.a + self.d

    def act(self, z):
        """Apply to points without domain checks (vectorized)."""
        z = np.asarray(z, dtype=complex)
        return (self.a * z + self.b) / (self.c * z + self.d)

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return 1.0 / (self.c * z + self.d) ** 2

    def __call__(self, z):
        return mobius_apply(self, z)

    def __matmul__(self, other: "MobiusTransform") -> "MobiusTransform":
        return mobius_compose(self, other)

    def inverse(self) -> "MobiusTransform":
        return mobius_inverse(self)

    def isclose(self, other: "MobiusTransform", tol: float = 1e-9) -> bool:
        """Projective equality: compare matrices up to a global sign."""
        return self.model is other.model and matrix_distance(self, other) <= tol


def matrix_distance(l1: MobiusTransform, l2: MobiusTransform) -> float:
    m1, m2 = l1.matrix, l2.matrix
    return float(min(np.max(np.abs(m1 - m2)), np.max(np.abs(m1 + m2))))


def in_domain(z, model: Model) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if model is Model.DISK:
        return np.abs(z) < 1.0
    return z.imag > 0.0


def mobius_apply(L: MobiusTransform, z):
    """Image of z under L; z must lie in the open model domain."""
    z = np.asarray(z, dtype=complex)
    if not np.all(in_domain(z, L.model)):
        raise DomainError(f"point outside the {L.model.value} model domain")
    denom = L.c * z + L.d
    if np.any(np.abs(denom) <= 1e-15 * (abs(L.c) * np.abs(z) + abs(L.d))):
        raise DomainError("point at the pole of the transformation")
    out = (L.a * z + L.b) / denom
    return complex(out) if np.ndim(out) == 0 else out


def mobius_compose(l1: MobiusTransform, l2: MobiusTransform) -> MobiusTransform:
    """l1 after l2."""
    if l1.model is not l2.model:
        raise MobiusError(f"cannot compose {l1.model.value} and {l2.model.value} transforms")
    return MobiusTransform.from_matrix(l1.matrix @ l2.matrix, l1.model)


def mobius_inverse(L: MobiusTransform) -> MobiusTransform:
    return MobiusTransform(L.d, -L.b, -L.c, L.a, L.model)


def conjugate_by(L: MobiusTransform, K: MobiusTransform) -> MobiusTransform:
    """K o L o K^-1."""
    return mobius_compose(mobius_compose(K, L), mobius_inverse(K))


# constructors

def identity(model: Model = Model.DISK) -> MobiusTransform:
    return MobiusTransform(1.0, 0.0, 0.0, 1.0, model)


def rotation(theta: float, model: Model = Model.DISK) -> MobiusTransform:
    """Rotation by theta about 0 (disk) or about i (half-plane)."""
    if model is Model.DISK:
        h = cmath.exp(0.5j * theta)
        return MobiusTransform(h, 0.0, 0.0, h.conjugate(), model)
    c, s = math.cos(0.5 * theta), math.sin(0.5 * theta)
    return MobiusTransform(c, s, -s, c, model)


def translation(t: float, model: Model = Model.HALF_PLANE) -> MobiusTransform:
    L = MobiusTransform(1.0, float(t), 0.0, 1.0, Model.HALF_PLANE)
    return L if model is Model.HALF_PLANE else cayley_conjugate(L)


def dilation(lam: float, model: Model = Model.HALF_PLANE) -> MobiusTransform:
    if lam <= 0:
        raise MobiusError(f"dilation factor must be positive, got {lam}")
    r = math.sqrt(lam)
    L = MobiusTransform(r, 0.0, 0.0, 1.0 / r, Model.HALF_PLANE)
    return L if model is Model.HALF_PLANE else cayley_conjugate(L)


def disk_automorphism(p: complex) -> MobiusTransform:
    """z -> (z - p)/(1 - conj(p) z), sending p to 0."""
    p = complex(p)
    if abs(p) >= 1.0:
        raise DomainError(f"automorphism center {p} outside the unit disk")
    s = math.sqrt(1.0 - abs(p) ** 2)
    return MobiusTransform(1.0 / s, -p / s, -p.conjugate() / s, 1.0 / s, Model.DISK)


def random_isometry(rng: np.random.Generator, model: Model = Model.DISK,
                    max_radius: float = 0.6) -> MobiusTransform:
    p = max_radius * math.sqrt(rng.uniform()) * cmath.exp(2j * math.pi * rng.uniform())
    L = mobius_compose(rotation(2 * math.pi * rng.uniform()), disk_automorphism(p))
    return L if model is Model.DISK else cayley_conjugate(L)


# Cayley transform between the models

def cayley(z, direction: CayleyDirection):
    """(z - i)/(z + i) from the half-plane to the disk, i(1 + z)/(1 - z) back."""
    z = np.asarray(z, dtype=complex)
    if direction is CayleyDirection.TO_DISK:
        denom = z + 1j
    else:
        denom = 1.0 - z
    if np.any(denom == 0):
        raise DomainError(f"point at the pole of the Cayley map ({direction.value})")
    out = (z - 1j) / denom if direction is CayleyDirection.TO_DISK else 1j * (1.0 + z) / denom
    return complex(out) if np.ndim(out) == 0 else out


def cayley_derivative(z, direction: CayleyDirection):
    z = np.asarray(z, dtype=complex)
    if direction is CayleyDirection.TO_DISK:
        return 2j / (z + 1j) ** 2
    return 2j / (1.0 - z) ** 2


def cayley_conjugate(L: MobiusTransform) -> MobiusTransform:
    """The same isometry expressed in the other model."""
    if L.model is Model.HALF_PLANE:
        m = _CAYLEY @ L.matrix @ _CAYLEY_INV
    else:
        m = _CAYLEY_INV @ L.matrix @ _CAYLEY
    return MobiusTransform.from_matrix(m, L.model.other)


def to_model(L: MobiusTransform, model: Model) -> MobiusTransform:
    return L if L.model is model else cayley_conjugate(L)


# fixed points and distances

def fixed_points(L: MobiusTransform) -> List[complex]:
    """Roots of c z^2 + (d - a) z - b = 0; infinity appears as complex('inf')."""
    a, b, c, d = L.a, L.b, L.c, L.d
    scale = float(np.max(np.abs(L.matrix)))
    B = d - a
    if abs(c) <= 1e-14 * scale:
        if abs(B) <= 1e-14 * scale:
            return [complex("inf"), complex("inf")]
        return [b / B, complex("inf")]
    disc = cmath.sqrt(B * B + 4 * b * c)
    sign = 1.0 if (B.conjugate() * disc).real >= 0 else -1.0
    q = -0.5 * (B + sign * disc)
    if q == 0:
        return [0j, 0j]
    return [q / c, -b / q]


def three_point_matrix(p: Sequence[complex], q: Sequence[complex]) -> np.ndarray:
    """Unnormalized matrix of the Mobius map sending p[i] to q[i], i = 0, 1, 2."""
    (p1, p2, p3), (q1, q2, q3) = p, q
    a = np.linalg.det(np.array([[p1 * q1, q1, 1], [p2 * q2, q2, 1], [p3 * q3, q3, 1]]))
    b = np.linalg.det(np.array([[p1 * q1, p1, q1], [p2 * q2, p2, q2], [p3 * q3, p3, q3]]))
    c = np.linalg.det(np.array([[p1, q1, 1], [p2, q2, 1], [p3, q3, 1]]))
    d = np.linalg.det(np.array([[p1 * q1, p1, 1], [p2 * q2, p2, 1], [p3 * q3, p3, 1]]))
    return np.array([[a, b], [c, d]])


def three_point_fit(p: Sequence[complex], q: Sequence[complex], model: Model,
                    shape_tol: float = SHAPE_TOL) -> MobiusTransform:
    """Isometry through three point pairs; raises MobiusError on a degenerate triple."""
    if len(p) != 3 or len(q) != 3:
        raise MobiusError("three-point fit needs exactly three pairs")
    return MobiusTransform.from_matrix(three_point_matrix(p, q), model, shape_tol)


def hyperbolic_distance(z1, z2, model: Model = Model.DISK):
    """Distance for the curvature -1 metric on the chosen model."""
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    if not (np.all(in_domain(z1, model)) and np.all(in_domain(z2, model))):
        raise DomainError(f"distance requested outside the {model.value} model domain")
    if model is Model.HALF_PLANE:
        out = 2.0 * np.arcsinh(np.abs(z1 - z2) / (2.0 * np.sqrt(z1.imag * z2.imag)))
    else:
        out = 2.0 * np.arctanh(np.abs(z1 - z2) / np.abs(1.0 - np.conj(z1) * z2))
    return float(out) if np.ndim(out) == 0 else out


def displacement_infimum(L: MobiusTransform, points: Sequence[complex]) -> float:
    """Smallest displacement d(z, Lz) over the sample points; an upper bound on the true infimum."""
    pts = np.asarray(list(points), dtype=complex)
    if pts.size == 0:
        raise MobiusError("displacement needs at least one point")
    return float(np.min(hyperbolic_distance(pts, mobius_apply(L, pts), L.model)))


# classification

def normal_form(kind: IsometryKind, parameter: float, model: Model) -> MobiusTransform:
    if kind is IsometryKind.IDENTITY:
        return identity(model)
    if kind is IsometryKind.ELLIPTIC:
        return rotation(parameter, model)
    if kind is IsometryKind.PARABOLIC:
        return translation(parameter, model)
    return dilation(parameter, model)


@dataclass(frozen=True)
class IsometryClass:
    kind: IsometryKind
    parameter: float
    conjugator: MobiusTransform

    @property
    def normal_form(self) -> MobiusTransform:
        return normal_form(self.kind, self.parameter, self.conjugator.model)

    def certificate_residual(self, L: MobiusTransform, points) -> float:
        """max |K(L(K^-1 z)) - N(z)| over the given points."""
        K = self.conjugator
        points = np.asarray(points, dtype=complex)
        lhs = K.act(L.act(mobius_inverse(K).act(points)))
        return float(np.max(np.abs(lhs - self.normal_form.act(points))))


def _interior_fixed_point(L: MobiusTransform) -> complex:
    candidates = [p for p in fixed_points(L) if np.isfinite(p) and in_domain(p, L.model)]
    if not candidates:
        raise MobiusError("elliptic transform without an interior fixed point")
    return candidates[0]


def _classify_elliptic(L: MobiusTransform) -> IsometryClass:
    p = _interior_fixed_point(L)
    theta = cmath.phase(1.0 / (L.c * p + L.d) ** 2) % (2 * math.pi)
    if L.model is Model.DISK:
        K = disk_automorphism(p)
    else:
        y = math.sqrt(p.imag)
        K = MobiusTransform(1.0 / y, -p.real / y, 0.0, y, Model.HALF_PLANE)
    return IsometryClass(IsometryKind.ELLIPTIC, theta, K)


def _classify_parabolic(H: MobiusTransform) -> Tuple[float, MobiusTransform]:
    scale = float(np.max(np.abs(H.matrix)))
    if abs(H.c) <= 1e-12 * scale:
        return (H.b / H.d).real, identity(Model.HALF_PLANE)
    x = ((H.a - H.d) / (2 * H.c)).real
    K = MobiusTransform(0.0, -1.0, 1.0, -x, Model.HALF_PLANE)
    N = conjugate_by(H, K).matrix
    return (N[0, 1] / N[1, 1]).real, K


def _multiplier(H: MobiusTransform, q: complex) -> float:
    if not np.isfinite(q):
        return abs(H.d / H.a)
    return abs(1.0 / (H.c * q + H.d) ** 2)


def _classify_hyperbolic(H: MobiusTransform, tr: float) -> Tuple[float, MobiusTransform]:
    mu = 0.5 * (tr + math.sqrt(tr * tr - 4.0))
    lam = mu * mu
    q1, q2 = fixed_points(H)
    repel, attract = (q1, q2) if _multiplier(H, q1) > _multiplier(H, q2) else (q2, q1)
    if not np.isfinite(attract):
        K = MobiusTransform(1.0, -repel.real, 0.0, 1.0, Model.HALF_PLANE)
    elif not np.isfinite(repel):
        K = MobiusTransform(0.0, -1.0, 1.0, -attract.real, Model.HALF_PLANE)
    else:
        r, s = repel.real, attract.real
        sigma = 1.0 if r > s else -1.0
        K = MobiusTransform(sigma, -sigma * r, 1.0, -s, Model.HALF_PLANE)
    return lam, K


def classify_isometry(L: MobiusTransform,
                      parabolic_tol: Optional[float] = None,
                      identity_tol: Optional[float] = None) -> IsometryClass:
    """Type, normal-form parameter and conjugator of an isometry."""
    parabolic_tol = DEFAULT_TOLERANCES["parabolic"] if parabolic_tol is None else parabolic_tol
    identity_tol = DEFAULT_TOLERANCES["identity"] if identity_tol is None else identity_tol

    if np.max(np.abs(L.matrix - np.eye(2))) < identity_tol:
        return IsometryClass(IsometryKind.IDENTITY, 0.0, identity(L.model))

    H = to_model(L, Model.HALF_PLANE)
    tr = abs(H.trace.real)
    gap = tr * tr - 4.0
    if abs(gap) < parabolic_tol:
        if abs(gap) > NEAR_PARABOLIC_WARN:
            logger.warning(f"Near-parabolic monodromy (|tr^2 - 4| = {abs(gap):.2e}) treated as parabolic")
        t, K = _classify_parabolic(H)
        kind, parameter = IsometryKind.PARABOLIC, t
    elif tr < 2.0:
        return _classify_elliptic(L)
    else:
        parameter, K = _classify_hyperbolic(H, tr)
        kind = IsometryKind.HYPERBOLIC

    if L.model is Model.DISK:
        K = cayley_conjugate(K)
    return IsometryClass(kind, parameter, K)
