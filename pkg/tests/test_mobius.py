"""
Tests for Mobius isometries of the disk and half-plane models.
"""
import math

import numpy as np
import pytest

from src.core.errors import DomainError, MobiusError
from src.core.mobius import (
    CayleyDirection,
    IsometryKind,
    Model,
    MobiusTransform,
    cayley,
    cayley_conjugate,
    classify_isometry,
    conjugate_by,
    dilation,
    disk_automorphism,
    displacement_infimum,
    fixed_points,
    hyperbolic_distance,
    identity,
    mobius_apply,
    mobius_compose,
    mobius_inverse,
    normal_form,
    random_isometry,
    rotation,
    three_point_fit,
    translation,
)


class TestTransforms:
    """Construction, normalization and group operations."""

    def test_normalized_determinant(self):
        """Matrices are scaled to determinant one."""
        L = MobiusTransform(2.0, 0.0, 0.0, 2.0, Model.HALF_PLANE)
        assert np.linalg.det(L.matrix) == pytest.approx(1.0)

    def test_wrong_shape_rejected(self):
        """A complex matrix is not a half-plane isometry."""
        with pytest.raises(MobiusError):
            MobiusTransform(1j, 0.0, 0.0, -1j, Model.HALF_PLANE)

    def test_degenerate_rejected(self):
        """Singular matrices are not transformations."""
        with pytest.raises(MobiusError):
            MobiusTransform(1.0, 1.0, 1.0, 1.0, Model.HALF_PLANE)

    def test_sign_convention(self):
        """-M and M normalize to the same representative."""
        L = MobiusTransform(-1.0, -2.0, 0.0, -1.0, Model.HALF_PLANE)
        assert L.a.real > 0

    def test_compose_and_inverse(self, rng):
        """L o L^-1 is the identity."""
        for model in (Model.DISK, Model.HALF_PLANE):
            L = random_isometry(rng, model)
            assert mobius_compose(L, mobius_inverse(L)).isclose(identity(model))

    def test_compose_across_models_rejected(self):
        """Transforms of different models do not compose."""
        with pytest.raises(MobiusError):
            mobius_compose(identity(Model.DISK), identity(Model.HALF_PLANE))

    def test_apply_outside_domain(self):
        """Half-plane transforms only act on the upper half-plane."""
        with pytest.raises(DomainError):
            mobius_apply(translation(1.0), -1j)

    def test_automorphism_sends_center_to_zero(self):
        """disk_automorphism(p) maps p to 0."""
        p = 0.3 - 0.4j
        assert abs(mobius_apply(disk_automorphism(p), p)) < 1e-15


class TestCayley:
    """Passing between the models."""

    def test_i_maps_to_zero(self):
        """The Cayley transform sends i to 0 and back."""
        assert cayley(1j, CayleyDirection.TO_DISK) == pytest.approx(0)
        assert cayley(0j, CayleyDirection.TO_HALF_PLANE) == pytest.approx(1j)

    def test_conjugate_round_trip(self, rng):
        """Conjugating twice returns the original transform."""
        L = random_isometry(rng, Model.HALF_PLANE)
        assert cayley_conjugate(cayley_conjugate(L)).isclose(L)

    def test_conjugate_commutes_with_action(self, rng):
        """C(L(z)) = (C L C^-1)(C(z))."""
        L = random_isometry(rng, Model.HALF_PLANE)
        z = 0.3 + 0.8j
        lhs = cayley(mobius_apply(L, z), CayleyDirection.TO_DISK)
        rhs = mobius_apply(cayley_conjugate(L), cayley(z, CayleyDirection.TO_DISK))
        assert lhs == pytest.approx(rhs)


class TestGeometry:
    """Fixed points and distances."""

    def test_fixed_points_of_translation(self):
        """A translation fixes only infinity."""
        assert all(np.isinf(p) for p in fixed_points(translation(1.0)))

    def test_fixed_points_of_dilation(self):
        """A dilation fixes 0 and infinity."""
        points = fixed_points(dilation(4.0))
        assert any(abs(p) < 1e-14 for p in points)
        assert any(np.isinf(p) for p in points)

    def test_distance_between_models(self, rng):
        """The Cayley transform is an isometry between the models."""
        z1, z2 = 0.2 + 0.5j, -1.0 + 2.0j
        dh = hyperbolic_distance(z1, z2, Model.HALF_PLANE)
        dd = hyperbolic_distance(cayley(z1, CayleyDirection.TO_DISK), cayley(z2, CayleyDirection.TO_DISK))
        assert dh == pytest.approx(dd, rel=1e-12)

    def test_distance_along_imaginary_axis(self):
        """d(i, e i) = 1 in the half-plane."""
        assert hyperbolic_distance(1j, math.e * 1j, Model.HALF_PLANE) == pytest.approx(1.0)

    def test_isometries_preserve_distance(self, rng):
        """d(Lz, Lw) = d(z, w)."""
        L = random_isometry(rng, Model.DISK)
        z, w = 0.1 + 0.2j, -0.5 + 0.1j
        before = hyperbolic_distance(z, w)
        after = hyperbolic_distance(mobius_apply(L, z), mobius_apply(L, w))
        assert after == pytest.approx(before, abs=1e-12)

    def test_three_point_fit(self, rng):
        """Three point pairs determine the transform."""
        L = random_isometry(rng, Model.DISK)
        p = [0.1, -0.3j, 0.4 + 0.2j]
        q = [mobius_apply(L, z) for z in p]
        assert three_point_fit(p, q, Model.DISK).isclose(L, 1e-10)

    def test_parabolic_displacement_decays(self):
        """z + 2 pi moves iy by less than 2 pi / y."""
        values = [displacement_infimum(translation(2 * math.pi), [1j * y]) for y in (100.0, 1000.0)]
        assert values[0] > values[1]
        assert values[1] <= 2 * math.pi / 1000.0

    def test_dilation_displacement_bounded_below(self):
        """z -> 4z moves every point by at least log 4."""
        points = [1j * y + x for y in (0.1, 1.0, 10.0) for x in (-1.0, 0.0, 2.0)]
        assert displacement_infimum(dilation(4.0), points) >= math.log(4.0) - 1e-12


class TestClassification:
    """Isometry types and normal forms."""

    def test_identity(self):
        """The identity is classified as such."""
        assert classify_isometry(identity(Model.DISK)).kind is IsometryKind.IDENTITY

    def test_rotation(self):
        """A disk rotation is elliptic with its angle as parameter."""
        cls = classify_isometry(rotation(1.2))
        assert cls.kind is IsometryKind.ELLIPTIC
        assert cls.parameter == pytest.approx(1.2)

    def test_translation(self):
        """z + t is parabolic with parameter t."""
        cls = classify_isometry(translation(3.0))
        assert cls.kind is IsometryKind.PARABOLIC
        assert cls.parameter == pytest.approx(3.0)

    def test_dilation(self):
        """lambda z is hyperbolic with parameter lambda > 1."""
        cls = classify_isometry(dilation(0.25))
        assert cls.kind is IsometryKind.HYPERBOLIC
        assert cls.parameter == pytest.approx(4.0)

    @pytest.mark.parametrize("builder, parameter", [
        (rotation, 2.0),
        (translation, 1.5),
        (dilation, 3.0),
    ])
    def test_conjugation_invariance(self, rng, builder, parameter):
        """Conjugated transforms keep their type and parameter (up to symmetry)."""
        N = builder(parameter, Model.HALF_PLANE)
        base = classify_isometry(N)
        for _ in range(10):
            K = random_isometry(rng, Model.HALF_PLANE, max_radius=0.5)
            cls = classify_isometry(conjugate_by(N, K))
            assert cls.kind is base.kind
            if base.kind is IsometryKind.ELLIPTIC:
                assert min(abs(cls.parameter - parameter), abs(cls.parameter - (2 * math.pi - parameter))) < 1e-8
            elif base.kind is IsometryKind.PARABOLIC:
                # only the sign of the translation survives conjugation
                assert math.copysign(1.0, cls.parameter) == math.copysign(1.0, parameter)
                assert conjugate_by(conjugate_by(N, K), cls.conjugator).isclose(cls.normal_form, 1e-8)
            else:
                assert cls.parameter == pytest.approx(parameter, rel=1e-8)

    @pytest.mark.parametrize("model", [Model.DISK, Model.HALF_PLANE])
    def test_conjugator_certificate(self, rng, model):
        """K L K^-1 equals the reported normal form."""
        for builder, parameter in ((rotation, 0.7), (translation, -2.0), (dilation, 5.0)):
            K = random_isometry(rng, model, max_radius=0.5)
            L = conjugate_by(builder(parameter, model), K)
            cls = classify_isometry(L)
            moved = conjugate_by(L, cls.conjugator)
            assert moved.isclose(cls.normal_form, 1e-8)

    def test_parabolic_translation_is_not_invariant(self):
        """z + 1.5 and z + 1 are conjugate by a dilation, so only the sign of t is intrinsic."""
        K = dilation(1.5, Model.HALF_PLANE)
        cls = classify_isometry(conjugate_by(translation(1.0), K))
        assert cls.kind is IsometryKind.PARABOLIC
        assert cls.parameter == pytest.approx(1.5)
        assert classify_isometry(conjugate_by(translation(-1.0), K)).parameter < 0

    def test_normal_form_models(self):
        """Disk normal forms of parabolics are Cayley images of half-plane ones."""
        disk = normal_form(IsometryKind.PARABOLIC, 2.0, Model.DISK)
        assert cayley_conjugate(disk).isclose(translation(2.0))
