# This file is part of lsst-lorentzshape.
#
# Developed for the LSST Data Management System.
# This product includes software developed by the LSST Project
# (https://www.lsst.org).
# See the COPYRIGHT file at the top-level directory of this distribution
# for details of code ownership.
#
# Use of this source code is governed by a 3-clause BSD-style
# license that can be found in the LICENSE file.

import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lsst.lorentzshape import (
    AngleCaseUndefinedError,
    DimensionMismatchError,
    InvalidSimilarityError,
    LightlikeFrameVectorError,
    LightlikeInputError,
)
from lsst.lorentzshape.minkowski import (
    AngleKind,
    CausalCharacter,
    LorentzVector,
    Orientation,
    PSimilarity,
    angle_between,
    apply,
    causal_classify,
    compose,
    gram_schmidt,
    inner,
    inner_many,
    metric,
    pseudo_orthonormality_residual,
    random_pseudo_orthogonal,
    random_psimilarity,
)

_finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)


class InnerProductTestCase(unittest.TestCase):
    """Test the Lorentzian inner product and causal classification."""

    def test_metric(self):
        np.testing.assert_array_equal(metric(3), np.diag([-1.0, 1.0, 1.0]))
        with self.assertRaises(DimensionMismatchError):
            metric(1)

    def test_inner(self):
        self.assertEqual(inner([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]), -1.0)
        self.assertEqual(inner([1.0, 2.0, 3.0], [4.0, 5.0, 6.0]), -4.0 + 10.0 + 18.0)
        self.assertEqual(inner(LorentzVector([0.0, 1.0]), [3.0, 2.0]), 2.0)
        with self.assertRaises(DimensionMismatchError):
            inner([1.0, 0.0], [1.0, 0.0, 0.0])

    def test_inner_many(self):
        x = np.array([[1.0, 0.0], [2.0, 1.0]])
        np.testing.assert_array_equal(inner_many(x, x), [-1.0, -3.0])
        with self.assertRaises(DimensionMismatchError):
            inner_many(x, np.ones((2, 3)))

    def test_causal_classify(self):
        self.assertEqual(causal_classify([2.0, 1.0, 0.0]), CausalCharacter.TIMELIKE)
        self.assertEqual(causal_classify([0.0, 1.0, 0.0]), CausalCharacter.SPACELIKE)
        self.assertEqual(causal_classify([1.0, 1.0, 0.0]), CausalCharacter.LIGHTLIKE)
        self.assertEqual(causal_classify([1.0, 0.6, 0.8]), CausalCharacter.LIGHTLIKE)
        self.assertEqual(causal_classify([0.0, 0.0]), CausalCharacter.LIGHTLIKE)
        self.assertEqual(LorentzVector([3.0, 0.0]).causal_character(), CausalCharacter.TIMELIKE)
        with self.assertRaises(ValueError):
            causal_classify([1.0, 0.0], tol=-1.0)

    def test_lorentz_vector(self):
        v = LorentzVector([3.0, 4.0, 0.0])
        self.assertEqual(v.dim, 3)
        self.assertAlmostEqual(v.norm, math.sqrt(7.0))
        self.assertEqual(v, LorentzVector(np.array([3.0, 4.0, 0.0])))
        self.assertEqual(hash(v), hash(LorentzVector([3.0, 4.0, 0.0])))
        self.assertNotEqual(v, LorentzVector([3.0, 4.0, 1.0]))
        with self.assertRaises(ValueError):
            v.components[0] = 1.0
        with self.assertRaises(DimensionMismatchError):
            LorentzVector([1.0])


class AngleTestCase(unittest.TestCase):
    """Test the four angle cases."""

    def test_timelike(self):
        t = 0.7
        angle, kind = angle_between([1.0, 0.0], [math.cosh(t), math.sinh(t)])
        self.assertAlmostEqual(angle, t, places=12)
        self.assertEqual(kind, AngleKind.HYPERBOLIC)
        with self.assertRaises(AngleCaseUndefinedError):
            angle_between([1.0, 0.0], [-1.0, 0.0])

    def test_spacelike(self):
        theta = 0.4
        angle, kind = angle_between([0.0, 1.0, 0.0], [0.0, math.cos(theta), math.sin(theta)])
        self.assertAlmostEqual(angle, theta, places=12)
        self.assertEqual(kind, AngleKind.CIRCULAR)

        t = 0.7
        angle, kind = angle_between([0.0, 1.0, 0.0], [math.sinh(t), math.cosh(t), 0.0])
        self.assertAlmostEqual(angle, t, places=12)
        self.assertEqual(kind, AngleKind.HYPERBOLIC)

        # The plane spanned by these is degenerate.
        with self.assertRaises(AngleCaseUndefinedError):
            angle_between([0.0, 1.0, 0.0], [1.0, 1.0, 1.0])

    def test_undefined(self):
        with self.assertRaises(LightlikeInputError):
            angle_between([1.0, 1.0], [1.0, 0.0])
        with self.assertRaises(AngleCaseUndefinedError):
            angle_between([1.0, 0.0], [0.0, 1.0])


class PSimilarityTestCase(unittest.TestCase):
    """Test pseudo-similarities."""

    def test_validation(self):
        with self.assertRaises(InvalidSimilarityError):
            PSimilarity(0.0, np.eye(3), np.zeros(3))
        with self.assertRaises(InvalidSimilarityError):
            PSimilarity(1.0, np.eye(3) * 2.0, np.zeros(3))
        with self.assertRaises(InvalidSimilarityError):
            PSimilarity(1.0, np.diag([1.0, 1.0, -1.0]), np.zeros(3))
        with self.assertRaises(DimensionMismatchError):
            PSimilarity(1.0, np.eye(3), np.zeros(2))

    def test_identity(self):
        f = PSimilarity.identity(3)
        x = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(f.apply(x), x)
        self.assertEqual(apply(f, x), LorentzVector(x))
        self.assertEqual(f.orientation, Orientation.PRESERVING)

    def test_orientation(self):
        self.assertEqual(PSimilarity(-1.0, np.eye(3), np.zeros(3)).orientation, Orientation.REVERSING)
        self.assertEqual(PSimilarity(-1.0, np.eye(2), np.zeros(2)).orientation, Orientation.PRESERVING)
        self.assertEqual(PSimilarity(2.0, np.eye(3), np.zeros(3)).orientation, Orientation.PRESERVING)

    def test_random_pseudo_orthogonal(self):
        g = metric(4)
        for seed in range(5):
            a = random_pseudo_orthogonal(4, seed)
            np.testing.assert_allclose(a.T @ g @ a, g, atol=1e-12)
            self.assertAlmostEqual(np.linalg.det(a), 1.0, places=10)
            self.assertGreaterEqual(a[0, 0], 1.0)

    def test_compose_inverse(self):
        f = random_psimilarity(3, 12)
        g = random_psimilarity(3, 13)
        x = np.array([0.3, -1.2, 0.5])
        np.testing.assert_allclose(compose(f, g).apply(x), f.apply(g.apply(x)), atol=1e-12)
        identity = f.compose(f.inverse())
        self.assertAlmostEqual(identity.mu, 1.0, places=12)
        np.testing.assert_allclose(identity.A, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(identity.b, np.zeros(3), atol=1e-12)

    def test_apply_many(self):
        f = random_psimilarity(3, 5)
        points = np.arange(12.0).reshape(4, 3)
        np.testing.assert_allclose(f.apply_many(points)[2], f.apply(points[2]))
        with self.assertRaises(DimensionMismatchError):
            f.apply_many(points[0])
        with self.assertRaises(DimensionMismatchError):
            f.linear([1.0, 2.0])

    def test_to_dict(self):
        data = PSimilarity(2.0, np.eye(2), [1.0, 0.0]).to_dict()
        self.assertEqual(data, {"mu": 2.0, "A": [[1.0, 0.0], [0.0, 1.0]], "b": [1.0, 0.0]})

    @settings(max_examples=50, deadline=None)
    @given(
        u=arrays(np.float64, 3, elements=_finite),
        v=arrays(np.float64, 3, elements=_finite),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    def test_scales_inner_product(self, u, v, seed):
        f = random_psimilarity(3, seed, max_rapidity=0.5)
        expected = f.mu**2 * inner(u, v)
        scale = f.mu**2 * (1.0 + np.dot(u, u)) * (1.0 + np.dot(v, v))
        self.assertLessEqual(abs(inner(f.linear(u), f.linear(v)) - expected), 1e-10 * scale)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    def test_preserves_angles(self, seed):
        f = random_psimilarity(3, seed, max_rapidity=0.5)
        pairs = (
            ([2.0, 0.3, -0.4], [3.0, -1.0, 1.5]),
            ([0.0, 1.0, 0.0], [0.1, 0.6, 0.8]),
            ([0.0, 1.0, 0.0], [math.sinh(0.7), math.cosh(0.7), 0.0]),
        )
        for u, v in pairs:
            angle, kind = angle_between(u, v)
            mapped, mapped_kind = angle_between(f.linear(u), f.linear(v))
            self.assertAlmostEqual(mapped, angle, places=8)
            self.assertEqual(mapped_kind, kind)
        for x in ([2.0, 0.3, -0.4], [0.1, 0.6, 0.8], [1.0, 0.6, 0.8]):
            self.assertEqual(causal_classify(f.linear(x)), causal_classify(x))


class GramSchmidtTestCase(unittest.TestCase):
    """Test pseudo-orthonormalization."""

    def test_random(self):
        rng = np.random.default_rng(3)
        rows = rng.normal(size=(4, 4))
        rows[0] = [3.0, 0.5, 0.2, 0.1]
        frame, signs = gram_schmidt(rows)
        np.testing.assert_array_equal(signs, [-1.0, 1.0, 1.0, 1.0])
        self.assertLess(pseudo_orthonormality_residual(frame, signs), 1e-12)

    def test_batched(self):
        rows = np.stack([np.eye(3), np.diag([2.0, 3.0, 4.0])])
        frame, signs = gram_schmidt(rows)
        np.testing.assert_allclose(frame, np.stack([np.eye(3), np.eye(3)]))
        self.assertEqual(signs.shape, (2, 3))

    def test_lightlike(self):
        with self.assertRaises(LightlikeFrameVectorError):
            gram_schmidt([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])


if __name__ == "__main__":
    unittest.main()
