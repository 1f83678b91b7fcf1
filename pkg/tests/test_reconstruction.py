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

import dataclasses
import math
import unittest

import numpy as np

from lsst.lorentzshape import (
    DimensionMismatchError,
    InfeasibleParametersError,
    InvalidFrameError,
    NonFiniteError,
)
from lsst.lorentzshape.minkowski import PSimilarity, random_pseudo_orthogonal
from lsst.lorentzshape.reconstruction import (
    ReconstructionSpec,
    constant_z,
    example1_spec,
    example2_spec,
    integrate_frame,
    reciprocal_z,
    reconstruct,
    reconstruct_curve,
    round_trip,
    tabulated_z,
)
from lsst.lorentzshape.similarity import recover_similarity
from lsst.lorentzshape.tests import CurveTestCase


def _spec(**kwargs):
    parameters = dict(
        z=(constant_z(0.0), constant_z(1.0)),
        x0=np.zeros(3),
        frame=np.eye(3),
        sigma_start=0.0,
        sigma_stop=1.0,
    )
    parameters.update(kwargs)
    return ReconstructionSpec(**parameters)


class ZFunctionTestCase(unittest.TestCase):
    """Test the curvature function helpers."""

    def test_functions(self):
        sigma = np.array([0.5, 1.0, 2.0])
        np.testing.assert_array_equal(constant_z(3.0)(sigma), [3.0, 3.0, 3.0])
        np.testing.assert_array_equal(reciprocal_z(2.0)(sigma), [4.0, 2.0, 1.0])
        self.assertTrue(np.isinf(reciprocal_z()(np.array([0.0]))[0]))

    def test_tabulated(self):
        # Cubic splines reproduce cubics.
        table = np.linspace(0.0, 2.0, 9)
        z = tabulated_z(table, table**3 - table)
        sigma = np.array([0.1, 0.77, 1.9])
        np.testing.assert_allclose(z(sigma), sigma**3 - sigma, atol=1e-12)


class ReconstructionSpecTestCase(unittest.TestCase):
    """Test validation of reconstruction inputs."""

    def test_valid(self):
        spec = _spec(step=0.25)
        self.assertEqual(spec.dim, 3)
        np.testing.assert_array_equal(spec.signs, [-1.0, 1.0, 1.0])
        np.testing.assert_allclose(spec.grid(), [0.0, 0.25, 0.5, 0.75, 1.0])
        with self.assertRaises(ValueError):
            spec.frame[0, 0] = 2.0

        # The step shrinks to land on the end of the range.
        grid = _spec(step=0.3).grid()
        self.assertEqual(grid.size, 5)
        self.assertEqual(grid[-1], 1.0)

    def test_default_step(self):
        self.assertEqual(_spec().grid().size, 1001)

    def test_dimensions(self):
        with self.assertRaises(DimensionMismatchError):
            _spec(frame=np.eye(3)[:2])
        with self.assertRaises(DimensionMismatchError):
            _spec(x0=np.zeros(2))
        with self.assertRaises(DimensionMismatchError):
            _spec(z=(constant_z(0.0),))

    def test_frame(self):
        with self.assertRaises(InvalidFrameError):
            _spec(frame=np.diag([1.0, 1.0, 2.0]))
        t = 0.3
        skew = np.eye(3)
        skew[1] = [math.sinh(t), math.cosh(t), 0.1]
        with self.assertRaises(InvalidFrameError):
            _spec(frame=skew)

    def test_parameters(self):
        for kwargs in (
            {"step": 0.0},
            {"step": -1e-3},
            {"sigma_start": 1.0, "sigma_stop": 0.0},
            {"sigma_stop": math.inf},
            {"kappa0": 0.0},
        ):
            with self.assertRaises(InfeasibleParametersError):
                _spec(**kwargs)
        with self.assertRaises(InfeasibleParametersError):
            example2_spec((0.0, 1.0))


class ReconstructTestCase(CurveTestCase, unittest.TestCase):
    """Test rebuilding curves from their invariants."""

    def test_example1(self):
        a = 0.7
        spec = example1_spec(a, (0.0, 1.0), step=1e-3)
        curve, integrated = reconstruct(spec)
        expected = self.sample("example1", (0.0, 1.0), 1001, a=a)
        self.assertCurvesClose(curve, expected, atol=1e-8)
        self.assertEqual(curve.label, "reconstruction")
        self.assertLess(integrated.residual.max(), 1e-12)
        self.assertLess(integrated.drift.max(), 1e-10)
        self.assertPseudoOrthonormal(integrated.frames, integrated.signs)

    def test_example2(self):
        spec = example2_spec((0.5, 1.5), step=1e-3)
        self.assertEqual(spec.dim, 4)
        curve, integrated = reconstruct(spec)
        expected = self.sample("example2", (0.5, 1.5), 1001)
        self.assertCurvesClose(curve, expected, atol=1e-7)
        # The curve stays in the plane of the first two frame vectors.
        expected = np.broadcast_to(spec.frame[2:], (1001, 2, 4))
        np.testing.assert_allclose(integrated.frames[:, 2:], expected, atol=1e-12)

    def test_scale(self):
        # kappa0 scales the curve about its initial point.
        first = reconstruct_curve(example1_spec(0.5, step=1e-2))
        spec = example1_spec(0.5, step=1e-2)
        second = reconstruct_curve(
            ReconstructionSpec(
                z=spec.z,
                x0=spec.x0,
                frame=spec.frame,
                sigma_start=spec.sigma_start,
                sigma_stop=spec.sigma_stop,
                step=spec.step,
                kappa0=2.0,
            )
        )
        np.testing.assert_allclose(second.points - spec.x0, 0.5 * (first.points - spec.x0), atol=1e-14)

    def test_precomputed_frame(self):
        spec = example1_spec(1.0, step=1e-2)
        integrated = integrate_frame(spec)
        self.assertEqual(integrated.sigma.size, 101)
        self.assertCurvesClose(reconstruct_curve(spec, integrated), reconstruct_curve(spec), atol=0.0)

    def test_drift_order(self):
        # For a constant structure matrix the local drift is sixth order.
        for spec in (example1_spec(0.7, (0.0, 2.0)), example2_spec((0.5, 1.5))):
            drifts = []
            for step in (0.1, 0.05, 0.025):
                integrated = integrate_frame(dataclasses.replace(spec, step=step))
                self.assertLess(integrated.residual.max(), 1e-10)
                drifts.append(integrated.drift[1:].max())
            for coarse, fine in zip(drifts[:-1], drifts[1:]):
                self.assertGreaterEqual(math.log2(coarse / fine), 4.5, msg=f"drifts {drifts}")

    def test_uniqueness(self):
        # Another initial frame and point give the image under the
        # Lorentz map relating the two starts.
        spec = example1_spec(0.7, (0.0, 1.0), step=1e-3)
        f = PSimilarity(1.0, random_pseudo_orthogonal(3, 4, max_rapidity=0.5), [0.5, -1.0, 2.0])
        moved = dataclasses.replace(spec, x0=f.apply(spec.x0), frame=spec.frame @ f.A.T)
        first = reconstruct_curve(spec)
        second = reconstruct_curve(moved)
        self.assertCurvesClose(second, first.transformed(f), atol=1e-9)

        report = recover_similarity(first, second)
        self.assertLess(report.residual, 1e-6)
        self.assertAlmostEqual(report.recovered.mu, 1.0, delta=1e-6)
        np.testing.assert_allclose(report.recovered.A, f.A, atol=1e-6)
        np.testing.assert_allclose(report.recovered.b, f.b, atol=1e-5)

    def test_non_finite(self):
        with self.assertRaises(NonFiniteError):
            reconstruct(_spec(z=(reciprocal_z(), constant_z(1.0)), step=0.1))
        with self.assertRaises(NonFiniteError):
            integrate_frame(_spec(z=(constant_z(0.0), reciprocal_z()), step=0.1))


class RoundTripTestCase(CurveTestCase, unittest.TestCase):
    """Test rebuilding sampled curves from their own invariants."""

    def test_example1(self):
        c = self.sample("example1", (0.0, 1.0), 201, a=0.7)
        report = round_trip(c, step=1e-3)
        self.assertTrue(report.passed)
        self.assertLess(report.max_deviation, 1e-5)
        self.assertLess(report.max_residual, 1e-12)
        self.assertGreater(report.sigma_range[0], 0.0)
        self.assertLess(report.sigma_range[1], 1.0)
        data = report.to_dict()
        self.assertEqual(set(data), {"max_deviation", "tolerance", "sigma_range", "max_residual", "passed"})
        self.assertTrue(data["passed"])

    def test_selfsimilar(self):
        c = self.sample("selfsim3", (0.0, 2.0), 401, k1=0.3, k2=0.5)
        report = round_trip(c, step=1e-3, tolerance=1e-4)
        self.assertTrue(report.passed)

    def test_tolerance(self):
        c = self.sample("example1", (0.0, 1.0), 201, a=0.7)
        self.assertFalse(round_trip(c, step=1e-3, tolerance=0.0).passed)


if __name__ == "__main__":
    unittest.main()
