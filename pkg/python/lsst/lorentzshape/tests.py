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

"""Support code for test cases working with sampled curves."""

from __future__ import annotations

__all__ = ("CurveTestCase",)

import unittest
from typing import TYPE_CHECKING, Any

import numpy as np
import numpy.typing as npt

from lsst.resources.utils import makeTestTempDir, removeTestTempDir

from .curve import SampledCurve, sample_analytic
from .minkowski import pseudo_orthonormality_residual

if TYPE_CHECKING:

    class TestCaseMixin(unittest.TestCase):
        """Base class for mixin test classes that use TestCase methods."""

        pass

else:

    class TestCaseMixin:
        """Do-nothing definition of mixin base class for regular execution."""

        pass


class CurveTestCase(TestCaseMixin):
    """Mixin with analytic curve fixtures and curve assertions.

    Use together with `unittest.TestCase`.
    """

    tmpdir: str | None = None

    def makeTempDir(self) -> str:
        """Create a temporary directory removed when the test finishes."""
        self.tmpdir = makeTestTempDir()
        self.addCleanup(removeTestTempDir, self.tmpdir)
        return self.tmpdir

    @staticmethod
    def sample(
        generator: str, t_range: tuple[float, float] = (0.0, 1.0), m: int = 1001, **params: Any
    ) -> SampledCurve:
        """Sample one of the built-in closed-form curves."""
        return sample_analytic(generator, t_range, m, **params)

    def assertPseudoOrthonormal(self, frames: npt.ArrayLike, signs: npt.ArrayLike, tol: float = 1e-9) -> None:
        """Assert that every frame is pseudo-orthonormal with the given
        signs.
        """
        residual = pseudo_orthonormality_residual(frames, signs)
        self.assertLessEqual(residual, tol, msg=f"frame residual {residual:.3g} exceeds {tol:.3g}")

    def assertCurvesClose(self, first: SampledCurve, second: SampledCurve, atol: float = 1e-9) -> None:
        """Assert that two curves have the same samples within ``atol``."""
        self.assertEqual(first.points.shape, second.points.shape)
        np.testing.assert_allclose(first.params, second.params, rtol=0, atol=atol)
        np.testing.assert_allclose(first.points, second.points, rtol=0, atol=atol)
