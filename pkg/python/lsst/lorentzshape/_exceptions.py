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

from __future__ import annotations

__all__ = (
    "AngleCaseUndefinedError",
    "CurveParseError",
    "DegenerateEigenvaluesError",
    "DegenerateJetError",
    "DimensionMismatchError",
    "DisjointRangesError",
    "FrameDriftError",
    "IncompatibleDimensionError",
    "InfeasibleParametersError",
    "InfeasibleSpecError",
    "InvalidFrameError",
    "InvalidSimilarityError",
    "LightlikeFrameVectorError",
    "LightlikeInputError",
    "LightlikeTangentError",
    "NoMatchError",
    "NonFiniteError",
    "NonMonotoneParameterError",
    "ResidualTooLargeError",
    "ShapeNumericalError",
    "ShapeValidationError",
    "TooFewSamplesError",
    "VanishingCurvatureError",
    "VanishingFocalError",
)


class ShapeValidationError(ValueError):
    """Base class for errors caused by invalid input.

    Notes
    -----
    The command-line interface reports these with exit status 2.
    """

    exit_code = 2


class ShapeNumericalError(ArithmeticError):
    """Base class for errors raised when a computation breaks down on
    otherwise valid input.

    Notes
    -----
    The command-line interface reports these with exit status 3.
    """

    exit_code = 3


class DimensionMismatchError(ShapeValidationError):
    """Vectors, matrices or curves of different dimension were combined."""


class CurveParseError(ShapeValidationError):
    """A serialized curve or spec could not be parsed."""


class NonMonotoneParameterError(ShapeValidationError):
    """Curve parameters are not strictly increasing."""


class TooFewSamplesError(ShapeValidationError):
    """A curve has too few samples for the requested stencil."""


class InfeasibleParametersError(ShapeValidationError):
    """Parameters of an analytic generator are outside its domain."""


class InvalidFrameError(ShapeValidationError):
    """A frame is not pseudo-orthonormal or has the wrong sign pattern."""


class InvalidSimilarityError(ShapeValidationError):
    """A matrix does not define a valid pseudo-similarity."""


class InfeasibleSpecError(ShapeValidationError):
    """A self-similar specification admits no real curve."""


class IncompatibleDimensionError(ShapeValidationError):
    """Two shape signatures cannot be compared."""


class DisjointRangesError(ShapeValidationError):
    """Two shape signatures have no common spherical parameter range."""


class LightlikeInputError(ShapeNumericalError):
    """An angle was requested for a lightlike vector."""


class AngleCaseUndefinedError(ShapeNumericalError):
    """A pair of vectors falls outside the cases where an angle is defined."""


class LightlikeTangentError(ShapeNumericalError):
    """The tangent of a curve is lightlike at some sample."""


class LightlikeFrameVectorError(ShapeNumericalError):
    """A Gram-Schmidt residual is lightlike; the curve is not generic."""


class DegenerateJetError(ShapeNumericalError):
    """Derivatives of a curve lose linear independence."""


class VanishingCurvatureError(ShapeNumericalError):
    """A curvature is too small for the requested reparametrization."""


class VanishingFocalError(ShapeNumericalError):
    """A focal curvature is too small to continue the recursion."""


class FrameDriftError(ShapeNumericalError):
    """An integrated frame could not be re-orthonormalized."""


class NonFiniteError(ShapeNumericalError):
    """A prescribed function returned a non-finite value."""


class NoMatchError(ShapeNumericalError):
    """Two curves are not related by a pseudo-similarity.

    Parameters
    ----------
    message : `str`
        Description of the failure.
    signature_distance : `float`
        Sup-norm distance between the two shape signatures.
    """

    def __init__(self, message: str, signature_distance: float):
        super().__init__(message)
        self.signature_distance = signature_distance


class ResidualTooLargeError(ShapeNumericalError):
    """Shape signatures match but the recovered map does not fit the
    curves.
    """


class DegenerateEigenvaluesError(ShapeNumericalError):
    """Eigenvalues cannot be paired unambiguously."""
