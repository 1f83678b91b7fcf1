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

"""Decide whether two curves are related by a pseudo-similarity and
recover it.
"""

from __future__ import annotations

__all__ = ("MatchReport", "match_curves", "recover_similarity", "signature_distance")

import json
import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.interpolate import CubicSpline

from lsst.utils.timer import time_this

from ._exceptions import (
    DisjointRangesError,
    IncompatibleDimensionError,
    LightlikeFrameVectorError,
    NoMatchError,
    ResidualTooLargeError,
)
from .config import get_config
from .curve import SampledCurve
from .frenet import FrenetField, ShapeSignature, frenet, pshape
from .minkowski import CausalCharacter, Orientation, PSimilarity, gram_schmidt

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MatchReport:
    """Outcome of comparing two curves.

    Attributes
    ----------
    matched : `bool`
        Whether a pseudo-similarity maps the first curve onto the second.
    recovered : `PSimilarity` or `None`
        The recovered map when matched.
    signature_distance : `float`
        Sup-norm distance between the p-shape curvatures.
    residual : `float` or `None`
        Sup-norm distance between the mapped first curve and the second.
    orientation : `Orientation` or `None`
        Orientation behavior of the recovered map.
    sigma0 : `float` or `None`
        Spherical parameter of the anchor on the first curve.
    alternate : `dict` or `None`
        The same map written as ``(-mu, -A, b)``; reported when the tangent
        is timelike and the dimension odd, where ``-A`` reverses orientation.
    """

    matched: bool
    recovered: PSimilarity | None = None
    signature_distance: float = math.inf
    residual: float | None = None
    orientation: Orientation | None = None
    sigma0: float | None = None
    alternate: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        """Return the report as plain Python types.

        Returns
        -------
        data : `dict`
            Keys ``matched``, ``mu``, ``A``, ``b``, ``signature_distance``,
            ``residual`` and ``orientation``, plus ``alternate`` when set.
            Missing values and an infinite distance are `None`.
        """
        data: dict[str, Any] = {
            "matched": self.matched,
            "mu": None,
            "A": None,
            "b": None,
            "signature_distance": (
                self.signature_distance if math.isfinite(self.signature_distance) else None
            ),
            "residual": self.residual,
            "orientation": self.orientation.value if self.orientation is not None else None,
            "sigma0": self.sigma0,
        }
        if self.recovered is not None:
            data.update(self.recovered.to_dict())
        if self.alternate is not None:
            data["alternate"] = self.alternate
        return data

    def to_json(self) -> str:
        """Serialize with `to_dict`."""
        return json.dumps(self.to_dict())


def _overlap(a: ShapeSignature, b: ShapeSignature, offset: float) -> tuple[float, float]:
    sa = a.sigma[a.confident]
    sb = b.sigma[b.confident] - offset
    lo = max(float(sa[0]), float(sb[0]))
    hi = min(float(sa[-1]), float(sb[-1]))
    if not hi > lo:
        raise DisjointRangesError(
            f"Spherical parameter ranges [{sa[0]:.6g}, {sa[-1]:.6g}] and [{sb[0]:.6g}, {sb[-1]:.6g}] "
            "do not overlap"
        )
    return lo, hi


def signature_distance(a: ShapeSignature, b: ShapeSignature, offset: float = 0.0) -> float:
    """Return the sup-norm distance between two signatures.

    ``b`` is interpolated with a cubic spline onto the samples of ``a``
    where both are defined; samples near the curve ends are ignored.

    Parameters
    ----------
    a : `ShapeSignature`
        First signature.
    b : `ShapeSignature`
        Second signature.
    offset : `float`, optional
        Sample ``sigma`` of ``a`` is compared with ``sigma + offset`` of
        ``b``.

    Returns
    -------
    distance : `float`
        ``max |ktilde_i(a) - ktilde_i(b)|``; infinite if the tangents have
        different causal characters.

    Raises
    ------
    IncompatibleDimensionError
        Raised if the signatures come from spaces of different dimension.
    DisjointRangesError
        Raised if the spherical parameter ranges do not overlap.
    """
    if a.dim != b.dim:
        raise IncompatibleDimensionError(f"Cannot compare signatures in {a.dim}-space and {b.dim}-space")
    if a.causal != b.causal:
        return math.inf
    lo, hi = _overlap(a, b, offset)
    keep = a.confident & (a.sigma >= lo) & (a.sigma <= hi)
    if not np.any(keep):
        raise DisjointRangesError("No confident sample of the first signature in the common range")
    spline = CubicSpline(b.sigma[b.confident] - offset, b.ktilde[b.confident], axis=0)
    return float(np.max(np.abs(a.ktilde[keep] - spline(a.sigma[keep]))))


def _state_at(
    field: FrenetField, signature: ShapeSignature, sigma0: float
) -> tuple[np.ndarray, np.ndarray, float]:
    """Interpolate point, frame and first curvature at a spherical
    parameter.
    """
    keep = signature.confident
    sigma = signature.sigma[keep]
    n = field.dim
    point = CubicSpline(sigma, field.points[keep], axis=0)(sigma0)
    frame = CubicSpline(sigma, field.frames[keep].reshape(-1, n * n), axis=0)(sigma0).reshape(n, n)
    frame, _ = gram_schmidt(frame)
    kappa1 = float(CubicSpline(sigma, signature.kappa1[keep])(sigma0))
    return point, frame, kappa1


def recover_similarity(
    c1: SampledCurve,
    c2: SampledCurve,
    sigma0: float | None = None,
    *,
    offset: float = 0.0,
    threshold: float | None = None,
    residual_tol: float | None = None,
) -> MatchReport:
    """Recover the pseudo-similarity mapping one curve onto another.

    Both curves are put in correspondence by their spherical parameters.
    The map is fixed at one anchor: the scale is the ratio of first
    curvatures, the linear part sends the first Frenet frame onto the
    second and the translation matches the anchor points. It is then
    checked over the whole common range.

    Parameters
    ----------
    c1 : `SampledCurve`
        Source curve.
    c2 : `SampledCurve`
        Target curve.
    sigma0 : `float`, optional
        Anchor on the spherical parameter of ``c1``; the start of the
        common range if not given.
    offset : `float`, optional
        ``sigma`` on ``c1`` corresponds to ``sigma + offset`` on ``c2``.
    threshold : `float`, optional
        Largest signature distance accepted.
    residual_tol : `float`, optional
        Largest residual accepted.

    Returns
    -------
    report : `MatchReport`
        Report of a successful match.

    Raises
    ------
    NoMatchError
        Raised if the signatures differ or the frames are related by an
        orientation reversing map.
    ResidualTooLargeError
        Raised if the signatures agree but the recovered map does not
        carry one curve onto the other.
    """
    config = get_config()
    if threshold is None:
        threshold = config.match_threshold
    if residual_tol is None:
        residual_tol = config.residual_tol

    with time_this(log, msg="Recover similarity between %s and %s", args=(c1.label, c2.label)):
        field1 = frenet(c1)
        field2 = frenet(c2)
        sig1 = pshape(field1)
        sig2 = pshape(field2)

        distance = signature_distance(sig1, sig2, offset)
        if not distance <= threshold:
            raise NoMatchError(
                f"Signature distance {distance:.3g} exceeds threshold {threshold:.3g}", distance
            )

        lo, hi = _overlap(sig1, sig2, offset)
        if sigma0 is None:
            sigma0 = lo
        elif not lo <= sigma0 <= hi:
            raise DisjointRangesError(f"Anchor {sigma0} outside the common range [{lo:.6g}, {hi:.6g}]")

        p1, frame1, kappa1 = _state_at(field1, sig1, sigma0)
        p2, frame2, kappa2 = _state_at(field2, sig2, sigma0 + offset)
        mu = kappa1 / kappa2

        linear = np.linalg.solve(frame1, frame2).T
        try:
            columns, signs = gram_schmidt(linear.T)
        except LightlikeFrameVectorError as e:
            raise NoMatchError(f"Frames are not related by a Lorentz map: {e}", distance) from e
        if signs[0] > 0 or np.any(signs[1:] < 0):
            raise NoMatchError("Frames are not related by a Lorentz map", distance)
        linear = columns.T
        if np.linalg.det(linear) < 0:
            raise NoMatchError("Frames are related by an orientation reversing map", distance)

        f = PSimilarity(mu, linear, p2 - mu * linear @ p1)

        keep = sig1.confident & (sig1.sigma >= lo) & (sig1.sigma <= hi)
        target = CubicSpline(sig2.sigma, field2.points, axis=0)(sig1.sigma[keep] + offset)
        residual = float(np.max(np.linalg.norm(f.apply(field1.points[keep]) - target, axis=1)))

    if not residual <= residual_tol:
        raise ResidualTooLargeError(
            f"Signatures agree but the recovered map leaves a residual of {residual:.3g}"
        )

    alternate = None
    # -A is orientation reversing only in odd dimensions.
    if sig1.causal is CausalCharacter.TIMELIKE and sig1.dim % 2 == 1:
        alternate = {"mu": -f.mu, "A": (-f.A).tolist(), "b": f.b.tolist()}
    log.debug("Recovered similarity with scale %.12g and residual %.3g", mu, residual)
    return MatchReport(
        matched=True,
        recovered=f,
        signature_distance=distance,
        residual=residual,
        orientation=f.orientation,
        sigma0=float(sigma0),
        alternate=alternate,
    )


def match_curves(c1: SampledCurve, c2: SampledCurve, **kwargs: Any) -> MatchReport:
    """Compare two curves, reporting a mismatch instead of raising.

    Parameters
    ----------
    c1 : `SampledCurve`
        Source curve.
    c2 : `SampledCurve`
        Target curve.
    **kwargs : `~typing.Any`
        Passed to `recover_similarity`.

    Returns
    -------
    report : `MatchReport`
        ``matched`` is `False` if the curves have different invariants.
    """
    try:
        return recover_similarity(c1, c2, **kwargs)
    except NoMatchError as e:
        log.info("No match between %s and %s: %s", c1.label, c2.label, e)
        return MatchReport(matched=False, signature_distance=e.signature_distance)
