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

"""Frenet frames, curvatures and similarity invariants of non-null
curves.
"""

from __future__ import annotations

__all__ = (
    "FocalCurvatures",
    "FrenetField",
    "ShapeSignature",
    "SphericalParameter",
    "curvatures_from_focal",
    "focal_from_curvatures",
    "format_signature",
    "frenet",
    "pshape",
    "pshape_from_focal",
    "spherical_reparam",
    "structure_matrix",
    "structure_residual",
)

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import numpy.typing as npt
from numpy.polynomial.polynomial import polyvander
from scipy.integrate import cumulative_simpson
from scipy.linalg import null_space

from lsst.utils.timer import time_this

from ._exceptions import (
    DegenerateJetError,
    LightlikeFrameVectorError,
    VanishingCurvatureError,
    VanishingFocalError,
)
from .config import get_config
from .curve import SampledCurve, _tangent_speed, derivative_jet
from .minkowski import CausalCharacter, inner_many, metric, pseudo_orthonormality_residual

log = logging.getLogger(__name__)

# Samples on either side of a point used by _local_derivative.
_LOCAL_HALF_WIDTH = 2


@dataclass(frozen=True, eq=False)
class FrenetField:
    """Frenet frames and curvatures along a sampled curve.

    Attributes
    ----------
    params : `numpy.ndarray`
        Curve parameter at each sample, shape ``(m,)``.
    points : `numpy.ndarray`
        Curve points, shape ``(m, n)``.
    frames : `numpy.ndarray`
        Frames of shape ``(m, n, n)``; ``frames[k, i]`` is ``e_{i+1}`` at
        sample ``k``.
    signs : `numpy.ndarray`
        ``e_i . e_i`` for each frame vector, shape ``(n,)``.
    curvatures : `numpy.ndarray`
        ``kappa_1 ... kappa_{n-1}``, shape ``(m, n - 1)``.
    arc_length : `numpy.ndarray`
        Arc length from the first sample.
    speed : `numpy.ndarray`
        Lorentzian speed ``|d alpha / dt|``.
    kappa1_rate : `numpy.ndarray`
        Arc length derivative of ``kappa_1``, from the third derivative of
        the curve.
    low_confidence : `numpy.ndarray`
        Samples computed with one-sided stencils.
    flat_from : `int` or `None`
        Derivative order at which the jet stopped growing, if the frame had
        to be completed by a constant complement.
    """

    params: np.ndarray
    points: np.ndarray
    frames: np.ndarray
    signs: np.ndarray
    curvatures: np.ndarray
    arc_length: np.ndarray
    speed: np.ndarray
    kappa1_rate: np.ndarray
    low_confidence: np.ndarray
    flat_from: int | None = None

    @property
    def dim(self) -> int:
        """Dimension of the ambient space (`int`)."""
        return self.frames.shape[-1]

    @property
    def causal(self) -> CausalCharacter:
        """Causal character of the tangent (`CausalCharacter`)."""
        return CausalCharacter.TIMELIKE if self.signs[0] < 0 else CausalCharacter.SPACELIKE

    def orthonormality_residual(self) -> float:
        """Return the largest deviation of ``e_i . e_j`` from
        ``eps_i delta_ij``.
        """
        return pseudo_orthonormality_residual(self.frames, self.signs)


@dataclass(frozen=True, eq=False)
class ShapeSignature:
    """Similarity invariants of a curve sampled along the spherical
    parameter.

    Attributes
    ----------
    sigma : `numpy.ndarray`
        Spherical arc length, strictly increasing.
    ktilde : `numpy.ndarray`
        ``ktilde_1 ... ktilde_{n-1}``, shape ``(m, n - 1)``.
    dim : `int`
        Dimension of the ambient space.
    causal : `CausalCharacter`
        Causal character of the tangent.
    low_confidence : `numpy.ndarray`
        Samples to leave out of comparisons.
    kappa1 : `numpy.ndarray`
        First curvature at each sample; not an invariant but needed to
        recover the scale of a similarity.
    """

    sigma: np.ndarray
    ktilde: np.ndarray
    dim: int
    causal: CausalCharacter
    low_confidence: np.ndarray
    kappa1: np.ndarray

    @property
    def confident(self) -> np.ndarray:
        """Mask of samples away from the curve ends (`numpy.ndarray`)."""
        return ~self.low_confidence


class SphericalParameter(NamedTuple):
    """Result of `spherical_reparam`."""

    sigma: np.ndarray
    """Spherical arc length at each sample."""

    tangent: np.ndarray
    """``d alpha / d sigma = e_1 / kappa_1`` at each sample."""


@dataclass(frozen=True, eq=False)
class FocalCurvatures:
    """Focal curvatures ``m_1 ... m_{n-1}`` and the focal curve.

    Attributes
    ----------
    arc_length : `numpy.ndarray`
        Arc length of the original curve at each sample.
    focal : `numpy.ndarray`
        Focal curvatures, shape ``(m, n - 1)``; NaN from the first one the
        recursion could not determine.
    gamma : `numpy.ndarray`
        Focal curve ``alpha + m_1 e_2 + ... + m_{n-1} e_n`` over the
        determined focal curvatures.
    signs : `numpy.ndarray`
        Frame signs of the original curve.
    low_confidence : `numpy.ndarray`
        Samples computed with one-sided stencils.
    """

    arc_length: np.ndarray
    focal: np.ndarray
    gamma: np.ndarray
    signs: np.ndarray
    low_confidence: np.ndarray

    @property
    def determined(self) -> int:
        """Number of focal curvatures the recursion determined (`int`)."""
        return int(np.count_nonzero(np.all(np.isfinite(self.focal), axis=0)))


def _local_derivative(x: np.ndarray, y: npt.ArrayLike) -> np.ndarray:
    """Differentiate tabulated values on an arbitrary increasing grid.

    A degree four polynomial is fitted through the five nearest samples
    of each point and differentiated there.

    Parameters
    ----------
    x : `numpy.ndarray`
        Increasing abscissae, shape ``(m,)``.
    y : array-like
        Values of shape ``(m,)`` or ``(m, k)``.

    Returns
    -------
    dy : `numpy.ndarray`
        Derivative with the shape of ``y``.
    """
    values = np.asarray(y, dtype=float)
    m = x.size
    width = 2 * _LOCAL_HALF_WIDTH + 1
    start = np.clip(np.arange(m) - _LOCAL_HALF_WIDTH, 0, m - width)
    index = start[:, np.newaxis] + np.arange(width)
    offsets = x[index] - x[:, np.newaxis]
    scale = np.max(np.abs(offsets), axis=1)
    vander = polyvander(offsets / scale[:, np.newaxis], width - 1)
    rhs = values[index]
    if values.ndim == 1:
        coeffs = np.linalg.solve(vander, rhs[..., np.newaxis])[..., 0]
        return coeffs[:, 1] / scale
    coeffs = np.linalg.solve(vander, rhs)
    return coeffs[:, 1] / scale[:, np.newaxis]


def _complete_frame(
    frames: list[np.ndarray], signs: list[float], order: int
) -> tuple[list[np.ndarray], list[float]]:
    """Complete a frame with a constant pseudo-orthonormal complement.

    Used when the curve lies in an affine subspace so that derivatives of
    ``order`` and above add no new directions.
    """
    n = frames[0].shape[1]
    m = frames[0].shape[0]
    g = metric(n)
    mid = m // 2
    rows = np.stack([e[mid] for e in frames])
    basis = null_space(rows @ g)
    restricted = basis.T @ g @ basis
    eigenvalues, eigenvectors = np.linalg.eigh(restricted)
    complement = (basis @ eigenvectors) / np.sqrt(np.abs(eigenvalues))
    for k in range(complement.shape[1]):
        w = complement[:, k]
        drift = max(float(np.max(np.abs(inner_many(e, w)))) for e in frames)
        if drift > get_config().degeneracy_tol:
            raise DegenerateJetError(
                f"Derivatives of order {order} vanish but the curve does not lie in a fixed subspace"
            )
        frames.append(np.broadcast_to(w, (m, n)).copy())
        signs.append(float(np.sign(eigenvalues[k])))
    return frames, signs


def frenet(c: SampledCurve) -> FrenetField:
    """Compute the Frenet frame and curvatures of a non-null curve.

    Frames come from Gram-Schmidt orthonormalization of the derivatives
    ``alpha', ..., alpha^(n)`` with respect to the Lorentzian metric. The
    frame vectors are then signed so that ``kappa_j > 0`` for
    ``j <= n - 2`` and, for ``n >= 3``, the frame has determinant +1. In
    the plane the sign of ``e_2`` is chosen to make ``kappa_1`` positive.

    Parameters
    ----------
    c : `SampledCurve`
        Curve to analyze.

    Returns
    -------
    field : `FrenetField`
        Frames and curvatures at every sample of the (possibly resampled)
        uniform grid.

    Raises
    ------
    LightlikeTangentError
        Raised if the tangent is lightlike somewhere.
    DegenerateJetError
        Raised if the derivatives lose linear independence.
    LightlikeFrameVectorError
        Raised if a Gram-Schmidt residual is lightlike.
    """
    config = get_config()
    n = c.dim
    with time_this(log, msg="Frenet frames of %s", args=(c.label or "curve",)):
        # The third derivative also gives the rate of change of kappa_1.
        jet = derivative_jet(c, max(n, 3))
        speed, _ = _tangent_speed(jet[1], config.lightlike_tol)
        span = float(jet.params[-1] - jet.params[0])
        tangent_size = np.linalg.norm(jet[1], axis=1)

        unit: list[np.ndarray] = []
        signs: list[float] = []
        rho: list[np.ndarray] = []
        flat_from: int | None = None
        for j in range(n):
            d = jet[j + 1]
            r = d.copy()
            for i in range(j):
                r -= (inner_many(r, unit[i]) * signs[i])[:, np.newaxis] * unit[i]
            size = np.linalg.norm(r, axis=1)
            reference = np.maximum(np.linalg.norm(d, axis=1), tangent_size / span**j)
            degenerate = size <= config.degeneracy_tol * reference
            if np.all(degenerate):
                if j < 2:
                    raise DegenerateJetError(f"Derivative of order {j + 1} depends on the lower ones")
                flat_from = j + 1
                break
            if np.any(degenerate):
                index = int(np.argmax(degenerate))
                raise DegenerateJetError(
                    f"Derivative of order {j + 1} depends on the lower ones at sample {index}"
                )
            q = inner_many(r, r)
            if np.any(np.abs(q) <= config.lightlike_tol * size**2):
                raise LightlikeFrameVectorError(f"Frame vector {j + 1} is lightlike")
            sign = np.sign(q)
            if np.any(sign != sign[0]):
                raise LightlikeFrameVectorError(f"Frame vector {j + 1} changes causal character")
            rho.append(np.sqrt(np.abs(q)))
            unit.append(r / rho[-1][:, np.newaxis])
            signs.append(float(sign[0]))

        if flat_from is not None:
            log.warning(
                "Derivatives of %s stop growing at order %d; completing the frame with a constant complement",
                c.label or "curve",
                flat_from,
            )
            unit, signs = _complete_frame(unit, signs, flat_from)

        eps = np.array(signs)
        m = jet.params.size
        flips = np.ones((m, n))
        for j in range(1, n):
            if j <= max(n - 2, 1):
                flips[:, j] = eps[j] * flips[:, j - 1]
        frames = np.stack(unit, axis=1) * flips[:, :, np.newaxis]
        if n >= 3:
            orientation = np.sign(np.linalg.det(frames))
            flips[:, n - 1] *= orientation
            frames[:, n - 1] *= orientation[:, np.newaxis]

        curvatures = np.zeros((m, n - 1))
        for j in range(n - 1):
            if j + 1 >= len(rho):
                break
            curvatures[:, j] = (
                flips[:, j] * flips[:, j + 1] * eps[j + 1] * rho[j + 1] / (speed * rho[j])
            )

        # kappa_1 = rho_2 / v**2, and alpha''' . e_2 = 3 v v' kappa_1 + v**2 kappa_1'.
        dspeed = eps[0] * inner_many(jet[2], frames[:, 0])
        kappa1 = curvatures[:, 0]
        kappa1_rate = (inner_many(jet[3], frames[:, 1]) - 3.0 * speed * dspeed * kappa1) / speed**3

        s = cumulative_simpson(speed, x=jet.params, initial=0.0)

    log.debug("Frenet field of %d samples in %d dimensions, signs %s", m, n, eps.tolist())
    return FrenetField(
        params=jet.params,
        points=jet.points,
        frames=frames,
        signs=eps,
        curvatures=curvatures,
        arc_length=s,
        speed=speed,
        kappa1_rate=kappa1_rate,
        low_confidence=jet.low_confidence,
        flat_from=flat_from,
    )


def spherical_reparam(
    field: FrenetField, kappa_min: float | None = None, origin: float = 0.0
) -> SphericalParameter:
    """Compute the spherical arc length ``sigma = int kappa_1 ds``.

    Parameters
    ----------
    field : `FrenetField`
        Frenet field of the curve.
    kappa_min : `float`, optional
        Smallest allowed value of ``kappa_1`` times the total arc length.
    origin : `float`, optional
        Value of ``sigma`` at the first sample.

    Returns
    -------
    result : `SphericalParameter`
        ``sigma`` and ``d alpha / d sigma`` at every sample.

    Raises
    ------
    VanishingCurvatureError
        Raised if the first curvature is too small somewhere.
    """
    if kappa_min is None:
        kappa_min = get_config().kappa_min
    kappa1 = field.curvatures[:, 0]
    length = float(field.arc_length[-1])
    if np.any(kappa1 * length <= kappa_min):
        index = int(np.argmax(kappa1 * length <= kappa_min))
        raise VanishingCurvatureError(f"First curvature vanishes at sample {index}")
    sigma = origin + cumulative_simpson(kappa1 * field.speed, x=field.params, initial=0.0)
    return SphericalParameter(sigma, field.frames[:, 0] / kappa1[:, np.newaxis])


def pshape(field: FrenetField, kappa_min: float | None = None, origin: float = 0.0) -> ShapeSignature:
    """Compute the p-shape curvatures of a curve.

    ``ktilde_1 = -(1 / kappa_1) d kappa_1 / d sigma`` and
    ``ktilde_i = kappa_i / kappa_1`` for ``i >= 2``. The rate of change of
    ``kappa_1`` comes from the derivative jet of the curve, so ``ktilde_1``
    is as reliable as the other invariants at every confident sample.

    Parameters
    ----------
    field : `FrenetField`
        Frenet field of the curve.
    kappa_min : `float`, optional
        Passed to `spherical_reparam`.
    origin : `float`, optional
        Value of ``sigma`` at the first sample.

    Returns
    -------
    signature : `ShapeSignature`
        Invariants on the spherical parameter grid.
    """
    sigma, _ = spherical_reparam(field, kappa_min, origin)
    kappa1 = field.curvatures[:, 0]
    ktilde = np.empty_like(field.curvatures)
    # d sigma = kappa_1 ds.
    ktilde[:, 0] = -field.kappa1_rate / kappa1**2
    ktilde[:, 1:] = field.curvatures[:, 1:] / kappa1[:, np.newaxis]
    return ShapeSignature(
        sigma=sigma,
        ktilde=ktilde,
        dim=field.dim,
        causal=field.causal,
        low_confidence=field.low_confidence,
        kappa1=kappa1,
    )


def _widened(mask: np.ndarray, samples: int) -> np.ndarray:
    """Extend a low-confidence mask by ``samples`` on either side of every
    flagged sample.
    """
    if samples == 0:
        return mask
    return np.convolve(mask.astype(float), np.ones(2 * samples + 1), mode="same") > 0


def structure_matrix(signs: npt.ArrayLike, c: npt.ArrayLike) -> np.ndarray:
    """Build the band matrix of the frame equation in the spherical
    parameter.

    ``d e_i / d sigma = eps_{i+1} c_i e_{i+1} - eps_{i-1} c_{i-1} e_{i-1}``
    with ``c_1 = 1`` and ``c_i = ktilde_i`` for ``i >= 2``.

    Parameters
    ----------
    signs : array-like
        Frame signs ``eps_1 ... eps_n``.
    c : array-like
        Coefficients ``c_1 ... c_{n-1}``, shape ``(n - 1,)`` or
        ``(..., n - 1)`` for a batch.

    Returns
    -------
    M : `numpy.ndarray`
        Matrix of shape ``(..., n, n)`` acting on frames stored as rows.
    """
    eps = np.asarray(signs, dtype=float)
    coeffs = np.asarray(c, dtype=float)
    n = eps.size
    matrix = np.zeros(coeffs.shape[:-1] + (n, n))
    for i in range(n - 1):
        matrix[..., i, i + 1] = eps[i + 1] * coeffs[..., i]
        matrix[..., i + 1, i] = -eps[i] * coeffs[..., i]
    return matrix


def structure_residual(field: FrenetField, signature: ShapeSignature) -> float:
    """Check the frame equation of the scaled frame ``e_i / kappa_1``.

    Parameters
    ----------
    field : `FrenetField`
        Frenet field of the curve.
    signature : `ShapeSignature`
        Its p-shape signature.

    Returns
    -------
    residual : `float`
        Largest deviation, over samples away from the curve ends, between
        ``d/dsigma (e / kappa_1)`` and ``(ktilde_1 I + M)(e / kappa_1)``.
    """
    m, n = field.frames.shape[:2]
    scaled = field.frames / signature.kappa1[:, np.newaxis, np.newaxis]
    lhs = _local_derivative(signature.sigma, scaled.reshape(m, n * n)).reshape(m, n, n)
    c = np.column_stack([np.ones(m), signature.ktilde[:, 1:]])
    rhs = signature.ktilde[:, 0, np.newaxis, np.newaxis] * scaled + structure_matrix(field.signs, c) @ scaled
    keep = ~_widened(signature.low_confidence, _LOCAL_HALF_WIDTH)
    return float(np.max(np.abs(lhs - rhs)[keep]))


def _focal_sums(s: np.ndarray, focal: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """Return ``S_i = sum_{l < i} eps_{l+1} m_l m_l'`` for every i."""
    derivs = _local_derivative(s, focal)
    terms = signs[1 : focal.shape[1] + 1] * focal * derivs
    return np.cumsum(terms, axis=1)


def _usable(focal: FocalCurvatures, focal_tol: float) -> np.ndarray:
    """Return, per focal curvature, whether it is determined and bounded
    away from zero at every sample.
    """
    scale = float(np.max(np.abs(focal.focal[:, 0])))
    # NaN compares false, so undetermined columns are never usable.
    return np.all(np.abs(focal.focal) >= focal_tol * scale, axis=0)


def focal_from_curvatures(field: FrenetField, focal_tol: float | None = None) -> FocalCurvatures:
    """Compute the focal curvatures and the focal curve.

    ``m_1 = eps_1 / kappa_1`` and ``kappa_i m_{i-1} m_i = S_i`` where
    ``S_i = eps_2 m_1 m_1' + ... + eps_i m_{i-1} m_{i-1}'`` with primes
    denoting derivatives in arc length.

    The recursion stops at the first ``m_i`` it cannot solve for, either
    because ``kappa_i`` vanishes or because ``m_{i-1}`` does; that focal
    curvature and all later ones are left undetermined (NaN) and the
    focal curve uses the determined ones only.

    Parameters
    ----------
    field : `FrenetField`
        Frenet field of the curve.
    focal_tol : `float`, optional
        Size below which a focal curvature counts as vanishing, relative
        to ``max |m_1|``.

    Returns
    -------
    focal : `FocalCurvatures`
        Focal curvatures and focal curve.

    Raises
    ------
    VanishingCurvatureError
        Raised if the first curvature vanishes.
    """
    config = get_config()
    if focal_tol is None:
        focal_tol = config.focal_tol
    m, n = field.frames.shape[:2]
    length = float(field.arc_length[-1])
    vanishing = np.any(np.abs(field.curvatures) * length <= config.kappa_min, axis=0)
    if vanishing[0]:
        raise VanishingCurvatureError("Focal curvatures need a non-zero first curvature")

    s = field.arc_length
    focal = np.full((m, n - 1), np.nan)
    focal[:, 0] = field.signs[0] / field.curvatures[:, 0]
    scale = float(np.max(np.abs(focal[:, 0])))
    for i in range(1, n - 1):
        previous = focal[:, i - 1]
        if vanishing[i] or np.any(np.abs(previous) < focal_tol * scale):
            log.info("Focal curvatures m_%d to m_%d are undetermined", i + 1, n - 1)
            break
        total = _focal_sums(s, focal[:, :i], field.signs)[:, -1]
        focal[:, i] = total / (field.curvatures[:, i] * previous)

    depth = int(np.count_nonzero(np.all(np.isfinite(focal), axis=0)))
    gamma = field.points + np.einsum("mi,min->mn", focal[:, :depth], field.frames[:, 1 : depth + 1])
    # Every level of the recursion differentiates the previous one.
    low = _widened(field.low_confidence, _LOCAL_HALF_WIDTH * max(1, n - 2))
    return FocalCurvatures(s, focal, gamma, field.signs, low)


def curvatures_from_focal(focal: FocalCurvatures, focal_tol: float | None = None) -> np.ndarray:
    """Recover the curvatures from focal curvatures.

    Parameters
    ----------
    focal : `FocalCurvatures`
        Output of `focal_from_curvatures`.
    focal_tol : `float`, optional
        Size below which a focal curvature counts as vanishing, relative
        to ``max |m_1|``.

    Returns
    -------
    curvatures : `numpy.ndarray`
        ``kappa_1 ... kappa_{n-1}``, shape ``(m, n - 1)``; NaN where
        ``kappa_i`` would divide by an undetermined or vanishing focal
        curvature.
    """
    if focal_tol is None:
        focal_tol = get_config().focal_tol
    values = focal.focal
    curvatures = np.full_like(values, np.nan)
    curvatures[:, 0] = focal.signs[0] / values[:, 0]
    usable = _usable(focal, focal_tol)
    depth = focal.determined
    if depth > 1:
        sums = _focal_sums(focal.arc_length, values[:, : depth - 1], focal.signs)
        for i in range(1, depth):
            if usable[i - 1] and usable[i]:
                curvatures[:, i] = sums[:, i - 1] / (values[:, i - 1] * values[:, i])
    return curvatures


def pshape_from_focal(
    focal: FocalCurvatures,
    field: FrenetField,
    focal_tol: float | None = None,
    origin: float = 0.0,
    strict: bool = False,
) -> ShapeSignature:
    """Compute the p-shape curvatures from focal curvatures.

    ``ktilde_1 = eps_1 m_1'`` and
    ``ktilde_i = eps_1 m_1 S_i / (m_{i-1} m_i)``. An invariant that would
    divide by an undetermined or vanishing focal curvature is NaN.

    Parameters
    ----------
    focal : `FocalCurvatures`
        Output of `focal_from_curvatures`.
    field : `FrenetField`
        Frenet field the focal curvatures were computed from.
    focal_tol : `float`, optional
        Size below which a focal curvature counts as vanishing, relative
        to ``max |m_1|``.
    origin : `float`, optional
        Value of ``sigma`` at the first sample.
    strict : `bool`, optional
        Raise instead of returning undetermined invariants.

    Returns
    -------
    signature : `ShapeSignature`
        Invariants on the spherical parameter grid.

    Raises
    ------
    VanishingFocalError
        Raised in strict mode if an invariant is undetermined.
    """
    if focal_tol is None:
        focal_tol = get_config().focal_tol
    values = focal.focal
    sigma, _ = spherical_reparam(field, origin=origin)
    eps1 = focal.signs[0]
    ktilde = np.full_like(values, np.nan)
    ktilde[:, 0] = eps1 * _local_derivative(focal.arc_length, values[:, 0])
    usable = _usable(focal, focal_tol)
    depth = focal.determined
    if depth > 1:
        sums = _focal_sums(focal.arc_length, values[:, : depth - 1], focal.signs)
        for i in range(1, depth):
            if usable[i - 1] and usable[i]:
                ktilde[:, i] = eps1 * values[:, 0] * sums[:, i - 1] / (values[:, i - 1] * values[:, i])
    missing = np.flatnonzero(np.isnan(ktilde).any(axis=0))
    if missing.size:
        if strict:
            raise VanishingFocalError(
                f"Focal curvatures vanish; ktilde_{missing[0] + 1} and above are undetermined"
            )
        log.info("Invariants %s are undetermined by the focal curvatures", (missing + 1).tolist())
    return ShapeSignature(
        sigma=sigma,
        ktilde=ktilde,
        dim=field.dim,
        causal=field.causal,
        low_confidence=focal.low_confidence,
        kappa1=field.curvatures[:, 0],
    )


def format_signature(signature: ShapeSignature, curvatures: np.ndarray | None = None) -> bytes:
    """Serialize a signature as CSV.

    Parameters
    ----------
    signature : `ShapeSignature`
        Signature to write.
    curvatures : `numpy.ndarray`, optional
        Curvatures ``kappa_1 ... kappa_{n-1}`` of the same samples, written
        between ``sigma`` and the invariants when given.

    Returns
    -------
    data : `bytes`
        CSV with header ``sigma,[kappa1,...,]ktilde1,...,ktilde{n-1}``.
    """
    count = signature.ktilde.shape[1]
    names = ["sigma"]
    table = [signature.sigma[:, np.newaxis]]
    if curvatures is not None:
        names += [f"kappa{i + 1}" for i in range(count)]
        table.append(np.asarray(curvatures, dtype=float).reshape(-1, count))
    names += [f"ktilde{i + 1}" for i in range(count)]
    table.append(signature.ktilde)
    lines = [",".join(names)]
    for row in np.hstack(table):
        lines.append(",".join(repr(float(v)) for v in row))
    return ("\n".join(lines) + "\n").encode()
