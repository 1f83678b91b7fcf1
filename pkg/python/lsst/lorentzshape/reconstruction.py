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

"""Build curves with prescribed p-shape curvatures."""

from __future__ import annotations

__all__ = (
    "IntegratedFrame",
    "Reconstruction",
    "ReconstructionSpec",
    "RoundTripReport",
    "ZFunction",
    "constant_z",
    "example1_spec",
    "example2_spec",
    "integrate_frame",
    "reciprocal_z",
    "reconstruct",
    "reconstruct_curve",
    "round_trip",
    "tabulated_z",
)

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np
import numpy.typing as npt
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from lsst.utils.timer import time_this

from ._exceptions import (
    DimensionMismatchError,
    FrameDriftError,
    InfeasibleParametersError,
    InvalidFrameError,
    LightlikeFrameVectorError,
    NonFiniteError,
)
from .config import get_config
from .curve import SampledCurve
from .frenet import frenet, pshape, structure_matrix
from .minkowski import gram_schmidt, metric, pseudo_orthonormality_residual

log = logging.getLogger(__name__)

ZFunction = Callable[[np.ndarray], np.ndarray]
"""A prescribed p-shape curvature as a vectorized function of sigma."""


def constant_z(value: float) -> ZFunction:
    """Return the constant function ``value``."""
    value = float(value)

    def z(sigma: np.ndarray) -> np.ndarray:
        return np.full_like(sigma, value, dtype=float)

    return z


def reciprocal_z(scale: float = 1.0) -> ZFunction:
    """Return ``scale / sigma``."""
    scale = float(scale)

    def z(sigma: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return scale / np.asarray(sigma, dtype=float)

    return z


def tabulated_z(sigma: npt.ArrayLike, values: npt.ArrayLike) -> ZFunction:
    """Interpolate tabulated values with a cubic spline.

    Parameters
    ----------
    sigma : array-like
        Strictly increasing abscissae.
    values : array-like
        Function values.

    Returns
    -------
    z : `ZFunction`
        The spline. Evaluation outside the table extrapolates.
    """
    spline = CubicSpline(np.asarray(sigma, dtype=float), np.asarray(values, dtype=float))

    def z(s: np.ndarray) -> np.ndarray:
        return spline(s)

    return z


@dataclass(frozen=True, eq=False)
class ReconstructionSpec:
    """Inputs of a reconstruction.

    Parameters
    ----------
    z : `tuple` [`ZFunction`, ...]
        Target p-shape curvatures ``z_1 ... z_{n-1}``.
    x0 : `numpy.ndarray`
        Initial point.
    frame : `numpy.ndarray`
        Initial pseudo-orthonormal frame with the vectors as rows.
    sigma_start : `float`
        Initial spherical parameter.
    sigma_stop : `float`
        Final spherical parameter.
    step : `float`, optional
        Integrator step; the configured default if not given.
    kappa0 : `float`, optional
        First curvature at ``sigma_start``. Fixes the scale of the result.
    frame_tol : `float`, optional
        Tolerance on the pseudo-orthonormality of ``frame``.
    """

    z: tuple[ZFunction, ...]
    x0: np.ndarray
    frame: np.ndarray
    sigma_start: float
    sigma_stop: float
    step: float | None = None
    kappa0: float = 1.0
    frame_tol: float = 1e-10
    signs: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        frame = np.array(self.frame, dtype=float)
        x0 = np.array(self.x0, dtype=float)
        if frame.ndim != 2 or frame.shape[0] != frame.shape[1] or frame.shape[0] < 2:
            raise DimensionMismatchError(
                f"Initial frame must be a square matrix of size >= 2, got {frame.shape}"
            )
        n = frame.shape[0]
        if x0.shape != (n,):
            raise DimensionMismatchError(f"Initial point must have {n} components, got shape {x0.shape}")
        if len(self.z) != n - 1:
            raise DimensionMismatchError(f"Need {n - 1} curvature functions in {n}-space, got {len(self.z)}")
        gram = frame @ metric(n) @ frame.T
        signs = np.sign(np.diag(gram))
        residual = pseudo_orthonormality_residual(frame, signs)
        if not residual <= self.frame_tol:
            raise InvalidFrameError(f"Initial frame is not pseudo-orthonormal (residual {residual:.3g})")
        if np.count_nonzero(signs < 0) != 1:
            raise InvalidFrameError("Initial frame must contain exactly one timelike vector")

        step = get_config().step if self.step is None else float(self.step)
        if not (math.isfinite(step) and step > 0):
            raise InfeasibleParametersError(f"Integrator step must be positive, got {step}")
        start, stop = float(self.sigma_start), float(self.sigma_stop)
        if not (math.isfinite(start) and math.isfinite(stop) and stop > start):
            raise InfeasibleParametersError(f"Invalid sigma range [{start}, {stop}]")
        if not (math.isfinite(self.kappa0) and self.kappa0 > 0):
            raise InfeasibleParametersError(f"Initial curvature must be positive, got {self.kappa0}")

        frame.flags.writeable = False
        x0.flags.writeable = False
        signs.flags.writeable = False
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "z", tuple(self.z))
        object.__setattr__(self, "step", step)
        object.__setattr__(self, "sigma_start", start)
        object.__setattr__(self, "sigma_stop", stop)
        object.__setattr__(self, "kappa0", float(self.kappa0))
        object.__setattr__(self, "signs", signs)

    @property
    def dim(self) -> int:
        """Dimension of the ambient space (`int`)."""
        return self.frame.shape[0]

    def grid(self) -> np.ndarray:
        """Return the sigma grid, with the step shrunk to end on
        ``sigma_stop``.
        """
        assert self.step is not None
        count = max(math.ceil((self.sigma_stop - self.sigma_start) / self.step - 1e-9), 1)
        return np.linspace(self.sigma_start, self.sigma_stop, count + 1)


@dataclass(frozen=True, eq=False)
class IntegratedFrame:
    """Frenet frames along the spherical parameter.

    This is the counterpart of `~lsst.lorentzshape.frenet.FrenetField` for
    a curve known only through its invariants.

    Attributes
    ----------
    sigma : `numpy.ndarray`
        Integration grid.
    frames : `numpy.ndarray`
        Frames of shape ``(m, n, n)`` with the vectors as rows.
    signs : `numpy.ndarray`
        Frame signs.
    drift : `numpy.ndarray`
        Pseudo-orthonormality residual of each step before correction.
    residual : `numpy.ndarray`
        Residual after correction.
    """

    sigma: np.ndarray
    frames: np.ndarray
    signs: np.ndarray
    drift: np.ndarray
    residual: np.ndarray


class Reconstruction(NamedTuple):
    """Result of `reconstruct`."""

    curve: SampledCurve
    frame: IntegratedFrame


def _evaluate(z: ZFunction, sigma: np.ndarray) -> np.ndarray:
    values = np.asarray(z(sigma), dtype=float)
    if values.shape != sigma.shape:
        values = np.broadcast_to(values, sigma.shape)
    if not np.all(np.isfinite(values)):
        index = int(np.argmax(~np.isfinite(values)))
        raise NonFiniteError(f"Curvature function is not finite at sigma={sigma[index]}")
    return values


def _matrices(spec: ReconstructionSpec, sigma: np.ndarray) -> np.ndarray:
    c = np.column_stack([np.ones_like(sigma)] + [_evaluate(z, sigma) for z in spec.z[1:]])
    return structure_matrix(spec.signs, c)


def integrate_frame(spec: ReconstructionSpec) -> IntegratedFrame:
    """Integrate the frame equation ``dW/dsigma = M(sigma) W``.

    Uses classical fourth order Runge-Kutta with a fixed step. After every
    step the frame is pseudo-orthonormalized again by Gram-Schmidt in the
    order ``e_1 ... e_n``.

    Parameters
    ----------
    spec : `ReconstructionSpec`
        Reconstruction inputs.

    Returns
    -------
    frame : `IntegratedFrame`
        Frames on the integration grid.

    Raises
    ------
    NonFiniteError
        Raised if a curvature function is not finite on the grid.
    FrameDriftError
        Raised if the frame cannot be corrected.
    """
    sigma = spec.grid()
    h = np.diff(sigma)
    m_node = _matrices(spec, sigma)
    m_mid = _matrices(spec, sigma[:-1] + 0.5 * h)
    n = spec.dim

    frames = np.empty((sigma.size, n, n))
    drift = np.zeros(sigma.size)
    residual = np.zeros(sigma.size)
    frames[0] = spec.frame
    residual[0] = pseudo_orthonormality_residual(spec.frame, spec.signs)
    w = spec.frame
    with time_this(log, msg="Integrated frame over %d steps", args=(h.size,)):
        for k, step in enumerate(h):
            k1 = m_node[k] @ w
            k2 = m_mid[k] @ (w + 0.5 * step * k1)
            k3 = m_mid[k] @ (w + 0.5 * step * k2)
            k4 = m_node[k + 1] @ (w + step * k3)
            w = w + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            drift[k + 1] = pseudo_orthonormality_residual(w, spec.signs)
            try:
                w, signs = gram_schmidt(w)
            except LightlikeFrameVectorError as e:
                raise FrameDriftError(f"Frame degenerated at sigma={sigma[k + 1]}: {e}") from e
            if not np.array_equal(signs, spec.signs):
                raise FrameDriftError(f"Frame changed signature at sigma={sigma[k + 1]}")
            frames[k + 1] = w
            residual[k + 1] = pseudo_orthonormality_residual(w, spec.signs)

    log.debug(
        "Frame integration: max drift %.3g, max residual %.3g", float(drift.max()), float(residual.max())
    )
    return IntegratedFrame(sigma, frames, spec.signs.copy(), drift, residual)


def reconstruct_curve(spec: ReconstructionSpec, integrated: IntegratedFrame | None = None) -> SampledCurve:
    """Build the curve realizing the prescribed invariants.

    ``kappa_1 = kappa0 exp(-int z_1)`` and ``alpha = x0 + int e_1 / kappa_1``,
    both integrals by cumulative Simpson quadrature on the sigma grid.

    Parameters
    ----------
    spec : `ReconstructionSpec`
        Reconstruction inputs.
    integrated : `IntegratedFrame`, optional
        Result of `integrate_frame` for ``spec``, computed if not given.

    Returns
    -------
    curve : `SampledCurve`
        Curve parametrized by its spherical arc length.
    """
    if integrated is None:
        integrated = integrate_frame(spec)
    sigma = integrated.sigma
    exponent = cumulative_simpson(_evaluate(spec.z[0], sigma), x=sigma, initial=0.0)
    kappa1 = spec.kappa0 * np.exp(-exponent)
    tangent = integrated.frames[:, 0] / kappa1[:, np.newaxis]
    points = spec.x0 + cumulative_simpson(tangent, x=sigma, axis=0, initial=0.0)
    return SampledCurve(sigma, points, "reconstruction")


def reconstruct(spec: ReconstructionSpec) -> Reconstruction:
    """Integrate the frame and build the curve."""
    integrated = integrate_frame(spec)
    return Reconstruction(reconstruct_curve(spec, integrated), integrated)


@dataclass(frozen=True)
class RoundTripReport:
    """Result of `round_trip`."""

    max_deviation: float
    """Largest Euclidean distance between original and rebuilt points."""

    tolerance: float
    """Threshold the deviation was compared with."""

    sigma_range: tuple[float, float]
    """Range of the spherical parameter that was rebuilt."""

    max_residual: float
    """Largest frame residual after correction."""

    @property
    def passed(self) -> bool:
        """Whether the deviation is within tolerance (`bool`)."""
        return self.max_deviation <= self.tolerance

    def to_dict(self) -> dict[str, Any]:
        """Return the report as plain Python types."""
        return {
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "sigma_range": list(self.sigma_range),
            "max_residual": self.max_residual,
            "passed": self.passed,
        }


def round_trip(c: SampledCurve, step: float | None = None, tolerance: float = 1e-5) -> RoundTripReport:
    """Rebuild a curve from its own invariants and compare.

    The invariants are taken from the samples away from the curve ends and
    interpolated with cubic splines. The initial point, frame and first
    curvature are those of the first such sample.

    Parameters
    ----------
    c : `SampledCurve`
        Curve to test.
    step : `float`, optional
        Integrator step.
    tolerance : `float`, optional
        Deviation below which the round trip passes.

    Returns
    -------
    report : `RoundTripReport`
        Deviation statistics.
    """
    frenet_field = frenet(c)
    signature = pshape(frenet_field)
    keep = np.flatnonzero(signature.confident)
    first = keep[0]
    sigma = signature.sigma[keep]
    frame, _ = gram_schmidt(frenet_field.frames[first])
    z = tuple(tabulated_z(sigma, signature.ktilde[keep, i]) for i in range(frenet_field.dim - 1))
    spec = ReconstructionSpec(
        z=z,
        x0=frenet_field.points[first],
        frame=frame,
        sigma_start=float(sigma[0]),
        sigma_stop=float(sigma[-1]),
        step=step,
        kappa0=float(signature.kappa1[first]),
    )
    curve, integrated = reconstruct(spec)
    rebuilt = CubicSpline(curve.params, curve.points, axis=0)(sigma)
    deviation = float(np.max(np.linalg.norm(rebuilt - frenet_field.points[keep], axis=1)))
    log.debug("Round trip of %s: max deviation %.3g", c.label or "curve", deviation)
    return RoundTripReport(
        deviation, tolerance, (float(sigma[0]), float(sigma[-1])), float(integrated.residual.max())
    )


def example1_spec(
    a: float = 1.0, sigma_range: tuple[float, float] = (0.0, 1.0), step: float | None = None
) -> ReconstructionSpec:
    """Return the inputs that rebuild the ``example1`` curve family.

    The invariants are ``(0, a)`` with a timelike second frame vector;
    the result is ``(cosh(c s) / c^2, -sinh(c s) / c^2, a s / c)`` with
    ``c = sqrt(1 + a^2)``.

    Parameters
    ----------
    a : `float`, optional
        Second p-shape curvature.
    sigma_range : `tuple` [`float`, `float`], optional
        Range of the spherical parameter. Must start at 0.
    step : `float`, optional
        Integrator step.

    Returns
    -------
    spec : `ReconstructionSpec`
        Reconstruction inputs.
    """
    c = math.sqrt(1.0 + a * a)
    frame = np.array([[0.0, -1.0 / c, a / c], [-1.0, 0.0, 0.0], [0.0, a / c, 1.0 / c]])
    return ReconstructionSpec(
        z=(constant_z(0.0), constant_z(a)),
        x0=np.array([1.0 / c**2, 0.0, 0.0]),
        frame=frame,
        sigma_start=sigma_range[0],
        sigma_stop=sigma_range[1],
        step=step,
    )


def example2_spec(
    sigma_range: tuple[float, float] = (0.5, 1.5), step: float | None = None
) -> ReconstructionSpec:
    """Return the inputs that rebuild the ``example2`` curve.

    The invariants are ``(1 / s, 0, 0)`` with a timelike tangent.

    Parameters
    ----------
    sigma_range : `tuple` [`float`, `float`], optional
        Range of the spherical parameter; must be positive.
    step : `float`, optional
        Integrator step.

    Returns
    -------
    spec : `ReconstructionSpec`
        Reconstruction inputs with the frame and point of the closed form
        at the start of the range.
    """
    start = float(sigma_range[0])
    if start <= 0:
        raise InfeasibleParametersError("example2 is only defined for positive sigma")
    root2 = math.sqrt(2.0)
    e1 = np.array([root2, 0.0, 1.0, 0.0])
    e2 = np.array([0.0, 1.0 / root2, 0.0, 1.0 / root2])
    e3 = np.array([1.0, 0.0, root2, 0.0])
    e4 = np.array([0.0, -1.0 / root2, 0.0, 1.0 / root2])
    ch, sh = math.cosh(start), math.sinh(start)
    frame = np.stack([e1 * ch + e2 * sh, e1 * sh + e2 * ch, e3, e4])
    x0 = e1 * (start * sh - ch) + e2 * (start * ch - sh)
    return ReconstructionSpec(
        z=(reciprocal_z(), constant_z(0.0), constant_z(0.0)),
        x0=x0,
        frame=frame,
        sigma_start=start,
        sigma_stop=sigma_range[1],
        step=step,
        kappa0=1.0 / start,
    )
