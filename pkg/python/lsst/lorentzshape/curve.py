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

"""Sampled curves: representation, file formats, derivatives and arc
length.
"""

from __future__ import annotations

__all__ = (
    "DerivativeJet",
    "SampledCurve",
    "analytic_generators",
    "arc_length",
    "bending_scale",
    "derivative_jet",
    "derivatives",
    "format_curve",
    "load_curve",
    "parse_curve",
    "read_curve",
    "sample_analytic",
    "stencil_spacing",
    "stencil_width",
    "write_curve",
)

import functools
import io
import json
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import IO, Any

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline
from scipy.signal import savgol_coeffs, savgol_filter

from lsst.resources import ResourcePath, ResourcePathExpression

from ._exceptions import (
    CurveParseError,
    DimensionMismatchError,
    InfeasibleParametersError,
    InfeasibleSpecError,
    LightlikeTangentError,
    NonFiniteError,
    NonMonotoneParameterError,
    TooFewSamplesError,
)
from .config import get_config
from .minkowski import PSimilarity, inner_many

log = logging.getLogger(__name__)

MIN_SAMPLES = 7
"""Smallest number of samples a curve may have."""

# Accuracy order of every stencil returned by stencil_width.
_STENCIL_ACCURACY = 4

# Relative spread of parameter steps above which a grid is non-uniform.
_UNIFORM_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """A curve in Minkowski n-space known at a set of parameter values.

    Parameters
    ----------
    params : `numpy.ndarray`
        Strictly increasing parameter values, shape ``(m,)``.
    points : `numpy.ndarray`
        Curve points, shape ``(m, n)``.
    label : `str`, optional
        Free-form provenance string.
    """

    params: np.ndarray
    points: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        params = np.array(self.params, dtype=float)
        points = np.array(self.points, dtype=float)
        if params.ndim != 1:
            raise DimensionMismatchError(f"Parameters must be one dimensional, got shape {params.shape}")
        if points.ndim != 2 or points.shape[0] != params.size:
            raise DimensionMismatchError(
                f"Expected {params.size} points as an (m, n) array, got shape {points.shape}"
            )
        if points.shape[1] < 2:
            raise DimensionMismatchError(f"Curves need dimension >= 2, got {points.shape[1]}")
        if params.size < MIN_SAMPLES:
            raise TooFewSamplesError(f"A curve needs at least {MIN_SAMPLES} samples, got {params.size}")
        if not (np.all(np.isfinite(params)) and np.all(np.isfinite(points))):
            raise NonFiniteError("Curve contains non-finite values")
        if np.any(np.diff(params) <= 0):
            raise NonMonotoneParameterError("Curve parameters must be strictly increasing")
        params.flags.writeable = False
        points.flags.writeable = False
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "points", points)

    def __len__(self) -> int:
        return self.params.size

    @property
    def dim(self) -> int:
        """Dimension of the ambient space (`int`)."""
        return self.points.shape[1]

    @property
    def size(self) -> int:
        """Number of samples (`int`)."""
        return self.params.size

    @property
    def is_uniform(self) -> bool:
        """Whether the parameter grid has a constant step (`bool`)."""
        steps = np.diff(self.params)
        return bool(np.max(np.abs(steps - steps.mean())) <= _UNIFORM_RTOL * steps.mean())

    def transformed(self, f: PSimilarity) -> SampledCurve:
        """Return the image of this curve under a pseudo-similarity."""
        if f.dim != self.dim:
            raise DimensionMismatchError(f"Cannot map a curve in {self.dim}-space with a {f.dim}-space map")
        return SampledCurve(self.params, f.apply_many(self.points), self.label)

    def subcurve(self, start: int, stop: int) -> SampledCurve:
        """Return the samples with indices in ``[start, stop)``."""
        return SampledCurve(self.params[start:stop], self.points[start:stop], self.label)

    def resampled(self, m: int | None = None) -> SampledCurve:
        """Resample onto a uniform grid with a cubic spline.

        Parameters
        ----------
        m : `int`, optional
            Number of samples, defaults to the current count.

        Returns
        -------
        curve : `SampledCurve`
            Curve on ``linspace(params[0], params[-1], m)``.
        """
        m = self.size if m is None else m
        grid = np.linspace(self.params[0], self.params[-1], m)
        spline = CubicSpline(self.params, self.points, axis=0)
        return SampledCurve(grid, spline(grid), self.label)


@dataclass(frozen=True, eq=False)
class DerivativeJet:
    """Derivatives of a curve on a uniform grid.

    ``jet[k - 1]`` holds the k-th derivative at every sample. Samples
    whose stencils reach past the ends of the curve are flagged in
    ``low_confidence``.
    """

    params: np.ndarray
    points: np.ndarray
    step: float
    jet: np.ndarray
    low_confidence: np.ndarray

    @property
    def order(self) -> int:
        """Highest derivative held (`int`)."""
        return self.jet.shape[0]

    def __getitem__(self, k: int) -> np.ndarray:
        """Return the k-th derivative, ``k >= 1``."""
        if not 1 <= k <= self.order:
            raise IndexError(f"Derivative order {k} not in [1, {self.order}]")
        return self.jet[k - 1]


def stencil_width(order: int) -> int:
    """Return the stencil width used for a derivative of the given order.

    The stencil interpolates ``width`` points exactly, so every derivative
    is fourth order accurate in the stencil spacing.

    Parameters
    ----------
    order : `int`
        Derivative order, at least 1.

    Returns
    -------
    width : `int`
        Odd stencil width.
    """
    return 2 * ((order + 1) // 2) - 1 + 4


@functools.cache
def _stencil_constants(order: int) -> tuple[float, float]:
    """Return the roundoff gain and leading truncation coefficient of the
    unit-spacing stencil for ``order``.
    """
    width = stencil_width(order)
    coeffs = savgol_coeffs(width, width - 1, deriv=order, use="dot")
    offsets = np.arange(width, dtype=float) - width // 2
    q = order + _STENCIL_ACCURACY
    truncation = abs(float(coeffs @ offsets**q)) / math.factorial(q)
    return float(np.sum(np.abs(coeffs))), truncation


def stencil_spacing(order: int, scale: float) -> float:
    """Return the stencil spacing that balances truncation against
    roundoff for a derivative of the given order.

    With spacing ``H`` the truncation error of the stencil relative to the
    derivative grows like ``(H / scale)**4`` while the amplified rounding
    error of the samples grows like ``eps * (scale / H)**order``; the
    returned spacing minimizes their sum.

    Parameters
    ----------
    order : `int`
        Derivative order, at least 1.
    scale : `float`
        Parameter length over which the curve bends appreciably (see
        `bending_scale`).

    Returns
    -------
    spacing : `float`
        Optimal stencil spacing in parameter units.
    """
    roundoff, truncation = _stencil_constants(order)
    p = _STENCIL_ACCURACY
    ratio = order * float(np.finfo(float).eps) * roundoff / (p * truncation)
    return scale * ratio ** (1.0 / (order + p))


def bending_scale(c: SampledCurve) -> float:
    """Return the parameter length over which a curve bends appreciably.

    This is the median over the samples of ``|c'| / |c''|`` in the
    Euclidean norm of the coordinates, capped at the parameter span. A
    straight curve has the full span as its scale.

    Parameters
    ----------
    c : `SampledCurve`
        Curve on a uniform grid.

    Returns
    -------
    scale : `float`
        Bending scale in parameter units.
    """
    span = float(c.params[-1] - c.params[0])
    step = span / (c.size - 1)
    first = savgol_filter(c.points, 5, 4, deriv=1, delta=step, axis=0, mode="interp")
    second = savgol_filter(c.points, 5, 4, deriv=2, delta=step, axis=0, mode="interp")
    speed = np.linalg.norm(first, axis=1)
    bend = np.linalg.norm(second, axis=1)
    ratio = np.full(c.size, span)
    np.divide(speed, bend, out=ratio, where=bend * span > speed)
    return float(min(np.median(ratio), span))


def _strided_derivative(
    points: np.ndarray, order: int, step: float, stride: int
) -> tuple[np.ndarray, np.ndarray]:
    """Differentiate on every ``stride``-th sample, for every offset.

    Returns the derivative at all samples and the mask of samples whose
    stencil was one-sided.
    """
    width = stencil_width(order)
    half = width // 2
    values = np.empty_like(points)
    low = np.zeros(len(points), dtype=bool)
    for offset in range(stride):
        values[offset::stride] = savgol_filter(
            points[offset::stride], width, width - 1, deriv=order, delta=step * stride, axis=0, mode="interp"
        )
        edge = np.zeros(len(low[offset::stride]), dtype=bool)
        edge[:half] = True
        edge[-half:] = True
        low[offset::stride] |= edge
    return values, low


def derivatives(c: SampledCurve, order: int) -> DerivativeJet:
    """Compute the derivatives of a curve up to a given order.

    Derivatives come from exact polynomial interpolation over a sliding
    window (`scipy.signal.savgol_filter` with polynomial order one less
    than the window). Interior samples get central stencils and the samples
    near either end get one-sided stencils of the same width. A curve on a
    non-uniform grid is first resampled onto a uniform grid.

    On a fine grid the stencil of a higher derivative uses every
    ``stride``-th sample, so that its spacing stays near
    `stencil_spacing` and rounding errors are not amplified without
    bound as the step shrinks. Samples whose stencil (at its stride)
    reaches past the ends of the curve are flagged as low confidence.

    Parameters
    ----------
    c : `SampledCurve`
        Curve to differentiate.
    order : `int`
        Highest derivative wanted, between 1 and the curve dimension.

    Returns
    -------
    jet : `DerivativeJet`
        The derivatives, on the grid actually used.

    Raises
    ------
    TooFewSamplesError
        Raised if the curve is too short for the widest stencil.
    """
    if not 1 <= order <= c.dim:
        raise InfeasibleParametersError(f"Derivative order must be in [1, {c.dim}], got {order}")
    return derivative_jet(c, order)


def derivative_jet(c: SampledCurve, order: int) -> DerivativeJet:
    """Compute derivatives up to ``order`` without bounding the order by
    the curve dimension.

    Same as `derivatives` otherwise; used where a derivative beyond the
    dimension enters a rate of change of a curvature.
    """
    widest = stencil_width(order)
    needed = max(widest, 2 * order + 1)
    if c.size < needed:
        raise TooFewSamplesError(f"Derivatives up to order {order} need {needed} samples, got {c.size}")

    if not c.is_uniform:
        log.warning(
            "Curve %r has a non-uniform grid; resampling %d points with a cubic spline", c.label, c.size
        )
        c = c.resampled()

    step = float((c.params[-1] - c.params[0]) / (c.size - 1))
    scale = bending_scale(c)
    jet = np.empty((order, c.size, c.dim))
    low = np.zeros(c.size, dtype=bool)
    strides = []
    for k in range(1, order + 1):
        width = stencil_width(k)
        # At least half of the samples keep central stencils.
        limit = max(1, (c.size - 1) // (2 * (width - 1)))
        stride = min(limit, max(1, int(stencil_spacing(k, scale) / step)))
        jet[k - 1], edge = _strided_derivative(c.points, k, step, stride)
        low |= edge
        strides.append(stride)
    log.debug(
        "Derivatives up to order %d of %d samples with step %g, bending scale %g and strides %s",
        order,
        c.size,
        step,
        scale,
        strides,
    )
    return DerivativeJet(c.params, c.points, step, jet, low)


def _tangent_speed(tangent: np.ndarray, tol: float) -> tuple[np.ndarray, float]:
    """Return the Lorentzian speed and the causal sign of a tangent field."""
    q = inner_many(tangent, tangent)
    lightlike = np.abs(q) <= tol * np.einsum("ij,ij->i", tangent, tangent)
    if np.any(lightlike):
        index = int(np.argmax(lightlike))
        raise LightlikeTangentError(f"Tangent is lightlike at sample {index}")
    signs = np.sign(q)
    if np.any(signs != signs[0]):
        index = int(np.argmax(signs != signs[0]))
        raise LightlikeTangentError(f"Tangent changes causal character at sample {index}")
    return np.sqrt(np.abs(q)), float(signs[0])


def arc_length(c: SampledCurve, tol: float | None = None) -> np.ndarray:
    """Compute the Lorentzian arc length along a curve.

    Parameters
    ----------
    c : `SampledCurve`
        A non-null curve.
    tol : `float`, optional
        Lightlike tolerance, defaults to the configured value.

    Returns
    -------
    s : `numpy.ndarray`
        Arc length measured from the first sample, at ``c.params``.

    Raises
    ------
    LightlikeTangentError
        Raised if the tangent is lightlike somewhere or changes causal
        character.
    """
    if tol is None:
        tol = get_config().lightlike_tol
    jet = derivatives(c, 1)
    speed, _ = _tangent_speed(jet[1], tol)
    s = cumulative_simpson(speed, x=jet.params, initial=0.0)
    if jet.params is not c.params and not np.array_equal(jet.params, c.params):
        s = CubicSpline(jet.params, s)(c.params)
    return s


# Curve file formats.

_FORMATS = ("csv", "json")


def _check_format(format: str) -> str:
    fmt = format.lower().lstrip(".")
    if fmt not in _FORMATS:
        raise CurveParseError(f"Unknown curve format {format!r}; expected one of {_FORMATS}")
    return fmt


def parse_curve(data: bytes | str, format: str) -> SampledCurve:
    """Parse a curve from the contents of a CSV or JSON document.

    Parameters
    ----------
    data : `bytes` or `str`
        Document contents, UTF-8 encoded if bytes.
    format : `str`
        Either ``csv`` or ``json``.

    Returns
    -------
    curve : `SampledCurve`
        The validated curve.

    Raises
    ------
    CurveParseError
        Raised if the document is malformed.
    NonMonotoneParameterError
        Raised if the parameter column is not strictly increasing.
    DimensionMismatchError
        Raised if rows disagree on the dimension.
    """
    fmt = _check_format(format)
    try:
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    except UnicodeDecodeError as e:
        raise CurveParseError(f"Curve document is not valid UTF-8: {e}") from None

    if fmt == "json":
        return _parse_json(text)
    return _parse_csv(text)


def _parse_csv(text: str) -> SampledCurve:
    lines = text.splitlines()
    if not lines:
        raise CurveParseError("Empty CSV document")
    header = [h.strip() for h in lines[0].split(",")]
    n = len(header) - 1
    expected = ["t"] + [f"x{i}" for i in range(n)]
    if n < 2 or header != expected:
        raise CurveParseError(f"CSV header must be {','.join(expected) if n >= 2 else 't,x0,x1,...'}")
    rows = [line for line in lines[1:] if line.strip()]
    widths = {len(line.split(",")) for line in rows}
    if widths and widths != {n + 1}:
        raise DimensionMismatchError(f"CSV rows must all have {n + 1} columns, found {sorted(widths)}")
    try:
        table = np.loadtxt(io.StringIO("\n".join(rows)), delimiter=",", ndmin=2)
    except ValueError as e:
        raise CurveParseError(f"Unable to parse CSV values: {e}") from None
    if table.shape[0] == 0:
        raise CurveParseError("CSV document has no samples")
    if not np.all(np.isfinite(table)):
        raise CurveParseError("CSV document contains non-finite values")
    return SampledCurve(table[:, 0], table[:, 1:])


def _parse_json(text: str) -> SampledCurve:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise CurveParseError(f"Invalid JSON: {e}") from None
    try:
        dim = int(document["dim"])
        label = str(document.get("label", ""))
        samples = document["samples"]
        params = [float(s["t"]) for s in samples]
        points = [[float(v) for v in s["x"]] for s in samples]
    except (KeyError, TypeError, ValueError) as e:
        raise CurveParseError(f"Malformed curve document: {e!r}") from None
    if any(len(p) != dim for p in points):
        raise DimensionMismatchError(f"Every sample must have {dim} coordinates")
    if not params:
        raise CurveParseError("Curve document has no samples")
    if not (all(math.isfinite(t) for t in params) and np.all(np.isfinite(points))):
        raise CurveParseError("Curve document contains non-finite values")
    return SampledCurve(np.array(params), np.array(points).reshape(len(params), dim), label)


def load_curve(source: IO[bytes], format: str) -> SampledCurve:
    """Read a curve from a binary stream.

    Parameters
    ----------
    source : `typing.IO` [`bytes`]
        Stream positioned at the start of the document.
    format : `str`
        Either ``csv`` or ``json``.

    Returns
    -------
    curve : `SampledCurve`
        The validated curve.
    """
    return parse_curve(source.read(), format)


def format_curve(curve: SampledCurve, format: str) -> bytes:
    """Serialize a curve.

    Floats are written with `repr` so that parsing the result gives back
    identical values.

    Parameters
    ----------
    curve : `SampledCurve`
        Curve to write.
    format : `str`
        Either ``csv`` or ``json``.

    Returns
    -------
    data : `bytes`
        UTF-8 document.
    """
    fmt = _check_format(format)
    if fmt == "json":
        document = {
            "dim": curve.dim,
            "label": curve.label,
            "samples": [
                {"t": float(t), "x": [float(v) for v in x]}
                for t, x in zip(curve.params, curve.points, strict=True)
            ],
        }
        return json.dumps(document).encode()
    header = ",".join(["t"] + [f"x{i}" for i in range(curve.dim)])
    lines = [header]
    for t, x in zip(curve.params, curve.points, strict=True):
        lines.append(",".join(repr(float(v)) for v in (t, *x)))
    return ("\n".join(lines) + "\n").encode()


def _format_from_uri(uri: ResourcePath, format: str | None) -> str:
    if format is not None:
        return _check_format(format)
    return _check_format(uri.getExtension() or "csv")


def read_curve(uri: ResourcePathExpression, format: str | None = None) -> SampledCurve:
    """Read a curve from any location `~lsst.resources.ResourcePath`
    supports.

    Parameters
    ----------
    uri : `lsst.resources.ResourcePathExpression`
        Location of the curve document.
    format : `str`, optional
        File format; taken from the file extension if not given.

    Returns
    -------
    curve : `SampledCurve`
        The curve. Its label defaults to the file name.
    """
    path = ResourcePath(uri, forceDirectory=False)
    fmt = _format_from_uri(path, format)
    curve = parse_curve(path.read(), fmt)
    if not curve.label:
        curve = SampledCurve(curve.params, curve.points, path.basename())
    log.debug("Read %d samples in %d dimensions from %s", curve.size, curve.dim, path)
    return curve


def write_curve(
    curve: SampledCurve, uri: ResourcePathExpression, format: str | None = None, overwrite: bool = True
) -> ResourcePath:
    """Write a curve to any location `~lsst.resources.ResourcePath`
    supports.

    Parameters
    ----------
    curve : `SampledCurve`
        Curve to write.
    uri : `lsst.resources.ResourcePathExpression`
        Destination.
    format : `str`, optional
        File format; taken from the file extension if not given.
    overwrite : `bool`, optional
        Whether an existing file may be replaced.

    Returns
    -------
    path : `lsst.resources.ResourcePath`
        The location written.
    """
    path = ResourcePath(uri, forceDirectory=False)
    path.write(format_curve(curve, _format_from_uri(path, format)), overwrite=overwrite)
    return path


# Closed-form curve families.

_Generator = Callable[..., np.ndarray]
_GENERATORS: dict[str, _Generator] = {}


def _register(name: str) -> Callable[[_Generator], _Generator]:
    def decorator(func: _Generator) -> _Generator:
        _GENERATORS[name] = func
        return func

    return decorator


def analytic_generators() -> tuple[str, ...]:
    """Return the names accepted by `sample_analytic`."""
    return tuple(sorted(_GENERATORS))


@_register("unit_hyperbola")
def _unit_hyperbola(t: np.ndarray) -> np.ndarray:
    return np.column_stack([np.sinh(t), np.cosh(t)])


@_register("example1")
def _example1(t: np.ndarray, a: float = 1.0) -> np.ndarray:
    # Spacelike curve in 3-space with constant invariants (0, a).
    if a == 0:
        raise InfeasibleParametersError("example1 requires a != 0")
    c = math.sqrt(1.0 + a * a)
    return np.column_stack([np.cosh(c * t) / c**2, -np.sinh(c * t) / c**2, a * t / c])


@_register("example2")
def _example2(t: np.ndarray) -> np.ndarray:
    # Timelike curve in 4-space with invariants (1/t, 0, 0).
    u = t * np.sinh(t) - np.cosh(t)
    v = t * np.cosh(t) - np.sinh(t)
    root2 = math.sqrt(2.0)
    return np.column_stack([root2 * u, v / root2, u, v / root2])


def _selfsimilar(t: np.ndarray, ktilde: tuple[float, ...], case: str) -> np.ndarray:
    from .selfsimilar import CausalCase, SelfSimilarSpec, generate_points

    try:
        spec = SelfSimilarSpec(tuple(float(k) for k in ktilde), CausalCase(case))
        return generate_points(spec, t)
    except InfeasibleSpecError as e:
        raise InfeasibleParametersError(str(e)) from e


@_register("selfsim2")
def _selfsim2(t: np.ndarray, k1: float, case: str = "e1_timelike") -> np.ndarray:
    return _selfsimilar(t, (k1,), case)


@_register("selfsim3")
def _selfsim3(t: np.ndarray, k1: float, k2: float, case: str = "e1_timelike") -> np.ndarray:
    return _selfsimilar(t, (k1, k2), case)


@_register("selfsim4")
def _selfsim4(t: np.ndarray, k1: float, k2: float, k3: float, case: str = "e1_timelike") -> np.ndarray:
    return _selfsimilar(t, (k1, k2, k3), case)


@_register("polynomial")
def _polynomial(t: np.ndarray, coefficients: list[list[float]]) -> np.ndarray:
    # One coefficient list per coordinate, lowest degree first.
    return np.column_stack([np.polynomial.polynomial.polyval(t, coeffs) for coeffs in coefficients])


@_register("trigonometric")
def _trigonometric(t: np.ndarray, terms: list[list[list[float]]]) -> np.ndarray:
    # One list of (amplitude, frequency, phase) triples per coordinate;
    # hyperbolic terms use a negative frequency.
    columns = []
    for coordinate in terms:
        value = np.zeros_like(t)
        for amplitude, frequency, phase in coordinate:
            if frequency >= 0:
                value += amplitude * np.sin(frequency * t + phase)
            else:
                value += amplitude * np.sinh(-frequency * t + phase)
        columns.append(value)
    return np.column_stack(columns)


def sample_analytic(
    generator: str, t_range: tuple[float, float], m: int, **params: Any
) -> SampledCurve:
    """Sample a closed-form curve on a uniform grid.

    Parameters
    ----------
    generator : `str`
        Name of the family, one of `analytic_generators`.
    t_range : `tuple` [`float`, `float`]
        Parameter interval.
    m : `int`
        Number of samples.
    **params : `~typing.Any`
        Family parameters, e.g. ``a`` for ``example1`` or ``k1, k2`` for
        ``selfsim3``.

    Returns
    -------
    curve : `SampledCurve`
        The sampled curve, labelled with the generator name.

    Raises
    ------
    InfeasibleParametersError
        Raised if the family parameters are invalid.
    """
    if generator not in _GENERATORS:
        raise InfeasibleParametersError(
            f"Unknown generator {generator!r}; expected one of {analytic_generators()}"
        )
    if m < MIN_SAMPLES:
        raise TooFewSamplesError(f"A curve needs at least {MIN_SAMPLES} samples, got {m}")
    start, stop = (float(v) for v in t_range)
    if not stop > start:
        raise InfeasibleParametersError(f"Empty parameter range [{start}, {stop}]")
    t = np.linspace(start, stop, m)
    try:
        points = _GENERATORS[generator](t, **params)
    except TypeError as e:
        raise InfeasibleParametersError(f"Bad parameters for {generator}: {e}") from None
    return SampledCurve(t, points, generator)
