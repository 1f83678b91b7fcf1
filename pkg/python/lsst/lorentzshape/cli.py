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

"""Command-line interface, installed as ``lorentz-shape``.

Every command writes its JSON summary as the last line of standard output.
Library errors are written to standard error as a JSON document and end the
command with exit status 2 (invalid input) or 3 (numerical breakdown).
"""

from __future__ import annotations

__all__ = ("main",)

import functools
import io
import json
import logging
from collections.abc import Callable, Mapping
from typing import Any, TypeVar

import click
import numpy as np

from lsst.resources import ResourcePath

from ._exceptions import (
    CurveParseError,
    DimensionMismatchError,
    InfeasibleParametersError,
    InfeasibleSpecError,
    ShapeNumericalError,
    ShapeValidationError,
)
from .curve import SampledCurve, format_curve, read_curve, write_curve
from .frenet import format_signature, frenet, pshape, structure_residual
from .reconstruction import (
    ReconstructionSpec,
    ZFunction,
    constant_z,
    example1_spec,
    example2_spec,
    reciprocal_z,
    reconstruct,
    round_trip,
    tabulated_z,
)
from .selfsimilar import (
    SelfSimilarSpec,
    eigenstructure,
    exponential_rate,
    generate,
    hypersurface_residual,
    verify_selfsimilar,
)
from .similarity import match_curves
from .version import __version__

log = logging.getLogger(__name__)

_F = TypeVar("_F", bound=Callable[..., Any])

_LOG_LEVELS = ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG")


def _report_errors(func: _F) -> _F:
    """Turn library exceptions into a JSON error document and an exit
    status.
    """

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except (ShapeValidationError, ShapeNumericalError) as e:
            code, error, message = e.exit_code, type(e).__name__, str(e)
        except FileNotFoundError as e:
            code, error, message = ShapeValidationError.exit_code, type(e).__name__, str(e)
        payload = {"error": error, "message": message, "exit_code": code}
        click.echo(json.dumps(payload), err=True)
        raise click.exceptions.Exit(code)

    return wrapper  # type: ignore[return-value]


def _read_json(uri: str) -> dict[str, Any]:
    try:
        data = json.loads(ResourcePath(uri, forceDirectory=False).read())
    except ValueError as e:
        # Also catches UnicodeDecodeError and JSONDecodeError.
        raise CurveParseError(f"Malformed JSON in {uri}: {e}") from None
    if not isinstance(data, dict):
        raise CurveParseError(f"Expected a JSON object in {uri}")
    return data


def _parse_range(ctx: click.Context, param: click.Parameter, value: str) -> tuple[float, float]:
    try:
        start, stop = (float(v) for v in value.split(":"))
    except ValueError:
        raise click.BadParameter(f"expected START:STOP, got {value!r}") from None
    return start, stop


def _z_function(entry: Any) -> ZFunction:
    if isinstance(entry, int | float):
        return constant_z(entry)
    if isinstance(entry, Mapping):
        kind = entry.get("kind")
        if kind == "const":
            return constant_z(entry["value"])
        if kind == "reciprocal":
            return reciprocal_z(entry.get("scale", 1.0))
    raise InfeasibleParametersError(f"Cannot interpret z entry {entry!r}")


def _z_table(uri: ResourcePath) -> tuple[ZFunction, ...]:
    try:
        table = np.loadtxt(io.StringIO(uri.read().decode()), delimiter=",", skiprows=1, ndmin=2)
    except ValueError as e:
        raise CurveParseError(f"Malformed z table {uri}: {e}") from None
    return tuple(tabulated_z(table[:, 0], table[:, i]) for i in range(1, table.shape[1]))


def _reconstruction_spec(uri: str, step: float | None) -> ReconstructionSpec:
    """Build a reconstruction from a JSON document.

    Either ``{"example": "example1", "a": ..., "sigma": [...]}`` for the
    built-in examples, or explicit ``z`` (or ``z_table``), ``x0``,
    ``frame``, ``sigma`` and optionally ``step`` and ``kappa0``.
    """
    data = _read_json(uri)
    try:
        return _build_reconstruction_spec(uri, data, step)
    except ShapeValidationError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise InfeasibleParametersError(f"Malformed reconstruction specification: {e!r}") from None


def _build_reconstruction_spec(uri: str, data: dict[str, Any], step: float | None) -> ReconstructionSpec:
    sigma = data.get("sigma")
    if step is None and data.get("step") is not None:
        step = float(data["step"])
    example = data.get("example")
    if example == "example1":
        return example1_spec(float(data.get("a", 1.0)), _sigma_range(sigma, (0.0, 1.0)), step)
    if example == "example2":
        return example2_spec(_sigma_range(sigma, (0.5, 1.5)), step)
    if example is not None:
        raise InfeasibleParametersError(f"Unknown example {example!r}")

    if "z_table" in data:
        z = _z_table(ResourcePath(uri, forceDirectory=False).dirname().join(data["z_table"]))
    else:
        z = tuple(_z_function(entry) for entry in data["z"])
    x0 = np.array(data["x0"], dtype=float)
    if "dim" in data and int(data["dim"]) != len(x0):
        raise DimensionMismatchError(f"dim={data['dim']} but x0 has {len(x0)} components")
    start, stop = _sigma_range(sigma, None)
    return ReconstructionSpec(
        z=z,
        x0=x0,
        frame=np.array(data["frame"], dtype=float),
        sigma_start=start,
        sigma_stop=stop,
        step=step,
        kappa0=float(data.get("kappa0", 1.0)),
    )


def _sigma_range(sigma: Any, default: tuple[float, float] | None) -> tuple[float, float]:
    if sigma is None:
        if default is None:
            raise KeyError("sigma")
        return default
    start, stop = (float(v) for v in sigma)
    return start, stop


def _emit_curve(curve: SampledCurve, out: str | None, fmt: str | None) -> str | None:
    if out is None:
        click.echo(format_curve(curve, fmt or "csv").decode(), nl=False)
        return None
    return str(write_curve(curve, out, fmt))


@click.group()
@click.option(
    "--log-level",
    type=click.Choice(_LOG_LEVELS, case_sensitive=False),
    default="WARNING",
    show_default=True,
    help="Level of log messages written to standard error.",
)
@click.version_option(__version__)
def main(log_level: str) -> None:
    """Similarity invariants of curves in Minkowski space."""
    logging.basicConfig(level=log_level.upper(), format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.argument("curve")
@click.option("--out", help="Write the invariant table here instead of standard output.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), help="Curve file format.")
@_report_errors
def invariants(curve: str, out: str | None, fmt: str | None) -> None:
    """Compute the Frenet curvatures and p-shape invariants of CURVE."""
    c = read_curve(curve, fmt)
    field = frenet(c)
    signature = pshape(field)
    table = format_signature(signature, field.curvatures)
    if out is None:
        click.echo(table.decode(), nl=False)
    else:
        ResourcePath(out, forceDirectory=False).write(table, overwrite=True)
    diagnostics = {
        "label": c.label,
        "dim": field.dim,
        "samples": c.size,
        "causal": field.causal.value,
        "orthonormality_residual": field.orthonormality_residual(),
        "structure_residual": structure_residual(field, signature),
        "arc_length": float(field.arc_length[-1]),
        "sigma_range": [float(signature.sigma[0]), float(signature.sigma[-1])],
        "low_confidence": int(np.count_nonzero(signature.low_confidence)),
        "flat_from": field.flat_from,
        "out": out,
    }
    click.echo(json.dumps(diagnostics))


@main.command("reconstruct")
@click.argument("spec")
@click.option("--step", type=float, help="Integrator step; overrides the value in SPEC.")
@click.option("--out", help="Write the curve here instead of standard output.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), help="Curve file format.")
@_report_errors
def reconstruct_command(spec: str, step: float | None, out: str | None, fmt: str | None) -> None:
    """Rebuild a curve from prescribed invariants given in the JSON file
    SPEC.
    """
    result = reconstruct(_reconstruction_spec(spec, step))
    written = _emit_curve(result.curve, out, fmt)
    summary = {
        "samples": result.curve.size,
        "sigma_range": [float(result.curve.params[0]), float(result.curve.params[-1])],
        "max_drift": float(result.frame.drift.max()),
        "max_residual": float(result.frame.residual.max()),
        "out": written,
    }
    click.echo(json.dumps(summary))


@main.command()
@click.argument("first")
@click.argument("second")
@click.option("--threshold", type=float, help="Largest signature distance accepted as a match.")
@click.option("--residual-tol", type=float, help="Largest point residual of the recovered map.")
@click.option("--sigma0", type=float, help="Anchor on the spherical parameter of FIRST.")
@click.option("--offset", type=float, default=0.0, show_default=True, help="Spherical parameter offset.")
@_report_errors
def match(
    first: str,
    second: str,
    threshold: float | None,
    residual_tol: float | None,
    sigma0: float | None,
    offset: float,
) -> None:
    """Decide whether a pseudo-similarity maps FIRST onto SECOND."""
    report = match_curves(
        read_curve(first),
        read_curve(second),
        sigma0=sigma0,
        offset=offset,
        threshold=threshold,
        residual_tol=residual_tol,
    )
    click.echo(report.to_json())


@main.command()
@click.argument("spec")
@click.option(
    "--range",
    "sigma_range",
    default="0:2",
    show_default=True,
    callback=_parse_range,
    help="Spherical parameter range START:STOP.",
)
@click.option("--samples", type=click.IntRange(min=7), default=2001, show_default=True)
@click.option("--out", help="Write the curve here instead of standard output.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), help="Curve file format.")
@_report_errors
def selfsimilar(
    spec: str, sigma_range: tuple[float, float], samples: int, out: str | None, fmt: str | None
) -> None:
    """Generate the self-similar curve with the constant invariants in the
    JSON file SPEC.
    """
    parsed = SelfSimilarSpec.from_dict(_read_json(spec))
    structure = eigenstructure(parsed)
    curve = generate(parsed, sigma_range, samples)
    written = _emit_curve(curve, out, fmt)
    try:
        residual: float | None = hypersurface_residual(curve, parsed)
    except InfeasibleSpecError:
        residual = None
    summary = {
        "eigenstructure": structure.to_dict(),
        "hypersurface_residual": residual,
        "exponential_rate": exponential_rate(curve),
        "out": written,
    }
    click.echo(json.dumps(summary))


@main.command()
@click.argument("curve")
@click.argument("spec", required=False)
@click.option("--step", type=float, help="Integrator step of the round trip.")
@click.option("--tolerance", type=float, default=1e-5, show_default=True)
@click.option("--shift", "shifts", type=float, multiple=True, default=(0.2,), show_default=True)
@_report_errors
def verify(
    curve: str, spec: str | None, step: float | None, tolerance: float, shifts: tuple[float, ...]
) -> None:
    """Rebuild CURVE from its own invariants and, if SPEC is given, check
    that it is the self-similar curve it describes.
    """
    c = read_curve(curve)
    trip = round_trip(c, step=step, tolerance=tolerance)
    summary: dict[str, Any] = {"round_trip": trip.to_dict(), "selfsimilar": None}
    passed = trip.passed
    if spec is not None:
        report = verify_selfsimilar(c, SelfSimilarSpec.from_dict(_read_json(spec)), shifts, tolerance)
        summary["selfsimilar"] = report.to_dict()
        passed = passed and report.passed
    summary["passed"] = passed
    click.echo(json.dumps(summary))
