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

"""Self-similar curves: curves whose p-shape curvatures are all constant.

Such a curve is the orbit of a point under a one-parameter group of
pseudo-similarities. In coordinates adapted to the eigenplanes of the
structure matrix it has a closed form: one hyperbolic block, a number of
elliptic blocks and, in odd dimension, an exponential tail.
"""

from __future__ import annotations

__all__ = (
    "BlockKind",
    "CausalCase",
    "EigenBlock",
    "EigenStructure",
    "SelfSimilarReport",
    "SelfSimilarSpec",
    "build_M",
    "eigenstructure",
    "exponential_rate",
    "generate",
    "generate_points",
    "hypersurface_residual",
    "normal_frame",
    "verify_selfsimilar",
)

import dataclasses
import enum
import logging
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy.linalg import null_space

from ._exceptions import (
    DegenerateEigenvaluesError,
    DimensionMismatchError,
    InfeasibleParametersError,
    InfeasibleSpecError,
    ResidualTooLargeError,
)
from .config import get_config
from .curve import SampledCurve
from .frenet import frenet, pshape, structure_matrix
from .minkowski import inner_many, pseudo_orthonormality_residual
from .similarity import match_curves

log = logging.getLogger(__name__)


class CausalCase(enum.Enum):
    """Which frame vector is timelike."""

    E1_TIMELIKE = "e1_timelike"
    E2_TIMELIKE = "e2_timelike"


class BlockKind(enum.Enum):
    """Kind of an invariant block of the structure matrix."""

    HYPERBOLIC = "hyperbolic"
    ELLIPTIC = "elliptic"
    NULL = "null"


@dataclass(frozen=True)
class SelfSimilarSpec:
    """Constant p-shape curvatures of a self-similar curve.

    Parameters
    ----------
    ktilde : `tuple` [`float`, ...]
        ``ktilde_1 ... ktilde_{n-1}``, all non-zero; ``ktilde_j > 0`` for
        ``2 <= j <= n - 2``.
    case : `CausalCase`
        Whether the tangent or the principal normal is timelike.
    """

    ktilde: tuple[float, ...]
    case: CausalCase = CausalCase.E1_TIMELIKE

    def __post_init__(self) -> None:
        ktilde = tuple(float(k) for k in self.ktilde)
        if not ktilde:
            raise InfeasibleSpecError("At least one p-shape curvature is needed")
        if not all(math.isfinite(k) and k != 0.0 for k in ktilde):
            raise InfeasibleSpecError(f"Self-similar curvatures must be finite and non-zero, got {ktilde}")
        if any(k <= 0 for k in ktilde[1:-1]):
            raise InfeasibleSpecError(f"Curvatures ktilde_2 ... ktilde_(n-2) must be positive, got {ktilde}")
        object.__setattr__(self, "ktilde", ktilde)
        object.__setattr__(self, "case", CausalCase(self.case))

    @property
    def dim(self) -> int:
        """Dimension of the ambient space (`int`)."""
        return len(self.ktilde) + 1

    @property
    def signs(self) -> np.ndarray:
        """Frame signs implied by the causal case (`numpy.ndarray`)."""
        signs = np.ones(self.dim)
        signs[0 if self.case is CausalCase.E1_TIMELIKE else 1] = -1.0
        return signs

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SelfSimilarSpec:
        """Build from ``{"dim": n, "ktilde": [...], "case": ...}``.

        Parameters
        ----------
        data : `~collections.abc.Mapping`
            Parsed JSON document. ``dim`` and ``case`` are optional.

        Returns
        -------
        spec : `SelfSimilarSpec`
            The validated specification.
        """
        try:
            ktilde = tuple(float(k) for k in data["ktilde"])
            case = CausalCase(data.get("case", CausalCase.E1_TIMELIKE.value))
        except (KeyError, TypeError, ValueError) as e:
            raise InfeasibleSpecError(f"Malformed self-similar specification: {e!r}") from None
        if "dim" in data and int(data["dim"]) != len(ktilde) + 1:
            raise DimensionMismatchError(f"dim={data['dim']} needs {int(data['dim']) - 1} curvatures")
        return cls(ktilde, case)

    def to_dict(self) -> dict[str, Any]:
        """Return the specification as plain Python types."""
        return {"dim": self.dim, "ktilde": list(self.ktilde), "case": self.case.value}


@dataclass(frozen=True)
class EigenBlock:
    """One invariant block of the structure matrix in normal form."""

    kind: BlockKind
    """Hyperbolic, elliptic or the one dimensional null block."""

    nu: float
    """Eigenvalue of ``M^2`` on the block."""

    y: float
    """Lorentzian square of the block component of the initial tangent."""

    amplitude: float
    """Coefficient ``a`` of the closed form."""

    denominator: float
    """Coefficient ``b`` of the closed form; 1 for the null block."""

    rate: float
    """Signed angular or hyperbolic rate ``lambda``; 0 for the null block."""

    phase: float
    """Phase offset of the closed form."""

    timelike: bool = False
    """Whether the block holds the time axis with a timelike tangent."""

    def to_dict(self) -> dict[str, Any]:
        data = dataclasses.asdict(self)
        data["kind"] = self.kind.value
        return data


@dataclass(frozen=True, eq=False)
class EigenStructure:
    """Normal form of a self-similar curve.

    Attributes
    ----------
    spec : `SelfSimilarSpec`
        The specification.
    matrix : `numpy.ndarray`
        Structure matrix ``M``.
    blocks : `tuple` [`EigenBlock`, ...]
        Hyperbolic block first, then elliptic blocks, then the null block
        in odd dimension.
    frame : `numpy.ndarray`
        Frenet frame at ``sigma = 0`` in normal coordinates.
    """

    spec: SelfSimilarSpec
    matrix: np.ndarray
    blocks: tuple[EigenBlock, ...]
    frame: np.ndarray

    @property
    def lambda_squared(self) -> list[float]:
        """Eigenvalues of ``M^2`` of multiplicity two (`list`)."""
        return [b.nu for b in self.blocks if b.kind is not BlockKind.NULL]

    def to_dict(self) -> dict[str, Any]:
        """Return the eigenstructure as plain Python types."""
        return {
            "spec": self.spec.to_dict(),
            "lambda_squared": self.lambda_squared,
            "blocks": [b.to_dict() for b in self.blocks],
            "frame": self.frame.tolist(),
        }


def build_M(spec: SelfSimilarSpec) -> np.ndarray:
    """Return the constant structure matrix of a self-similar curve."""
    return structure_matrix(spec.signs, (1.0,) + spec.ktilde[1:])


def _cluster(values: np.ndarray, tol: float) -> list[list[float]]:
    groups: list[list[float]] = []
    for v in np.sort(values):
        if groups and abs(v - groups[-1][-1]) <= tol:
            groups[-1].append(float(v))
        else:
            groups.append([float(v)])
    return groups


def _rate_matrix(blocks: Iterable[EigenBlock], n: int) -> np.ndarray:
    """Return the generator ``N`` acting on row vectors in normal
    coordinates.
    """
    matrix = np.zeros((n, n))
    i = 0
    for block in blocks:
        if block.kind is BlockKind.NULL:
            i += 1
            continue
        matrix[i, i + 1] = block.rate
        matrix[i + 1, i] = block.rate if block.kind is BlockKind.HYPERBOLIC else -block.rate
        i += 2
    return matrix


def _initial_tangent(blocks: Iterable[EigenBlock], kappa: float) -> np.ndarray:
    components: list[float] = []
    for block in blocks:
        if block.kind is BlockKind.HYPERBOLIC:
            components.extend((block.amplitude, 0.0) if block.timelike else (0.0, -block.amplitude))
        elif block.kind is BlockKind.ELLIPTIC:
            components.extend((block.amplitude, 0.0))
        else:
            components.append(kappa * block.amplitude)
    return np.array(components)


def _frame_from_tangent(e1: np.ndarray, rates: np.ndarray, signs: np.ndarray, c: np.ndarray) -> np.ndarray:
    n = e1.size
    frame = np.zeros((n, n))
    frame[0] = e1
    for i in range(n - 1):
        derivative = frame[i] @ rates
        if i > 0:
            derivative = derivative + signs[i - 1] * c[i - 1] * frame[i - 1]
        frame[i + 1] = derivative / (signs[i + 1] * c[i])
    return frame


def eigenstructure(spec: SelfSimilarSpec) -> EigenStructure:
    """Compute the normal form of the self-similar curve with the given
    invariants.

    The eigenvalues of ``M^2`` come in equal pairs plus a zero in odd
    dimension. Each pair spans an invariant plane; the plane on which the
    frame metric is Lorentzian is the hyperbolic block, the others are
    elliptic. The Lorentzian squares of the block components of the
    initial tangent solve a linear Vandermonde system built from the
    squares of ``e_1 M^j``.

    Parameters
    ----------
    spec : `SelfSimilarSpec`
        The invariants.

    Returns
    -------
    structure : `EigenStructure`
        Blocks, coefficients and initial frame.

    Raises
    ------
    InfeasibleSpecError
        Raised if no real self-similar curve has these invariants.
    DegenerateEigenvaluesError
        Raised if the eigenvalues of ``M^2`` cannot be paired.
    """
    config = get_config()
    n = spec.dim
    kappa = spec.ktilde[0]
    signs = spec.signs
    metric_form = np.diag(signs)
    matrix = build_M(spec)
    square = matrix @ matrix
    scale = max(float(np.linalg.norm(square, 2)), 1.0)
    tol = config.cluster_tol * scale

    eigenvalues = np.linalg.eigvals(square)
    if np.max(np.abs(eigenvalues.imag)) > tol:
        raise InfeasibleSpecError("Structure matrix squared has complex eigenvalues")
    groups = _cluster(eigenvalues.real, tol)

    pairs = [g for g in groups if len(g) == 2]
    singles = [g for g in groups if len(g) == 1]
    expected_singles = n % 2
    if len(pairs) != n // 2 or len(singles) != expected_singles or any(len(g) > 2 for g in groups):
        raise DegenerateEigenvaluesError(
            f"Eigenvalues {np.sort(eigenvalues.real).tolist()} do not pair up into {n // 2} double values"
        )
    if singles and abs(singles[0][0]) > tol:
        raise DegenerateEigenvaluesError(f"Simple eigenvalue {singles[0][0]:.6g} should vanish")

    hyperbolic: list[float] = []
    elliptic: list[float] = []
    for group in pairs:
        nu = float(np.mean(group))
        plane = null_space(square.T - nu * np.eye(n), rcond=1e-7)
        if plane.shape[1] != 2:
            raise DegenerateEigenvaluesError(
                f"Eigenvalue {nu:.6g} has a {plane.shape[1]}-dimensional eigenspace"
            )
        if np.linalg.det(plane.T @ metric_form @ plane) < 0:
            hyperbolic.append(nu)
        else:
            elliptic.append(nu)
    if len(hyperbolic) != 1:
        raise InfeasibleSpecError(f"Expected exactly one hyperbolic block, found {len(hyperbolic)}")
    nu_h = hyperbolic[0]
    if nu_h <= 0:
        raise InfeasibleSpecError(f"Hyperbolic block has non-positive eigenvalue {nu_h:.6g}")
    elliptic.sort(reverse=True)

    nus = [nu_h] + elliptic + ([0.0] if n % 2 else [])
    count = len(nus)
    vandermonde = np.array([[(-nu) ** j for nu in nus] for j in range(count)])
    power = np.eye(n)[0]
    moments = np.empty(count)
    for j in range(count):
        moments[j] = power @ metric_form @ power
        power = power @ matrix
    y = np.linalg.solve(vandermonde, moments)
    log.debug("Block eigenvalues %s with tangent squares %s", nus, y.tolist())

    blocks: list[EigenBlock] = []
    if abs(y[0]) <= tol:
        raise InfeasibleSpecError("Tangent has no component in the hyperbolic block")
    b_h2 = nu_h - kappa**2
    if b_h2 <= 0:
        raise InfeasibleSpecError(
            f"Hyperbolic rate squared {nu_h:.6g} must exceed ktilde_1 squared {kappa**2:.6g}"
        )
    b_h = math.sqrt(b_h2)
    blocks.append(
        EigenBlock(
            kind=BlockKind.HYPERBOLIC,
            nu=nu_h,
            y=float(y[0]),
            amplitude=math.sqrt(abs(y[0])),
            denominator=b_h,
            rate=math.sqrt(nu_h),
            phase=math.asinh(kappa / b_h),
            timelike=bool(y[0] < 0),
        )
    )
    for nu, y_e in zip(elliptic, y[1 : 1 + len(elliptic)], strict=True):
        if y_e <= 0:
            raise InfeasibleSpecError(
                f"Elliptic block {nu:.6g} needs a positive tangent square, got {y_e:.6g}"
            )
        rate = math.sqrt(-nu)
        blocks.append(
            EigenBlock(
                kind=BlockKind.ELLIPTIC,
                nu=nu,
                y=float(y_e),
                amplitude=math.sqrt(y_e),
                denominator=math.hypot(rate, kappa),
                rate=rate,
                phase=math.atan2(kappa, rate),
            )
        )
    if n % 2:
        y_t = float(y[-1])
        if y_t <= 0:
            raise InfeasibleSpecError(f"Null block needs a positive tangent square, got {y_t:.6g}")
        blocks.append(
            EigenBlock(
                kind=BlockKind.NULL,
                nu=0.0,
                y=y_t,
                amplitude=math.sqrt(y_t) / kappa,
                denominator=1.0,
                rate=0.0,
                phase=0.0,
            )
        )

    c = np.array((1.0,) + spec.ktilde[1:])
    frame = _frame_from_tangent(_initial_tangent(blocks, kappa), _rate_matrix(blocks, n), signs, c)
    if n >= 3 and np.linalg.det(frame) < 0:
        index = max(
            (i for i, b in enumerate(blocks) if b.kind is BlockKind.ELLIPTIC),
            default=len(blocks) - 1,
        )
        block = blocks[index]
        if block.kind is BlockKind.ELLIPTIC:
            blocks[index] = dataclasses.replace(
                block, rate=-block.rate, phase=math.atan2(kappa, -block.rate)
            )
        else:
            blocks[index] = dataclasses.replace(block, amplitude=-block.amplitude)
        frame = _frame_from_tangent(_initial_tangent(blocks, kappa), _rate_matrix(blocks, n), signs, c)
    residual = pseudo_orthonormality_residual(frame, signs)
    if residual > 1e-8 or (n >= 3 and np.linalg.det(frame) < 0):
        raise InfeasibleSpecError(f"Normal form frame is not a valid Frenet frame (residual {residual:.3g})")
    return EigenStructure(spec, matrix, tuple(blocks), frame)


def normal_frame(spec: SelfSimilarSpec) -> np.ndarray:
    """Return the Frenet frame at ``sigma = 0`` of the generated curve."""
    return eigenstructure(spec).frame


def generate_points(
    spec: SelfSimilarSpec, sigma: npt.ArrayLike, structure: EigenStructure | None = None
) -> np.ndarray:
    """Evaluate the closed form of a self-similar curve.

    Parameters
    ----------
    spec : `SelfSimilarSpec`
        The invariants.
    sigma : array-like
        Spherical parameter values.
    structure : `EigenStructure`, optional
        Precomputed eigenstructure of ``spec``.

    Returns
    -------
    points : `numpy.ndarray`
        Curve points of shape ``(m, n)``. The first curvature is 1 at
        ``sigma = 0``.
    """
    if structure is None:
        structure = eigenstructure(spec)
    s = np.asarray(sigma, dtype=float)
    kappa = spec.ktilde[0]
    growth = np.exp(kappa * s)
    columns: list[np.ndarray] = []
    for block in structure.blocks:
        if block.kind is BlockKind.NULL:
            columns.append(block.amplitude * growth)
            continue
        radius = block.amplitude / block.denominator * growth
        if block.kind is BlockKind.ELLIPTIC:
            theta = block.rate * s + block.phase
            columns.extend((radius * np.sin(theta), -radius * np.cos(theta)))
        elif block.timelike:
            theta = block.rate * s - block.phase
            columns.extend((radius * np.sinh(theta), radius * np.cosh(theta)))
        else:
            theta = block.rate * s - block.phase
            columns.extend((-radius * np.cosh(theta), -radius * np.sinh(theta)))
    return np.column_stack(columns)


def generate(
    spec: SelfSimilarSpec, sigma_range: tuple[float, float] = (0.0, 2.0), m: int = 2001
) -> SampledCurve:
    """Sample a self-similar curve on a uniform grid of its spherical
    parameter.

    Parameters
    ----------
    spec : `SelfSimilarSpec`
        The invariants.
    sigma_range : `tuple` [`float`, `float`], optional
        Parameter interval.
    m : `int`, optional
        Number of samples.

    Returns
    -------
    curve : `SampledCurve`
        The curve, parametrized by ``sigma``.
    """
    start, stop = (float(v) for v in sigma_range)
    if not stop > start:
        raise InfeasibleParametersError(f"Empty sigma range [{start}, {stop}]")
    sigma = np.linspace(start, stop, m)
    return SampledCurve(sigma, generate_points(spec, sigma), f"selfsim{spec.dim}")


def _block_quadratics(points: np.ndarray, blocks: Iterable[EigenBlock]) -> list[np.ndarray]:
    """Return each block's quadratic form, scaled to ``exp(2 k sigma)``."""
    forms = []
    i = 0
    for block in blocks:
        if block.kind is BlockKind.NULL:
            forms.append((points[:, i] / block.amplitude) ** 2)
            i += 1
            continue
        x, y = points[:, i], points[:, i + 1]
        if block.kind is BlockKind.ELLIPTIC:
            q = x**2 + y**2
        elif block.timelike:
            q = -(x**2) + y**2
        else:
            q = x**2 - y**2
        forms.append(q * (block.denominator / block.amplitude) ** 2)
        i += 2
    return forms


def hypersurface_residual(c: SampledCurve, spec: SelfSimilarSpec) -> float:
    """Evaluate the quadratic hypersurface equation a self-similar curve
    lies on.

    In normal coordinates every block's quadratic form, divided by its
    squared coefficient, equals ``exp(2 ktilde_1 sigma)``. The curve
    therefore lies on the quadric where the sum of the first forms equals
    that many copies of the last one. With ``k = n // 2`` blocks and
    ``q_1 = -x_1^2 + x_2^2`` for a timelike tangent (``x_1^2 - x_2^2``
    for a spacelike one), ``q_i = x_{2i-1}^2 + x_{2i}^2`` otherwise, this
    is, for even ``n``::

        sum_{i<k} (b_i^2 / a_i^2) q_i = (k - 1) (b_k^2 / a_k^2) q_k

    and, for odd ``n``, with the extra coordinate of coefficient
    ``a_{k+1}``::

        sum_{i<=k} (b_i^2 / a_i^2) q_i = (k / a_{k+1}^2) x_n^2

    In 3-space with a timelike tangent the equation is
    ``(ktilde_2^2 / ktilde_1^2)(-x_1^2 + x_2^2) = x_3^2 / (1 - ktilde_1^2 - ktilde_2^2)``.

    Parameters
    ----------
    c : `SampledCurve`
        Curve in normal coordinates, parametrized by ``sigma``.
    spec : `SelfSimilarSpec`
        Its invariants.

    Returns
    -------
    residual : `float`
        Largest value of ``|lhs - rhs| / exp(2 ktilde_1 sigma)``.

    Raises
    ------
    InfeasibleSpecError
        Raised in the plane, where there is no such hypersurface.
    """
    if c.dim != spec.dim:
        raise DimensionMismatchError(f"Curve in {c.dim}-space does not match a {spec.dim}-space spec")
    if spec.dim == 2:
        raise InfeasibleSpecError("A plane self-similar curve does not lie on a quadric hypersurface")
    kappa = spec.ktilde[0]
    normalization = np.exp(2.0 * kappa * c.params)
    x = c.points
    if spec.dim == 3 and spec.case is CausalCase.E1_TIMELIKE:
        k1, k2 = spec.ktilde
        denominator = 1.0 - k1**2 - k2**2
        if denominator <= 0:
            raise InfeasibleSpecError("Need ktilde_1^2 + ktilde_2^2 < 1")
        lhs = (k2**2 / k1**2) * (-(x[:, 0] ** 2) + x[:, 1] ** 2)
        rhs = x[:, 2] ** 2 / denominator
        return float(np.max(np.abs(lhs - rhs) / normalization))

    forms = _block_quadratics(x, eigenstructure(spec).blocks)
    difference = sum(forms[:-1]) - (len(forms) - 1) * forms[-1]
    return float(np.max(np.abs(difference) / normalization))


def exponential_rate(c: SampledCurve) -> float:
    """Return the growth rate of the Lorentzian norm along a curve.

    Fits ``log sqrt|alpha . alpha|`` linearly against the curve parameter;
    for a self-similar curve in normal coordinates the slope is
    ``ktilde_1``.
    """
    norm = np.sqrt(np.abs(inner_many(c.points, c.points)))
    slope, _ = np.polyfit(c.params, np.log(norm), 1)
    return float(slope)


@dataclass(frozen=True)
class SelfSimilarReport:
    """Result of `verify_selfsimilar`."""

    deviations: tuple[float, ...]
    """Largest deviation of each p-shape curvature from its constant."""

    causal_match: bool
    """Whether the tangent has the causal character of the spec."""

    shifts: tuple[dict[str, Any], ...]
    """Outcome of matching the curve against shifted copies of itself."""

    tolerance: float
    """Threshold for the deviations."""

    @property
    def max_deviation(self) -> float:
        """Largest of `deviations` (`float`)."""
        return max(self.deviations)

    @property
    def passed(self) -> bool:
        """Whether every check succeeded (`bool`)."""
        return (
            self.causal_match
            and self.max_deviation <= self.tolerance
            and all(s["matched"] for s in self.shifts)
        )

    def to_dict(self) -> dict[str, Any]:
        """Return the report as plain Python types."""
        return {
            "deviations": list(self.deviations),
            "max_deviation": self.max_deviation,
            "causal_match": self.causal_match,
            "shifts": list(self.shifts),
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def verify_selfsimilar(
    c: SampledCurve,
    spec: SelfSimilarSpec,
    shifts: Iterable[float] = (0.2,),
    tolerance: float = 1e-5,
) -> SelfSimilarReport:
    """Check that a curve is self-similar with the given invariants.

    Parameters
    ----------
    c : `SampledCurve`
        Curve to check.
    spec : `SelfSimilarSpec`
        Expected invariants.
    shifts : `~collections.abc.Iterable` [`float`], optional
        Shifts of the spherical parameter; for each the curve is matched
        against its copy shifted by (approximately) that amount.
    tolerance : `float`, optional
        Largest accepted deviation of the invariants.

    Returns
    -------
    report : `SelfSimilarReport`
        Invariant deviations and matching outcomes.
    """
    if c.dim != spec.dim:
        raise DimensionMismatchError(f"Curve in {c.dim}-space does not match a {spec.dim}-space spec")
    field = frenet(c)
    signature = pshape(field)
    keep = signature.confident
    deviations = tuple(
        float(np.max(np.abs(signature.ktilde[keep, i] - spec.ktilde[i]))) for i in range(spec.dim - 1)
    )
    expected_sign = -1.0 if spec.case is CausalCase.E1_TIMELIKE else 1.0
    causal_match = bool(field.signs[0] == expected_sign)

    results = []
    sigma = signature.sigma
    step = float(np.mean(np.diff(sigma)))
    for shift in shifts:
        d = int(round(shift / step))
        if d <= 0 or field.params.size - d < 4 * (spec.dim + 1):
            raise InfeasibleParametersError(f"Shift {shift} does not fit in the sampled range")
        first = c.subcurve(0, c.size - d)
        second = c.subcurve(d, c.size)
        try:
            report = match_curves(first, second)
        except ResidualTooLargeError as e:
            log.info("Shift %g failed: %s", shift, e)
            results.append(
                {"shift": float(sigma[d] - sigma[0]), "matched": False, "mu": None, "residual": None}
            )
            continue
        results.append(
            {
                "shift": float(sigma[d] - sigma[0]),
                "matched": report.matched,
                "mu": report.recovered.mu if report.recovered is not None else None,
                "residual": report.residual,
            }
        )
    return SelfSimilarReport(deviations, causal_match, tuple(results), tolerance)
