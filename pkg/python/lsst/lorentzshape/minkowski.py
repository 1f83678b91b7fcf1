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

"""Linear algebra of Minkowski space with signature (-, +, ..., +)."""

from __future__ import annotations

__all__ = (
    "AngleKind",
    "CausalCharacter",
    "LorentzVector",
    "Orientation",
    "PSimilarity",
    "angle_between",
    "apply",
    "causal_classify",
    "compose",
    "gram_schmidt",
    "inner",
    "inner_many",
    "metric",
    "pseudo_orthonormality_residual",
    "random_pseudo_orthogonal",
    "random_psimilarity",
)

import enum
import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt

from ._exceptions import (
    AngleCaseUndefinedError,
    DimensionMismatchError,
    InvalidSimilarityError,
    LightlikeFrameVectorError,
    LightlikeInputError,
)
from .config import get_config

log = logging.getLogger(__name__)


class CausalCharacter(enum.Enum):
    """Causal character of a vector."""

    TIMELIKE = "timelike"
    SPACELIKE = "spacelike"
    LIGHTLIKE = "lightlike"


class AngleKind(enum.Enum):
    """Kind of angle returned by `angle_between`."""

    HYPERBOLIC = "hyperbolic"
    CIRCULAR = "circular"


class Orientation(enum.Enum):
    """Orientation behavior of a pseudo-similarity."""

    PRESERVING = "preserving"
    REVERSING = "reversing"


def metric(n: int) -> np.ndarray:
    """Return the metric ``diag(-1, 1, ..., 1)`` of Minkowski n-space.

    Parameters
    ----------
    n : `int`
        Dimension of the space. Must be at least 2.

    Returns
    -------
    g : `numpy.ndarray`
        Diagonal ``n x n`` metric matrix.
    """
    if n < 2:
        raise DimensionMismatchError(f"Minkowski space needs dimension >= 2, got {n}")
    g = np.eye(n)
    g[0, 0] = -1.0
    return g


def _as_array(x: Any) -> np.ndarray:
    if isinstance(x, LorentzVector):
        return x.components
    return np.asarray(x, dtype=float)


@dataclass(frozen=True, eq=False)
class LorentzVector:
    """A vector of Minkowski n-space.

    Index 0 is the timelike axis. The components are stored in a read-only
    array.
    """

    components: np.ndarray

    def __post_init__(self) -> None:
        components = np.array(self.components, dtype=float)
        if components.ndim != 1 or components.size < 2:
            raise DimensionMismatchError(
                f"A Lorentz vector needs a one dimensional array of length >= 2, got shape {components.shape}"
            )
        components.flags.writeable = False
        object.__setattr__(self, "components", components)

    def __array__(self, dtype: Any = None, copy: bool | None = None) -> np.ndarray:
        if dtype is None:
            return self.components
        return self.components.astype(dtype)

    def __repr__(self) -> str:
        return f"LorentzVector({self.components.tolist()})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LorentzVector):
            return NotImplemented
        return bool(np.array_equal(self.components, other.components))

    def __hash__(self) -> int:
        return hash(self.components.tobytes())

    @property
    def dim(self) -> int:
        """Dimension of the ambient space (`int`)."""
        return self.components.size

    def inner(self, other: LorentzVector | npt.ArrayLike) -> float:
        """Lorentzian inner product with another vector."""
        return inner(self, other)

    def causal_character(self, tol: float | None = None) -> CausalCharacter:
        """Causal character of this vector, see `causal_classify`."""
        return causal_classify(self, tol)

    @property
    def norm(self) -> float:
        """Lorentzian norm ``sqrt(|x.x|)`` (`float`)."""
        return math.sqrt(abs(inner(self, self)))


def inner(x: LorentzVector | npt.ArrayLike, y: LorentzVector | npt.ArrayLike) -> float:
    """Compute the Lorentzian inner product ``-x0 y0 + sum(xi yi)``.

    Parameters
    ----------
    x : `LorentzVector` or array-like
        First vector.
    y : `LorentzVector` or array-like
        Second vector.

    Returns
    -------
    product : `float`
        The inner product.

    Raises
    ------
    DimensionMismatchError
        Raised if the two vectors have different lengths.
    """
    xa = _as_array(x)
    ya = _as_array(y)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise DimensionMismatchError(f"Cannot take inner product of shapes {xa.shape} and {ya.shape}")
    return float(np.dot(xa, ya) - 2.0 * xa[0] * ya[0])


def inner_many(x: npt.ArrayLike, y: npt.ArrayLike) -> np.ndarray:
    """Lorentzian inner product along the last axis of two arrays.

    Parameters
    ----------
    x : array-like
        Array of shape ``(..., n)``.
    y : array-like
        Array broadcastable against ``x``.

    Returns
    -------
    products : `numpy.ndarray`
        Array of shape ``(...)``.
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape[-1] != ya.shape[-1]:
        raise DimensionMismatchError(f"Last axes differ: {xa.shape[-1]} != {ya.shape[-1]}")
    return np.einsum("...i,...i->...", xa, ya) - 2.0 * xa[..., 0] * ya[..., 0]


def causal_classify(x: LorentzVector | npt.ArrayLike, tol: float | None = None) -> CausalCharacter:
    """Classify a vector by the sign of its Lorentzian square.

    Parameters
    ----------
    x : `LorentzVector` or array-like
        Vector to classify.
    tol : `float`, optional
        Tolerance relative to the Euclidean squared norm. Defaults to the
        configured lightlike tolerance.

    Returns
    -------
    character : `CausalCharacter`
        Timelike if ``x.x < -tol |x|^2``, spacelike if ``x.x > tol |x|^2``,
        lightlike otherwise. The zero vector is lightlike.
    """
    if tol is None:
        tol = get_config().lightlike_tol
    if tol < 0:
        raise ValueError(f"Tolerance must be non-negative, got {tol}")
    xa = _as_array(x)
    q = inner(xa, xa)
    scale = tol * float(np.dot(xa, xa))
    if q < -scale:
        return CausalCharacter.TIMELIKE
    if q > scale:
        return CausalCharacter.SPACELIKE
    return CausalCharacter.LIGHTLIKE


def angle_between(
    x: LorentzVector | npt.ArrayLike, y: LorentzVector | npt.ArrayLike, tol: float | None = None
) -> tuple[float, AngleKind]:
    """Compute the angle between two non-lightlike vectors.

    Parameters
    ----------
    x : `LorentzVector` or array-like
        First vector.
    y : `LorentzVector` or array-like
        Second vector.
    tol : `float`, optional
        Lightlike tolerance, also used to decide whether a spacelike pair
        sits on the boundary between the circular and hyperbolic cases.

    Returns
    -------
    angle : `float`
        Non-negative angle.
    kind : `AngleKind`
        Hyperbolic for timelike pairs in the same timecone and for
        spacelike pairs with ``|x.y| > |x||y|``, circular for spacelike
        pairs with ``|x.y| < |x||y|``.

    Raises
    ------
    LightlikeInputError
        Raised if either vector is lightlike.
    AngleCaseUndefinedError
        Raised for timelike vectors in opposite timecones, for mixed causal
        characters and for spacelike pairs with ``|x.y| = |x||y|``.
    """
    if tol is None:
        tol = get_config().lightlike_tol
    xa = _as_array(x)
    ya = _as_array(y)
    cx = causal_classify(xa, tol)
    cy = causal_classify(ya, tol)
    if CausalCharacter.LIGHTLIKE in (cx, cy):
        raise LightlikeInputError("Angles are not defined for lightlike vectors")
    if cx != cy:
        raise AngleCaseUndefinedError(f"No angle between a {cx.value} and a {cy.value} vector")

    p = inner(xa, ya)
    scale = math.sqrt(abs(inner(xa, xa))) * math.sqrt(abs(inner(ya, ya)))

    if cx is CausalCharacter.TIMELIKE:
        if p >= 0.0:
            raise AngleCaseUndefinedError("Timelike vectors lie in opposite timecones")
        return float(np.arccosh(max(-p / scale, 1.0))), AngleKind.HYPERBOLIC

    ratio = abs(p) / scale
    if abs(ratio - 1.0) <= max(tol, 1e-12):
        raise AngleCaseUndefinedError("Spacelike vectors span a degenerate plane")
    if ratio < 1.0:
        return float(np.arccos(np.clip(p / scale, -1.0, 1.0))), AngleKind.CIRCULAR
    return float(np.arccosh(ratio)), AngleKind.HYPERBOLIC


@dataclass(frozen=True, eq=False)
class PSimilarity:
    """The map ``f(x) = mu A x + b`` with ``A`` pseudo-orthogonal of unit
    determinant.

    Parameters
    ----------
    mu : `float`
        Non-zero scale factor.
    A : `numpy.ndarray`
        ``n x n`` matrix with ``A^T G A = G``.
    b : `numpy.ndarray`
        Translation vector.
    """

    mu: float
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        mu = float(self.mu)
        if mu == 0.0 or not math.isfinite(mu):
            raise InvalidSimilarityError(f"Scale factor must be finite and non-zero, got {mu}")
        a = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
            raise DimensionMismatchError(f"Linear part must be a square matrix of size >= 2, got {a.shape}")
        if b.shape != (a.shape[0],):
            raise DimensionMismatchError(f"Translation of shape {b.shape} does not match matrix {a.shape}")
        tol = get_config().frame_tol
        g = metric(a.shape[0])
        drift = float(np.max(np.abs(a.T @ g @ a - g)))
        if not drift <= tol:
            raise InvalidSimilarityError(f"Linear part is not pseudo-orthogonal (residual {drift:.3g})")
        det = float(np.linalg.det(a))
        if not abs(det - 1.0) <= tol:
            raise InvalidSimilarityError(f"Linear part must have unit determinant, got {det:.12g}")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def identity(cls, n: int) -> PSimilarity:
        """Return the identity map of n-space."""
        return cls(1.0, np.eye(n), np.zeros(n))

    @property
    def dim(self) -> int:
        """Dimension of the space acted on (`int`)."""
        return self.A.shape[0]

    @property
    def orientation(self) -> Orientation:
        """Whether the map preserves orientation (`Orientation`)."""
        if self.dim % 2 == 1 and self.mu < 0:
            return Orientation.REVERSING
        return Orientation.PRESERVING

    def linear(self, u: LorentzVector | npt.ArrayLike) -> np.ndarray:
        """Apply the induced linear map ``mu A`` to displacement vectors.

        Parameters
        ----------
        u : `LorentzVector` or array-like
            A vector or an array of shape ``(m, n)``.

        Returns
        -------
        image : `numpy.ndarray`
            Image with the shape of the input.
        """
        ua = _as_array(u)
        if ua.shape[-1] != self.dim:
            raise DimensionMismatchError(f"Cannot map a vector of length {ua.shape[-1]} in {self.dim}-space")
        return self.mu * ua @ self.A.T

    def apply(self, x: LorentzVector | npt.ArrayLike) -> np.ndarray:
        """Apply the map to a point or to an ``(m, n)`` array of points."""
        return self.linear(x) + self.b

    def apply_many(self, points: npt.ArrayLike) -> np.ndarray:
        """Apply the map to every row of ``points``."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2:
            raise DimensionMismatchError(f"Expected an (m, n) array of points, got shape {pts.shape}")
        return self.apply(pts)

    def compose(self, other: PSimilarity) -> PSimilarity:
        """Return ``self o other``."""
        if other.dim != self.dim:
            raise DimensionMismatchError(f"Cannot compose maps of {self.dim}-space and {other.dim}-space")
        return PSimilarity(
            self.mu * other.mu,
            self.A @ other.A,
            self.mu * self.A @ other.b + self.b,
        )

    def inverse(self) -> PSimilarity:
        """Return the inverse map."""
        g = metric(self.dim)
        a_inv = g @ self.A.T @ g
        return PSimilarity(1.0 / self.mu, a_inv, -(a_inv @ self.b) / self.mu)

    def to_dict(self) -> dict[str, Any]:
        """Serialize to plain Python types.

        Returns
        -------
        data : `dict`
            Keys ``mu``, ``A`` (row-major nested lists) and ``b``.
        """
        return {"mu": self.mu, "A": self.A.tolist(), "b": self.b.tolist()}


def apply(f: PSimilarity, x: LorentzVector | npt.ArrayLike) -> LorentzVector:
    """Apply a pseudo-similarity to a single point.

    Parameters
    ----------
    f : `PSimilarity`
        The map.
    x : `LorentzVector` or array-like
        The point.

    Returns
    -------
    image : `LorentzVector`
        ``mu A x + b``.
    """
    xa = _as_array(x)
    if xa.ndim != 1:
        raise DimensionMismatchError(f"Expected a single point, got shape {xa.shape}")
    return LorentzVector(f.apply(xa))


def compose(f: PSimilarity, g: PSimilarity) -> PSimilarity:
    """Return the composition ``f o g``."""
    return f.compose(g)


def random_pseudo_orthogonal(
    n: int, seed: int | np.random.Generator | None = None, *, max_rapidity: float = 1.0
) -> np.ndarray:
    """Generate a random proper orthochronous Lorentz matrix.

    The matrix is a product of rotations in every spatial coordinate plane
    followed by boosts in every plane containing the time axis.

    Parameters
    ----------
    n : `int`
        Dimension, at least 2.
    seed : `int` or `numpy.random.Generator`, optional
        Seed or generator for the random draws.
    max_rapidity : `float`, optional
        Boost rapidities are drawn uniformly from
        ``[-max_rapidity, max_rapidity]``.

    Returns
    -------
    A : `numpy.ndarray`
        ``n x n`` matrix with ``A^T G A = G`` and ``det A = 1`` that maps
        the future timecone onto itself.
    """
    if n < 2:
        raise DimensionMismatchError(f"Minkowski space needs dimension >= 2, got {n}")
    rng = np.random.default_rng(seed)
    a = np.eye(n)
    for i in range(1, n):
        for j in range(i + 1, n):
            angle = rng.uniform(-math.pi, math.pi)
            rot = np.eye(n)
            rot[i, i] = rot[j, j] = math.cos(angle)
            rot[i, j] = -math.sin(angle)
            rot[j, i] = math.sin(angle)
            a = rot @ a
    for j in range(1, n):
        rapidity = rng.uniform(-max_rapidity, max_rapidity) if max_rapidity > 0 else 0.0
        boost = np.eye(n)
        boost[0, 0] = boost[j, j] = math.cosh(rapidity)
        boost[0, j] = boost[j, 0] = math.sinh(rapidity)
        a = boost @ a
    return a


def random_psimilarity(
    n: int,
    seed: int | np.random.Generator | None = None,
    *,
    mu_range: tuple[float, float] = (0.5, 3.0),
    max_rapidity: float = 1.0,
    translation_scale: float = 1.0,
) -> PSimilarity:
    """Generate a random pseudo-similarity with positive scale.

    Parameters
    ----------
    n : `int`
        Dimension.
    seed : `int` or `numpy.random.Generator`, optional
        Seed or generator.
    mu_range : `tuple` [`float`, `float`], optional
        Interval the scale is drawn from.
    max_rapidity : `float`, optional
        Passed to `random_pseudo_orthogonal`.
    translation_scale : `float`, optional
        Standard deviation of the translation components.

    Returns
    -------
    f : `PSimilarity`
        The random map.
    """
    rng = np.random.default_rng(seed)
    a = random_pseudo_orthogonal(n, rng, max_rapidity=max_rapidity)
    mu = rng.uniform(*mu_range)
    b = rng.normal(scale=translation_scale, size=n)
    return PSimilarity(mu, a, b)


def gram_schmidt(rows: npt.ArrayLike, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Pseudo-orthonormalize vectors with respect to the Lorentzian metric.

    Vectors are processed in order; each residual is normalized by
    ``sqrt(|r.r|)`` and keeps its own sign.

    Parameters
    ----------
    rows : array-like
        Array of shape ``(..., k, n)`` holding ``k`` vectors per frame.
    tol : `float`, optional
        Lightlike tolerance applied to the residuals.

    Returns
    -------
    frame : `numpy.ndarray`
        Pseudo-orthonormal vectors, same shape as ``rows``.
    signs : `numpy.ndarray`
        Signs ``e_i.e_i`` of shape ``(..., k)``.

    Raises
    ------
    LightlikeFrameVectorError
        Raised if a residual is lightlike.
    """
    if tol is None:
        tol = get_config().lightlike_tol
    vectors = np.array(rows, dtype=float)
    k = vectors.shape[-2]
    frame = np.empty_like(vectors)
    signs = np.empty(vectors.shape[:-1])
    for i in range(k):
        r = vectors[..., i, :].copy()
        for j in range(i):
            coeff = inner_many(r, frame[..., j, :]) * signs[..., j]
            r -= coeff[..., np.newaxis] * frame[..., j, :]
        q = inner_many(r, r)
        if np.any(np.abs(q) <= tol * np.einsum("...i,...i->...", r, r)):
            raise LightlikeFrameVectorError(f"Gram-Schmidt residual {i} is lightlike")
        frame[..., i, :] = r / np.sqrt(np.abs(q))[..., np.newaxis]
        signs[..., i] = np.sign(q)
    return frame, signs


def pseudo_orthonormality_residual(frame: npt.ArrayLike, signs: npt.ArrayLike) -> float:
    """Return ``max |W G W^T - diag(signs)|`` over a batch of frames.

    Parameters
    ----------
    frame : array-like
        Frames of shape ``(..., n, n)`` with the vectors as rows.
    signs : array-like
        Expected signs, shape ``(n,)`` or ``(..., n)``.

    Returns
    -------
    residual : `float`
        Largest deviation.
    """
    w = np.asarray(frame, dtype=float)
    g = metric(w.shape[-1])
    gram = w @ g @ np.swapaxes(w, -1, -2)
    expected = np.asarray(signs, dtype=float)[..., np.newaxis] * np.eye(w.shape[-1])
    return float(np.max(np.abs(gram - expected)))
