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

__all__ = ("ShapeConfig", "get_config")

import math
import os
from functools import cache


def _float_from_environment(env_var: str, default_value: float) -> float:
    """Convert and return a tolerance from the value of an environment
    variable or a default value if the environment variable is not
    initialized. The value of `env_var` must be a valid positive `float`
    otherwise this function raises.

    Parameters
    ----------
    env_var : `str`
        Environment variable to look for.
    default_value : `float`
        Value to return if `env_var` is not defined in the environment.

    Returns
    -------
    value : `float`
        Converted value.
    """
    try:
        value = float(os.environ.get(env_var, default_value))
    except ValueError:
        raise ValueError(
            f"Expecting valid floating point value in environment variable {env_var} but found "
            f"{os.environ.get(env_var)}"
        ) from None

    if math.isnan(value):
        raise ValueError(f"Unexpected value NaN found in environment variable {env_var}")
    if value <= 0.0:
        raise ValueError(f"Value in environment variable {env_var} must be positive, got {value}")

    return value


class ShapeConfig:
    """Tolerances used throughout the package.

    Every value can be overridden with an environment variable named
    ``LSST_LORENTZSHAPE_<NAME>`` where ``<NAME>`` is the upper-cased
    attribute name, e.g. ``LSST_LORENTZSHAPE_MATCH_THRESHOLD``.
    Values are read on first access and cached.
    """

    # Relative tolerance separating lightlike vectors from the others.
    DEFAULT_LIGHTLIKE_TOL: float = 1e-9

    # Max-norm tolerance on pseudo-orthogonality and unit determinant.
    DEFAULT_FRAME_TOL: float = 1e-9

    # Smallest first curvature, scaled to unit arc length, for which the
    # spherical parameter is defined.
    DEFAULT_KAPPA_MIN: float = 1e-8

    # Focal curvatures smaller than this times max |m_1| count as vanishing.
    DEFAULT_FOCAL_TOL: float = 1e-6

    # Relative size of a Gram-Schmidt residual below which a derivative
    # is treated as dependent on the lower ones.
    DEFAULT_DEGENERACY_TOL: float = 1e-6

    # Fixed RK4 step for frame integration.
    DEFAULT_STEP: float = 1e-3

    # Signature distance below which two curves are considered similar.
    DEFAULT_MATCH_THRESHOLD: float = 1e-4

    # Largest acceptable sup-norm residual of a recovered similarity.
    DEFAULT_RESIDUAL_TOL: float = 1e-5

    # Relative tolerance for pairing eigenvalues of M squared.
    DEFAULT_CLUSTER_TOL: float = 1e-8

    _NAMES = (
        "lightlike_tol",
        "frame_tol",
        "kappa_min",
        "focal_tol",
        "degeneracy_tol",
        "step",
        "match_threshold",
        "residual_tol",
        "cluster_tol",
    )

    def __init__(self) -> None:
        self._values: dict[str, float] = {}

    def _get(self, name: str) -> float:
        if name not in self._values:
            default = getattr(self, f"DEFAULT_{name.upper()}")
            self._values[name] = _float_from_environment(f"LSST_LORENTZSHAPE_{name.upper()}", default)
        return self._values[name]

    @property
    def lightlike_tol(self) -> float:
        """Relative tolerance used by causal classification."""
        return self._get("lightlike_tol")

    @property
    def frame_tol(self) -> float:
        """Tolerance on pseudo-orthogonality of matrices and frames."""
        return self._get("frame_tol")

    @property
    def kappa_min(self) -> float:
        """Smallest scale-free first curvature accepted."""
        return self._get("kappa_min")

    @property
    def focal_tol(self) -> float:
        """Size of a vanishing focal curvature, relative to ``max |m_1|``."""
        return self._get("focal_tol")

    @property
    def degeneracy_tol(self) -> float:
        """Relative residual below which a derivative jet degenerates."""
        return self._get("degeneracy_tol")

    @property
    def step(self) -> float:
        """Default integrator step in the spherical parameter."""
        return self._get("step")

    @property
    def match_threshold(self) -> float:
        """Default signature distance threshold for matching."""
        return self._get("match_threshold")

    @property
    def residual_tol(self) -> float:
        """Default residual tolerance for a recovered similarity."""
        return self._get("residual_tol")

    @property
    def cluster_tol(self) -> float:
        """Relative eigenvalue clustering tolerance."""
        return self._get("cluster_tol")

    def as_dict(self) -> dict[str, float]:
        """Return all tolerances.

        Returns
        -------
        values : `dict` [`str`, `float`]
            Mapping of tolerance name to value.
        """
        return {name: self._get(name) for name in self._NAMES}


@cache
def get_config() -> ShapeConfig:
    """Return the process-wide configuration.

    Returns
    -------
    config : `ShapeConfig`
        Shared configuration instance. Call ``get_config.cache_clear()``
        to pick up a change in the environment.
    """
    return ShapeConfig()
