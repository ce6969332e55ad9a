# Copyright 2021 - 2023 Universität Tübingen, DKFZ, EMBL, and Universität zu Köln
# for the German Human Genome-Phenome Archive (GHGA)
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Manufactured benchmark problems and error norms"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from fdw.core.errors import ConfigurationError, UsageError
from fdw.core.geometry import (
    DEFAULT_POLYGON,
    DiskDomain,
    Domain,
    PolygonDomain,
    RectangleDomain,
)
from fdw.core.specfun import gamma

Times = Union[float, np.ndarray]
SpatialFunction = Callable[[np.ndarray], np.ndarray]


class TestProblem(ABC):
    """An initial-boundary value problem with known solution.

    The forcing is derived from the solution, so that
    D_t^alpha u = kappa lap(u) + g holds exactly.
    """

    __test__ = False

    domain: Domain
    alpha: float
    kappa: float

    @abstractmethod
    def exact(self, points: np.ndarray, t: float) -> np.ndarray:
        """Exact solution at the points."""
        ...

    @abstractmethod
    def laplacian(self, points: np.ndarray, t: float) -> np.ndarray:
        """Spatial Laplacian of the exact solution."""
        ...

    @abstractmethod
    def gradient(self, points: np.ndarray, t: float) -> np.ndarray:
        """Spatial gradient of the exact solution, shape (..., 2)."""
        ...

    @abstractmethod
    def time_derivative(self, points: np.ndarray, t: float) -> np.ndarray:
        """First time derivative of the exact solution."""
        ...

    @abstractmethod
    def second_time_derivative(self, points: np.ndarray, t: Times) -> np.ndarray:
        """Second time derivative; an array of times adds a leading axis."""
        ...

    @abstractmethod
    def caputo_derivative(self, points: np.ndarray, t: float) -> np.ndarray:
        """Caputo derivative of order alpha in closed form."""
        ...

    def forcing(self, points: np.ndarray, t: float) -> np.ndarray:
        """Source term g."""
        caputo = self.caputo_derivative(points, t)
        return caputo - self.kappa * self.laplacian(points, t)

    def initial_value(self, points: np.ndarray) -> np.ndarray:
        """phi"""
        return self.exact(points, 0.0)

    def initial_velocity(self, points: np.ndarray) -> np.ndarray:
        """psi"""
        return self.time_derivative(points, 0.0)

    def boundary_value(self, points: np.ndarray, t: float) -> np.ndarray:
        """Dirichlet data."""
        return self.exact(points, t)

    def normal_derivative(
        self, points: np.ndarray, normals: np.ndarray, t: float
    ) -> np.ndarray:
        """Normal derivative of the exact solution."""
        return np.sum(self.gradient(points, t) * normals, axis=-1)


@dataclass(frozen=True)
class SeparableProblem(TestProblem):
    """u(x, y, t) = X(x, y) t^p.

    The exponent must be 0, 1 or larger than 1 for the solution to have an
    integrable second time derivative.
    """

    name: str
    domain: Domain
    alpha: float
    exponent: float
    profile: SpatialFunction
    profile_laplacian: SpatialFunction
    profile_gradient: SpatialFunction
    kappa: float = 1.0

    def __post_init__(self):
        if not 1.0 < self.alpha < 2.0:
            raise ConfigurationError(
                parameter="alpha",
                reason=f"{self.alpha} is outside of the open interval (1, 2).",
            )
        if not (self.exponent in (0.0, 1.0) or self.exponent > 1.0):
            raise ConfigurationError(
                parameter="exponent", reason=f"{self.exponent} is not 0, 1 or above 1."
            )
        if not self.kappa > 0:
            raise ConfigurationError(
                parameter="kappa", reason=f"{self.kappa} is not positive."
            )

    @property
    def _is_linear(self) -> bool:
        return self.exponent in (0.0, 1.0)

    def _temporal(self, t: Times) -> np.ndarray:
        return np.asarray(t, dtype=float) ** self.exponent

    def _temporal_derivative(self, t: float) -> float:
        if self.exponent == 0.0:
            return 0.0
        return self.exponent * t ** (self.exponent - 1.0)

    def _temporal_second_derivative(self, t: Times) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self._is_linear:
            return np.zeros_like(t)
        return self.exponent * (self.exponent - 1.0) * t ** (self.exponent - 2.0)

    def _temporal_caputo(self, t: float) -> float:
        if self._is_linear:
            return 0.0
        p = self.exponent
        return gamma(p + 1.0) / gamma(p + 1.0 - self.alpha) * t ** (p - self.alpha)

    def exact(self, points: np.ndarray, t: float) -> np.ndarray:
        """X(x, y) t^p"""
        return self.profile(points) * self._temporal(t)

    def laplacian(self, points: np.ndarray, t: float) -> np.ndarray:
        """lap(X) t^p"""
        return self.profile_laplacian(points) * self._temporal(t)

    def gradient(self, points: np.ndarray, t: float) -> np.ndarray:
        """grad(X) t^p"""
        return self.profile_gradient(points) * self._temporal(t)

    def time_derivative(self, points: np.ndarray, t: float) -> np.ndarray:
        """X p t^(p-1)"""
        return self.profile(points) * self._temporal_derivative(t)

    def second_time_derivative(self, points: np.ndarray, t: Times) -> np.ndarray:
        """X p (p-1) t^(p-2)"""
        return np.multiply.outer(
            self._temporal_second_derivative(t), self.profile(points)
        )

    def caputo_derivative(self, points: np.ndarray, t: float) -> np.ndarray:
        """X Gamma(p+1)/Gamma(p+1-alpha) t^(p-alpha)"""
        return self.profile(points) * self._temporal_caputo(t)


def _x(points: np.ndarray) -> np.ndarray:
    return np.asarray(points, dtype=float)[..., 0]


def _y(points: np.ndarray) -> np.ndarray:
    return np.asarray(points, dtype=float)[..., 1]


def problem_1(alpha: float, *, kappa: float = 1.0) -> SeparableProblem:
    """u = t^(2+alpha) sin(x) sin(y) on [0, pi]^2."""

    def gradient(points: np.ndarray) -> np.ndarray:
        x, y = _x(points), _y(points)
        return np.stack((np.cos(x) * np.sin(y), np.sin(x) * np.cos(y)), axis=-1)

    return SeparableProblem(
        name="problem_1",
        domain=RectangleDomain(x0=0.0, y0=0.0, x1=math.pi, y1=math.pi),
        alpha=alpha,
        exponent=2.0 + alpha,
        profile=lambda points: np.sin(_x(points)) * np.sin(_y(points)),
        profile_laplacian=lambda points: -2.0 * np.sin(_x(points)) * np.sin(_y(points)),
        profile_gradient=gradient,
        kappa=kappa,
    )


def problem_2(alpha: float, *, kappa: float = 1.0) -> SeparableProblem:
    """u = t^2 exp(x + y) on the unit disk."""

    def gradient(points: np.ndarray) -> np.ndarray:
        value = np.exp(_x(points) + _y(points))
        return np.stack((value, value), axis=-1)

    return SeparableProblem(
        name="problem_2",
        domain=DiskDomain(cx=0.0, cy=0.0, radius=1.0),
        alpha=alpha,
        exponent=2.0,
        profile=lambda points: np.exp(_x(points) + _y(points)),
        profile_laplacian=lambda points: 2.0 * np.exp(_x(points) + _y(points)),
        profile_gradient=gradient,
        kappa=kappa,
    )


def problem_3(
    alpha: float,
    stand_in: Optional[PolygonDomain] = None,
    *,
    kappa: float = 1.0,
) -> SeparableProblem:
    """u = t^2 cos(pi (x + y)) on a polygon, by default an L-shaped hexagon."""

    def gradient(points: np.ndarray) -> np.ndarray:
        value = -math.pi * np.sin(math.pi * (_x(points) + _y(points)))
        return np.stack((value, value), axis=-1)

    return SeparableProblem(
        name="problem_3",
        domain=(
            PolygonDomain(vertices=DEFAULT_POLYGON) if stand_in is None else stand_in
        ),
        alpha=alpha,
        exponent=2.0,
        profile=lambda points: np.cos(math.pi * (_x(points) + _y(points))),
        profile_laplacian=lambda points: -2.0
        * math.pi**2
        * np.cos(math.pi * (_x(points) + _y(points))),
        profile_gradient=gradient,
        kappa=kappa,
    )


def get_problem(
    problem_id: int,
    alpha: float,
    *,
    polygon: Optional[PolygonDomain] = None,
    kappa: float = 1.0,
) -> SeparableProblem:
    """Look up one of the three benchmark problems by its number."""
    if problem_id == 1:
        return problem_1(alpha, kappa=kappa)
    if problem_id == 2:
        return problem_2(alpha, kappa=kappa)
    if problem_id == 3:
        return problem_3(alpha, polygon, kappa=kappa)
    raise ConfigurationError(
        parameter="problem", reason=f"unknown problem {problem_id}, expected 1, 2 or 3."
    )


def _check_lengths(numeric: np.ndarray, exact: np.ndarray, operation: str):
    numeric = np.asarray(numeric, dtype=float).ravel()
    exact = np.asarray(exact, dtype=float).ravel()
    if numeric.shape != exact.shape or numeric.size == 0:
        raise UsageError(
            operation=operation,
            reason=f"got {numeric.size} numeric and {exact.size} exact values.",
        )
    return numeric, exact


def rms_error(numeric: np.ndarray, exact: np.ndarray) -> float:
    """Root mean square of the pointwise errors."""
    numeric, exact = _check_lengths(numeric, exact, "rms_error")
    return float(np.sqrt(np.mean((numeric - exact) ** 2)))


def mean_relative_error(
    numeric: np.ndarray, exact: np.ndarray, *, floor: float = 1e-12
) -> float:
    """Mean of |u - u_exact|/|u_exact| over points where |u_exact| exceeds the floor."""
    numeric, exact = _check_lengths(numeric, exact, "mean_relative_error")
    significant = np.abs(exact) > floor
    if not np.any(significant):
        return 0.0
    relative = np.abs(numeric - exact)[significant] / np.abs(exact[significant])
    return float(np.mean(relative))


def numerical_caputo(
    second_derivative: Callable[[np.ndarray], np.ndarray],
    t: float,
    alpha: float,
    *,
    nodes: int = 10_000,
    grading: float = 2.0,
) -> np.ndarray:
    """Caputo derivative of order 1 < alpha < 2 by product-trapezoid quadrature.

    The second derivative is interpolated linearly on a mesh graded towards
    s = 0 and integrated exactly against the kernel (t - s)^(1 - alpha).
    `second_derivative` maps an array of times to an array with the times on
    the leading axis.
    """
    if t <= 0:
        return np.zeros_like(np.asarray(second_derivative(np.zeros(1)), dtype=float)[0])
    beta = 2.0 - alpha
    mesh = t * (np.arange(nodes + 1) / nodes) ** grading
    values = np.asarray(second_derivative(mesh), dtype=float)
    remaining = t - mesh
    moment0 = (remaining[:-1] ** beta - remaining[1:] ** beta) / beta
    moment1 = (remaining[:-1] ** (beta + 1) - remaining[1:] ** (beta + 1)) / (beta + 1)
    # integral of (s - s_j) (t - s)^(1 - alpha) over each interval
    linear = remaining[:-1] * moment0 - moment1
    shape = (-1,) + (1,) * (values.ndim - 1)
    slopes = np.diff(values, axis=0) / np.diff(mesh).reshape(shape)
    integral = np.sum(
        values[:-1] * moment0.reshape(shape) + slopes * linear.reshape(shape), axis=0
    )
    return integral / gamma(beta)


def pde_residual(
    problem: TestProblem, points: np.ndarray, t: float, *, nodes: int = 10_000
) -> np.ndarray:
    """D_t^alpha u - kappa lap(u) - g with a numerically computed Caputo derivative."""
    caputo = numerical_caputo(
        lambda times: problem.second_time_derivative(points, times),
        t,
        problem.alpha,
        nodes=nodes,
    )
    return caputo - problem.kappa * problem.laplacian(points, t) - problem.forcing(
        points, t
    )
