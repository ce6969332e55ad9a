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

"""Time discretization of the Caputo derivative of order 1 < alpha < 2.

Every time step reduces the fractional equation to the modified Helmholtz
problem kappa * lap(u^n) + b * u^n = F^{n-1} whose right-hand side collects
the memory of all previous steps.
"""

import math
from dataclasses import dataclass

import numpy as np

from fdw.core.errors import ConfigurationError, UsageError
from fdw.core.models import ExactSolution
from fdw.core.specfun import gamma


def caputo_weights(alpha: float, tau: float, count: int) -> np.ndarray:
    """The weights a_k = tau^(2-alpha)/(2-alpha) [(k+1)^(2-alpha) - k^(2-alpha)]."""
    if not 1.0 < alpha < 2.0:
        raise ConfigurationError(
            parameter="alpha", reason=f"{alpha} is outside of the open interval (1, 2)."
        )
    if not tau > 0:
        raise ConfigurationError(parameter="tau", reason=f"{tau} is not positive.")
    if count < 1:
        raise ConfigurationError(
            parameter="n_steps", reason=f"at least one step needed, got {count}."
        )
    exponent = 2.0 - alpha
    nodes = np.arange(count + 1, dtype=float) ** exponent
    return tau**exponent / exponent * np.diff(nodes)


@dataclass(frozen=True, eq=False)
class FractionalScheme:
    """Parameters and weights of the time discretization."""

    alpha: float
    tau: float
    kappa: float
    n_steps: int
    weights: np.ndarray

    @classmethod
    def create(
        cls, *, alpha: float, tau: float, n_steps: int, kappa: float = 1.0
    ) -> "FractionalScheme":
        """Validate the parameters and compute the weights."""
        if not kappa > 0:
            raise ConfigurationError(
                parameter="kappa", reason=f"{kappa} is not positive."
            )
        weights = caputo_weights(alpha, tau, n_steps)
        weights.setflags(write=False)
        return cls(alpha=alpha, tau=tau, kappa=kappa, n_steps=n_steps, weights=weights)

    @property
    def theta(self) -> float:
        """The factor 1/(tau^2 Gamma(2 - alpha))."""
        return 1.0 / (self.tau**2 * gamma(2.0 - self.alpha))

    @property
    def final_time(self) -> float:
        """The time reached after all steps."""
        return self.n_steps * self.tau

    def time(self, step: int) -> float:
        """The time level t_n."""
        return step * self.tau


def helmholtz_coefficients(scheme: FractionalScheme) -> tuple[float, float]:
    """The coefficient b < 0 and the wavenumber k of the per-step Helmholtz problem."""
    b = -scheme.weights[0] * scheme.theta
    return float(b), math.sqrt(-b / scheme.kappa)


class SolutionHistory:
    """Nodal solutions u^0 .. u^n of a time march plus the initial velocity.

    Storage for all steps is allocated up front; the increments u^l - u^(l-1)
    are kept alongside because the memory sum only ever needs those.
    """

    def __init__(self, *, initial: np.ndarray, velocity: np.ndarray, capacity: int):
        initial = np.asarray(initial, dtype=float)
        velocity = np.asarray(velocity, dtype=float)
        if initial.ndim != 1 or initial.shape != velocity.shape:
            raise UsageError(
                operation="SolutionHistory",
                reason="initial value and velocity must be vectors of equal length.",
            )
        self._values = np.empty((capacity + 1, initial.size))
        self._increments = np.empty((capacity, initial.size))
        self._values[0] = initial
        self._velocity = velocity.copy()
        self._velocity.setflags(write=False)
        self._count = 1

    def __len__(self) -> int:
        return self._count

    def __getitem__(self, step: int) -> np.ndarray:
        if not 0 <= step < self._count:
            raise UsageError(
                operation="SolutionHistory",
                reason=f"step {step} is not stored (have {self._count} levels).",
            )
        return self._values[step]

    @property
    def node_count(self) -> int:
        """Number of nodes per level."""
        return self._values.shape[1]

    @property
    def velocity(self) -> np.ndarray:
        """The initial velocity psi at the nodes."""
        return self._velocity

    @property
    def latest(self) -> np.ndarray:
        """The most recent level."""
        return self._values[self._count - 1]

    def levels(self) -> np.ndarray:
        """All stored levels as a read-only array (steps x nodes)."""
        view = self._values[: self._count]
        view.setflags(write=False)
        return view

    def increments(self, upto: int) -> np.ndarray:
        """The increments u^l - u^(l-1) for l = 1 .. upto - 1."""
        return self._increments[: upto - 1]

    def append(self, values: np.ndarray) -> None:
        """Store the next level."""
        values = np.asarray(values, dtype=float)
        if values.shape != (self.node_count,):
            raise UsageError(
                operation="SolutionHistory.append",
                reason=f"expected {self.node_count} values, got shape {values.shape}.",
            )
        if self._count >= len(self._values):
            raise UsageError(
                operation="SolutionHistory.append", reason="the history is full."
            )
        self._values[self._count] = values
        self._increments[self._count - 1] = values - self._values[self._count - 1]
        self._count += 1


def memory_sum(
    scheme: FractionalScheme, history: SolutionHistory, step: int
) -> np.ndarray:
    """Sum over l = 1 .. n-1 of (a_{n-l-1} - a_{n-l}) (u^l - u^(l-1))."""
    lags = step - np.arange(1, step)
    coefficients = scheme.weights[lags - 1] - scheme.weights[lags]
    return coefficients @ history.increments(step)


def rhs_f(
    scheme: FractionalScheme,
    history: SolutionHistory,
    step: int,
    g_mid: np.ndarray,
) -> np.ndarray:
    """Right-hand side F^{n-1} of the Helmholtz problem for time level n."""
    if not 1 <= step <= scheme.n_steps:
        raise UsageError(
            operation="rhs_f",
            reason=f"step {step} is outside of 1 .. {scheme.n_steps}.",
        )
    if len(history) < step:
        raise UsageError(
            operation="rhs_f",
            reason=f"levels up to {step - 1} are needed, have {len(history) - 1}.",
        )
    weights = scheme.weights
    bracket = (
        weights[0] * history[step - 1]
        + memory_sum(scheme, history, step)
        + scheme.tau * weights[step - 1] * history.velocity
    )
    return -scheme.theta * bracket - np.asarray(g_mid, dtype=float)


def verify_scheme_residual(
    exact: ExactSolution, scheme: FractionalScheme, step: int, points: np.ndarray
) -> float:
    """Max residual of the discrete scheme at level n for an exact solution.

    The discrete Caputo derivative of the exact values is compared with
    kappa * lap(u)(t_n) + g(t_{n-1/2}).
    """
    if not 1 <= step <= scheme.n_steps:
        raise UsageError(
            operation="verify_scheme_residual",
            reason=f"step {step} is outside of 1 .. {scheme.n_steps}.",
        )
    history = SolutionHistory(
        initial=exact.exact(points, 0.0),
        velocity=exact.initial_velocity(points),
        capacity=step,
    )
    for level in range(1, step):
        history.append(exact.exact(points, scheme.time(level)))

    weights = scheme.weights
    current = exact.exact(points, scheme.time(step))
    discrete = scheme.theta * (
        weights[0] * (current - history[step - 1])
        - memory_sum(scheme, history, step)
        - scheme.tau * weights[step - 1] * history.velocity
    )
    t_mid = scheme.time(step) - 0.5 * scheme.tau
    residual = (
        discrete
        - exact.kappa * exact.laplacian(points, scheme.time(step))
        - exact.forcing(points, t_mid)
    )
    return float(np.max(np.abs(residual)))
