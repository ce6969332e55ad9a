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

"""Tests for the time discretization of the Caputo derivative"""

import math

import numpy as np
import pytest
from scipy import special

from fdw.core.errors import ConfigurationError, UsageError
from fdw.core.geometry import DiskDomain
from fdw.core.problems import SeparableProblem, problem_1
from fdw.core.timefrac import (
    FractionalScheme,
    SolutionHistory,
    caputo_weights,
    helmholtz_coefficients,
    memory_sum,
    rhs_f,
    verify_scheme_residual,
)


@pytest.mark.parametrize("alpha", [1.1, 1.25, 1.5, 1.75, 1.9])
@pytest.mark.parametrize("tau", [1.0, 0.1, 1 / 64])
@pytest.mark.parametrize("count", [1, 7, 200])
def test_weights_telescope(alpha: float, tau: float, count: int):
    """Test that the weights sum to tau^(2-alpha) n^(2-alpha)/(2-alpha)."""
    beta = 2.0 - alpha
    weights = caputo_weights(alpha, tau, count)
    expected = tau**beta * count**beta / beta
    assert weights.sum() == pytest.approx(expected, rel=1e-12)


def test_weights_positive_and_decreasing():
    """Test that the weights are positive and strictly decreasing."""
    weights = caputo_weights(1.4, 0.05, 100)
    assert weights[0] == pytest.approx(0.05**0.6 / 0.6, rel=1e-14)
    assert np.all(weights > 0)
    assert np.all(np.diff(weights) < 0)


@pytest.mark.parametrize(
    "alpha, tau, count",
    [(1.0, 0.1, 5), (2.0, 0.1, 5), (0.5, 0.1, 5), (1.5, 0.0, 5), (1.5, 0.1, 0)],
)
def test_weights_invalid(alpha: float, tau: float, count: int):
    """Test that invalid parameters are rejected."""
    with pytest.raises(ConfigurationError):
        caputo_weights(alpha, tau, count)


@pytest.mark.parametrize("alpha", [1.25, 1.5, 1.75])
@pytest.mark.parametrize("tau", [0.5, 1 / 16])
def test_helmholtz_coefficients(alpha: float, tau: float):
    """Test k^2 = tau^(-alpha)/Gamma(3 - alpha) for unit diffusivity."""
    scheme = FractionalScheme.create(alpha=alpha, tau=tau, n_steps=4)
    b, k_wave = helmholtz_coefficients(scheme)
    expected = tau ** (-alpha) / special.gamma(3.0 - alpha)
    assert -b == pytest.approx(expected, rel=1e-12)
    assert k_wave == pytest.approx(math.sqrt(expected), rel=1e-12)


def test_helmholtz_coefficients_with_diffusivity():
    """Test that the wavenumber scales with 1/sqrt(kappa) while b does not."""
    plain = FractionalScheme.create(alpha=1.5, tau=0.1, n_steps=10)
    slow = FractionalScheme.create(alpha=1.5, tau=0.1, n_steps=10, kappa=4.0)
    b_plain, k_plain = helmholtz_coefficients(plain)
    b_slow, k_slow = helmholtz_coefficients(slow)
    assert b_slow == pytest.approx(b_plain, rel=1e-14)
    assert k_slow == pytest.approx(0.5 * k_plain, rel=1e-14)


def test_scheme_properties():
    """Test derived scheme quantities."""
    scheme = FractionalScheme.create(alpha=1.5, tau=0.125, n_steps=8)
    assert scheme.final_time == pytest.approx(1.0)
    assert scheme.time(3) == pytest.approx(0.375)
    assert scheme.theta == pytest.approx(1 / (0.125**2 * special.gamma(0.5)))
    with pytest.raises(ConfigurationError):
        FractionalScheme.create(alpha=1.5, tau=0.125, n_steps=8, kappa=0.0)


def test_history_storage():
    """Test storing levels and increments."""
    history = SolutionHistory(initial=np.zeros(3), velocity=np.ones(3), capacity=2)
    history.append(np.array([1.0, 2.0, 3.0]))
    history.append(np.array([3.0, 3.0, 3.0]))
    assert len(history) == 3
    assert history.node_count == 3
    np.testing.assert_array_equal(history.latest, [3.0, 3.0, 3.0])
    np.testing.assert_array_equal(history.increments(3), [[1, 2, 3], [2, 1, 0]])
    assert history.levels().shape == (3, 3)
    np.testing.assert_array_equal(history.velocity, np.ones(3))


def test_history_misuse():
    """Test that wrong shapes, overflow and missing levels are rejected."""
    with pytest.raises(UsageError):
        SolutionHistory(initial=np.zeros(3), velocity=np.zeros(2), capacity=2)
    history = SolutionHistory(initial=np.zeros(2), velocity=np.zeros(2), capacity=1)
    with pytest.raises(UsageError):
        history.append(np.zeros(3))
    history.append(np.ones(2))
    with pytest.raises(UsageError):
        history.append(np.ones(2))
    with pytest.raises(UsageError):
        history[2]


def test_memory_sum_matches_direct_sum():
    """Test the vectorized memory term against the defining double loop."""
    rng = np.random.default_rng(7)
    scheme = FractionalScheme.create(alpha=1.3, tau=0.1, n_steps=12)
    history = SolutionHistory(
        initial=rng.normal(size=5), velocity=rng.normal(size=5), capacity=12
    )
    for _ in range(9):
        history.append(rng.normal(size=5))

    weights = scheme.weights
    for step in range(1, 10):
        expected = np.zeros(5)
        for level in range(1, step):
            expected += (weights[step - level - 1] - weights[step - level]) * (
                history[level] - history[level - 1]
            )
        np.testing.assert_allclose(
            memory_sum(scheme, history, step), expected, rtol=1e-12, atol=1e-14
        )


def test_rhs_first_step():
    """Test the right-hand side of the first step against its closed form."""
    scheme = FractionalScheme.create(alpha=1.5, tau=0.2, n_steps=3)
    initial = np.array([1.0, -2.0])
    velocity = np.array([0.5, 4.0])
    history = SolutionHistory(initial=initial, velocity=velocity, capacity=3)
    g_mid = np.array([0.3, 0.0])
    a0 = scheme.weights[0]
    expected = -scheme.theta * (a0 * initial + scheme.tau * a0 * velocity) - g_mid
    np.testing.assert_allclose(rhs_f(scheme, history, 1, g_mid), expected, rtol=1e-14)


def _random_history(
    rng: np.random.Generator, scheme: FractionalScheme, levels: int
) -> SolutionHistory:
    history = SolutionHistory(
        initial=rng.normal(size=4), velocity=rng.normal(size=4), capacity=scheme.n_steps
    )
    for _ in range(levels):
        history.append(rng.normal(size=4))
    return history


def _combined(
    first: SolutionHistory, second: SolutionHistory, a: float, b: float
) -> SolutionHistory:
    history = SolutionHistory(
        initial=a * first[0] + b * second[0],
        velocity=a * first.velocity + b * second.velocity,
        capacity=len(first),
    )
    for level in range(1, len(first)):
        history.append(a * first[level] + b * second[level])
    return history


def test_rhs_is_linear():
    """Test that the right-hand side is linear in the history and the forcing."""
    rng = np.random.default_rng(11)
    scheme = FractionalScheme.create(alpha=1.4, tau=0.125, n_steps=8)
    first, second = _random_history(rng, scheme, 5), _random_history(rng, scheme, 5)
    g_first, g_second = rng.normal(size=4), rng.normal(size=4)
    a, b = 2.5, -0.75

    combined = _combined(first, second, a, b)
    expected = a * rhs_f(scheme, first, 6, g_first) + b * rhs_f(
        scheme, second, 6, g_second
    )
    actual = rhs_f(scheme, combined, 6, a * g_first + b * g_second)
    np.testing.assert_allclose(actual, expected, rtol=1e-12, atol=1e-12)


def test_rhs_of_zero_data_is_zero():
    """Test that zero levels, velocity and forcing give exactly zero."""
    scheme = FractionalScheme.create(alpha=1.6, tau=0.25, n_steps=4)
    history = SolutionHistory(initial=np.zeros(3), velocity=np.zeros(3), capacity=4)
    for step in range(1, 5):
        rhs = rhs_f(scheme, history, step, np.zeros(3))
        assert np.all(rhs == 0.0)
        history.append(rhs)


def test_rhs_misuse():
    """Test that out-of-range steps and missing levels are rejected."""
    scheme = FractionalScheme.create(alpha=1.5, tau=0.2, n_steps=3)
    history = SolutionHistory(initial=np.zeros(2), velocity=np.zeros(2), capacity=3)
    for step in (0, 4):
        with pytest.raises(UsageError):
            rhs_f(scheme, history, step, np.zeros(2))
    with pytest.raises(UsageError):
        rhs_f(scheme, history, 2, np.zeros(2))


def _harmonic_linear_in_time(alpha: float) -> SeparableProblem:
    return SeparableProblem(
        name="harmonic",
        domain=DiskDomain(),
        alpha=alpha,
        exponent=1.0,
        profile=lambda points: np.exp(points[..., 0]) * np.cos(points[..., 1]),
        profile_laplacian=lambda points: np.zeros(points.shape[:-1]),
        profile_gradient=lambda points: np.stack(
            (
                np.exp(points[..., 0]) * np.cos(points[..., 1]),
                -np.exp(points[..., 0]) * np.sin(points[..., 1]),
            ),
            axis=-1,
        ),
    )


@pytest.mark.parametrize("alpha", [1.25, 1.75])
def test_scheme_exact_for_linear_time(alpha: float):
    """Test that the discrete scheme reproduces harmonic profiles times t exactly."""
    problem = _harmonic_linear_in_time(alpha)
    scheme = FractionalScheme.create(alpha=alpha, tau=0.1, n_steps=10)
    points = np.array([[0.1, 0.2], [-0.5, 0.3], [0.0, -0.7]])
    for step in (1, 2, 10):
        residual = verify_scheme_residual(problem, scheme, step, points)
        assert residual == pytest.approx(0.0, abs=1e-9)


def test_scheme_residual_decreases_with_tau():
    """Test that the scheme residual of problem 1 shrinks under step refinement."""
    problem = problem_1(1.5)
    points = np.array([[0.5, 1.0], [1.5, 2.0], [2.5, 0.7]])
    residuals = []
    for n_steps in (16, 64):
        scheme = FractionalScheme.create(alpha=1.5, tau=1.0 / n_steps, n_steps=n_steps)
        residuals.append(verify_scheme_residual(problem, scheme, n_steps, points))
    assert residuals[1] < 0.5 * residuals[0]
