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

"""Special functions needed by the solvers: the gamma function, the modified
Bessel functions of the second kind of order zero and one, and the closed-form
integral of the logarithm over a straight element.

All Bessel routines accept scalars or arrays. Scalars in, floats out.
"""

import math
from typing import Union

import numpy as np
import numpy.typing as npt

from fdw.core.errors import ArgumentDomainError

EULER_GAMMA = 0.57721566490153286061

ArrayOrFloat = Union[float, npt.NDArray[np.float64]]

_LANCZOS_G = 7
_LANCZOS_COEFFICIENTS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61503916999185,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

# ascending series for x <= _SWITCHOVER, integral representation above
_SWITCHOVER = 2.0
_SERIES_TERMS = 30
_TRAPEZOID_NODES = 48
_CHUNK_SIZE = 8192


def gamma(x: float) -> float:
    """Evaluate the gamma function for a positive real argument."""
    if not x > 0 or not math.isfinite(x):
        raise ArgumentDomainError(
            function="gamma", value=x, reason="Only positive arguments are supported."
        )
    if x < 0.5:
        return gamma(x + 1.0) / x

    shifted = x - 1.0
    series = _LANCZOS_COEFFICIENTS[0]
    for index, coefficient in enumerate(_LANCZOS_COEFFICIENTS[1:], start=1):
        series += coefficient / (shifted + index)
    base = shifted + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * base ** (shifted + 0.5) * math.exp(-base) * series


def log_element_integral(length: float) -> float:
    """Integral of ln|s| over [-length/2, length/2]."""
    if not length > 0:
        raise ArgumentDomainError(function="log_element_integral", value=length)
    return length * (math.log(0.5 * length) - 1.0)


def _series_tables() -> tuple[np.ndarray, ...]:
    k = np.arange(_SERIES_TERMS, dtype=float)
    factorials = np.cumprod(np.concatenate(([1.0], np.arange(1.0, _SERIES_TERMS))))
    harmonic = np.concatenate(([0.0], np.cumsum(1.0 / np.arange(1.0, _SERIES_TERMS))))
    harmonic_next = harmonic + 1.0 / (k + 1.0)
    inverse_square = 1.0 / factorials**2
    inverse_shifted = 1.0 / (factorials * factorials * (k + 1.0))
    digamma_sum = (harmonic - EULER_GAMMA) + (harmonic_next - EULER_GAMMA)
    return k, inverse_square, inverse_square * harmonic, inverse_shifted, (
        inverse_shifted * digamma_sum
    )


(
    _POWERS,
    _I0_COEFFICIENTS,
    _K0_COEFFICIENTS,
    _I1_COEFFICIENTS,
    _K1_COEFFICIENTS,
) = _series_tables()


def _small_argument(x: np.ndarray, order: int) -> np.ndarray:
    quarter_square = 0.25 * x * x
    powers = quarter_square[:, np.newaxis] ** _POWERS
    log_half = np.log(0.5 * x)
    if order == 0:
        bessel_i0 = powers @ _I0_COEFFICIENTS
        return -(log_half + EULER_GAMMA) * bessel_i0 + powers @ _K0_COEFFICIENTS
    bessel_i1 = 0.5 * x * (powers @ _I1_COEFFICIENTS)
    return 1.0 / x + log_half * bessel_i1 - 0.25 * x * (powers @ _K1_COEFFICIENTS)


def _large_argument(x: np.ndarray, order: int) -> np.ndarray:
    step = np.minimum(0.1, 0.6 / np.sqrt(x))
    nodes = step[:, np.newaxis] * np.arange(_TRAPEZOID_NODES)
    half_sinh = np.sinh(0.5 * nodes)
    integrand = np.exp(-2.0 * x[:, np.newaxis] * half_sinh * half_sinh)
    if order == 1:
        integrand *= np.cosh(nodes)
    integral = step * (integrand.sum(axis=1) - 0.5 * integrand[:, 0])
    return np.exp(-x) * integral


def _bessel_k(x: ArrayOrFloat, order: int, name: str) -> ArrayOrFloat:
    values = np.asarray(x, dtype=float)
    flat = values.ravel()
    invalid = ~(flat > 0) | ~np.isfinite(flat)
    if np.any(invalid):
        raise ArgumentDomainError(function=name, value=float(flat[invalid][0]))

    result = np.empty_like(flat)
    for start in range(0, flat.size, _CHUNK_SIZE):
        chunk = flat[start : start + _CHUNK_SIZE]
        small = chunk <= _SWITCHOVER
        out = np.empty_like(chunk)
        if np.any(small):
            out[small] = _small_argument(chunk[small], order)
        if not np.all(small):
            out[~small] = _large_argument(chunk[~small], order)
        result[start : start + _CHUNK_SIZE] = out

    if values.ndim == 0:
        return float(result[0])
    return result.reshape(values.shape)


def bessel_k0(x: ArrayOrFloat) -> ArrayOrFloat:
    """Modified Bessel function of the second kind of order zero, x > 0."""
    return _bessel_k(x, 0, "bessel_k0")


def bessel_k1(x: ArrayOrFloat) -> ArrayOrFloat:
    """Modified Bessel function of the second kind of order one, x > 0."""
    return _bessel_k(x, 1, "bessel_k1")
