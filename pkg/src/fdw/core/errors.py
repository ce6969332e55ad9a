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

"""Exceptions raised by the numerical core"""

from typing import Optional


class KnownError(RuntimeError):
    """Base class for custom errors encountered"""


class ArgumentDomainError(KnownError):
    """Thrown when a function is evaluated outside of its domain of definition"""

    def __init__(self, *, function: str, value: float, reason: Optional[str] = None):
        self.function = function
        self.value = value
        message = f"{function} is not defined for the argument {value!r}."
        if reason:
            message += f" {reason}"
        super().__init__(message)


class ConfigurationError(KnownError):
    """Thrown when a problem setup (scheme, mesh, cells) is invalid"""

    def __init__(self, *, parameter: str, reason: str):
        self.parameter = parameter
        message = f"Invalid value for '{parameter}': {reason}"
        super().__init__(message)


class DuplicateNodeError(ConfigurationError):
    """Thrown when two collocation nodes coincide"""

    def __init__(self, *, first: int, second: int):
        self.first = first
        self.second = second
        super().__init__(
            parameter="nodes",
            reason=f"the nodes {first} and {second} coincide.",
        )


class UsageError(KnownError):
    """Thrown when an operation is called with inconsistent arguments"""

    def __init__(self, *, operation: str, reason: str):
        self.operation = operation
        message = f"Invalid call to {operation}: {reason}"
        super().__init__(message)


class SingularMatrixError(KnownError):
    """Thrown when a factorization encounters an exactly zero pivot"""

    def __init__(self, *, pivot_index: int, size: int):
        self.pivot_index = pivot_index
        message = (
            f"The {size}x{size} matrix is singular: zero pivot at index {pivot_index}."
        )
        super().__init__(message)


class NonFiniteSolutionError(KnownError):
    """Thrown when a time march produces NaN or infinite values"""

    def __init__(self, *, step: int):
        self.step = step
        message = f"The solution became non-finite at time step {step}."
        super().__init__(message)


class DivergedSolutionError(KnownError):
    """Thrown when a time march stays finite but grows far beyond the size of
    the exact solution
    """

    def __init__(self, *, step: int, magnitude: float, bound: float):
        self.step = step
        self.magnitude = magnitude
        message = (
            f"The solution diverged at time step {step}: |u| reached {magnitude:.6g},"
            + f" the bound is {bound:.6g}."
        )
        super().__init__(message)
