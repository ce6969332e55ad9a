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

"""Dense LU factorization with partial pivoting, solves and inverses"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from fdw.core.errors import SingularMatrixError, UsageError

log = logging.getLogger(__name__)

ILL_CONDITIONED_RCOND = 1e-12


@dataclass(frozen=True, eq=False)
class LUFactorization:
    """Packed factors of P A = L U.

    `pivots` holds the LAPACK row interchanges, `permutation` the resulting
    row order, so that A[permutation] = L U.
    """

    lu: np.ndarray
    pivots: np.ndarray
    permutation: np.ndarray
    sign: int
    rcond: float

    @property
    def size(self) -> int:
        """Order of the factored matrix."""
        return self.lu.shape[0]

    @property
    def lower(self) -> np.ndarray:
        """The unit lower triangular factor."""
        return np.tril(self.lu, k=-1) + np.eye(self.size)

    @property
    def upper(self) -> np.ndarray:
        """The upper triangular factor."""
        return np.triu(self.lu)

    @property
    def determinant(self) -> float:
        """Determinant of the original matrix."""
        return self.sign * float(np.prod(np.diag(self.lu)))


def _check_square(matrix: np.ndarray, operation: str) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.size == 0:
        raise UsageError(
            operation=operation,
            reason=f"a square matrix is needed, got {matrix.shape}.",
        )
    if not np.all(np.isfinite(matrix)):
        raise UsageError(
            operation=operation, reason="the matrix has non-finite entries."
        )
    return matrix


def lu_factor(matrix: np.ndarray) -> LUFactorization:
    """Factor a square matrix with partial pivoting.

    The reciprocal condition number in the 1-norm is estimated and logged
    when it signals near singularity.
    """
    matrix = _check_square(matrix, "lu_factor")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, pivots = linalg.lu_factor(matrix)

    zero_pivots = np.flatnonzero(np.diag(lu) == 0.0)
    if zero_pivots.size:
        raise SingularMatrixError(pivot_index=int(zero_pivots[0]), size=len(lu))

    permutation = np.arange(len(lu))
    for row, pivot in enumerate(pivots):
        permutation[[row, pivot]] = permutation[[pivot, row]]
    sign = -1 if np.count_nonzero(pivots != np.arange(len(pivots))) % 2 else 1

    gecon = lapack.get_lapack_funcs("gecon", (lu,))
    rcond, _ = gecon(lu, np.linalg.norm(matrix, 1), norm="1")
    rcond = float(rcond)
    if rcond < ILL_CONDITIONED_RCOND:
        log.warning(
            "Factored a %dx%d matrix with reciprocal condition estimate %.3e.",
            len(lu),
            len(lu),
            rcond,
        )
    else:
        log.debug("Factored a %dx%d matrix, rcond ~ %.3e.", len(lu), len(lu), rcond)

    for array in (lu, pivots, permutation):
        array.setflags(write=False)
    return LUFactorization(
        lu=lu, pivots=pivots, permutation=permutation, sign=sign, rcond=rcond
    )


def lu_solve(factorization: LUFactorization, rhs: np.ndarray) -> np.ndarray:
    """Solve A x = rhs for a vector or for every column of a matrix."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.ndim not in (1, 2) or rhs.shape[0] != factorization.size:
        raise UsageError(
            operation="lu_solve",
            reason=(
                f"right-hand side of shape {rhs.shape} does not match a"
                + f" {factorization.size}x{factorization.size} factorization."
            ),
        )
    return linalg.lu_solve((factorization.lu, factorization.pivots), rhs)


def invert(matrix: np.ndarray) -> np.ndarray:
    """Explicit inverse through the LU factorization."""
    factorization = lu_factor(matrix)
    return lu_solve(factorization, np.eye(factorization.size))
