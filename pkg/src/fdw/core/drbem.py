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

"""Dual reciprocity BEM with the linear radial basis function 1 + r.

The Laplacian at all N + L nodes is expanded in the basis, whose particular
solutions r^2/4 + r^3/9 move the domain integral to the boundary. With the
Laplace kernel G = -ln(r)/(2 pi) the discrete identity reads

    Htilde u - Gtilde q = D lap(u),

where the boundary rows of Htilde carry +I/2 and the interior rows +I.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from fdw.core.errors import (
    ArgumentDomainError,
    ConfigurationError,
    DuplicateNodeError,
    UsageError,
)
from fdw.core.geometry import BoundaryMesh
from fdw.core.linalg import LUFactorization, invert, lu_factor, lu_solve
from fdw.core.models import ProblemData
from fdw.core.timefrac import FractionalScheme, SolutionHistory, memory_sum

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def _radius(center: np.ndarray, point: np.ndarray) -> np.ndarray:
    delta = np.asarray(point, dtype=float) - np.asarray(center, dtype=float)
    return np.hypot(delta[..., 0], delta[..., 1])


def rbf_value(center: np.ndarray, point: np.ndarray):
    """The basis function 1 + r."""
    return 1.0 + _radius(center, point)


def particular_solution(center: np.ndarray, point: np.ndarray):
    """r^2/4 + r^3/9, whose Laplacian is 1 + r."""
    r = _radius(center, point)
    return r * r / 4.0 + r**3 / 9.0


def particular_flux(center: np.ndarray, point: np.ndarray, normal: np.ndarray):
    """Normal derivative of the particular solution."""
    delta = np.asarray(point, dtype=float) - np.asarray(center, dtype=float)
    r = np.hypot(delta[..., 0], delta[..., 1])
    return (0.5 + r / 3.0) * np.sum(delta * np.asarray(normal, dtype=float), axis=-1)


def laplace_kernels(field: np.ndarray, source: np.ndarray, normal: np.ndarray):
    """G = -ln(r)/(2 pi) and its normal derivative at the field point."""
    delta = np.asarray(field, dtype=float) - np.asarray(source, dtype=float)
    squared = np.sum(delta * delta, axis=-1)
    if np.any(squared == 0):
        raise ArgumentDomainError(
            function="laplace_kernels", value=0.0, reason="Field and source coincide."
        )
    green = -np.log(squared) / (2.0 * TWO_PI)
    projection = np.sum(delta * np.asarray(normal, dtype=float), axis=-1)
    flux = -projection / (TWO_PI * squared)
    return green, flux


@dataclass(frozen=True, eq=False)
class DrbemSystem:
    """Block operators of the dual reciprocity formulation.

    `g_tilde` keeps only the N boundary columns; the interior columns of the
    full block matrix are zero.
    """

    mesh: BoundaryMesh
    nodes: np.ndarray
    kappa: float
    h_tilde: np.ndarray
    g_tilde: np.ndarray
    u_hat: np.ndarray
    q_hat: np.ndarray
    phi: np.ndarray
    phi_factorization: LUFactorization
    d_matrix: np.ndarray

    @property
    def n_boundary(self) -> int:
        """Number of boundary elements."""
        return len(self.mesh)

    @property
    def n_interior(self) -> int:
        """Number of interior nodes."""
        return len(self.nodes) - len(self.mesh)


def _check_distinct(distances: np.ndarray) -> None:
    coincident = distances == 0.0
    np.fill_diagonal(coincident, False)
    if np.any(coincident):
        first, second = np.argwhere(coincident)[0]
        raise DuplicateNodeError(first=int(first), second=int(second))


def laplace_element_integrals(
    mesh: BoundaryMesh,
    sources: np.ndarray,
    *,
    self_elements: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact integrals of the Laplace kernels over every constant element.

    Returns the (S, N) matrices of the integrals of G and dG/dn. In element
    coordinates (x along the tangent from the midpoint, y along the outward
    normal, half length a) they are

        int ln(r) ds = (a - x) ln(r+) + (a + x) ln(r-) - 2a + y theta,
        int dG/dn ds = theta / (2 pi),

    where r+ and r- are the distances to the element ends and theta is the
    signed angle the element subtends at the source. On its own element
    (`self_elements`) the flux integral is zero.
    """
    sources = np.atleast_2d(np.asarray(sources, dtype=float))
    offsets = sources[:, np.newaxis, :] - mesh.midpoints[np.newaxis, :, :]
    x = np.sum(offsets * mesh.tangents[np.newaxis, :, :], axis=-1)
    y = np.sum(offsets * mesh.normals[np.newaxis, :, :], axis=-1)
    a = 0.5 * mesh.lengths[np.newaxis, :]

    theta = np.arctan2(2.0 * a * y, x * x + y * y - a * a)
    log_forward = 0.5 * np.log((a - x) ** 2 + y * y)
    log_backward = 0.5 * np.log((a + x) ** 2 + y * y)
    log_integral = (a - x) * log_forward + (a + x) * log_backward - 2.0 * a + y * theta

    green = -log_integral / TWO_PI
    flux = theta / TWO_PI
    if self_elements is not None:
        rows = np.flatnonzero(self_elements >= 0)
        flux[rows, self_elements[rows]] = 0.0
    return green, flux


def assemble_drbem(
    mesh: BoundaryMesh,
    interior_points: np.ndarray,
    kappa: float = 1.0,
    *,
    explicit_inverse: bool = False,
) -> DrbemSystem:
    """Assemble Htilde, Gtilde, the particular-solution matrices and D."""
    interior_points = np.atleast_2d(np.asarray(interior_points, dtype=float))
    n_boundary = len(mesh)
    if n_boundary < 4:
        raise ConfigurationError(
            parameter="n_elements",
            reason=f"at least 4 elements needed, got {n_boundary}.",
        )
    if interior_points.size == 0:
        raise ConfigurationError(
            parameter="interior_points", reason="at least one interior node is needed."
        )
    if not kappa > 0:
        raise ConfigurationError(parameter="kappa", reason=f"{kappa} is not positive.")

    nodes = np.vstack((mesh.midpoints, interior_points))
    n_nodes = len(nodes)
    distances = _radius(nodes[np.newaxis, :, :], nodes[:, np.newaxis, :])
    _check_distinct(distances)

    self_elements = np.concatenate(
        (np.arange(n_boundary), np.full(len(interior_points), -1))
    )
    green, flux = laplace_element_integrals(mesh, nodes, self_elements=self_elements)
    diagonal = np.arange(n_boundary)

    h_tilde = np.zeros((n_nodes, n_nodes))
    h_tilde[:, :n_boundary] = flux
    h_tilde[diagonal, diagonal] += 0.5
    h_tilde[n_boundary:, n_boundary:] += np.eye(len(interior_points))

    # u_hat[i, j] = f_j(node_i)
    u_hat = particular_solution(nodes[np.newaxis, :, :], nodes[:, np.newaxis, :])
    q_hat = np.zeros((n_nodes, n_nodes))
    q_hat[:n_boundary] = particular_flux(
        nodes[np.newaxis, :, :],
        mesh.midpoints[:, np.newaxis, :],
        mesh.normals[:, np.newaxis, :],
    )

    phi = 1.0 + distances
    phi_factorization = lu_factor(phi)
    mapped = h_tilde @ u_hat - green @ q_hat[:n_boundary]
    if explicit_inverse:
        d_matrix = mapped @ invert(phi)
    else:
        # phi is symmetric, so D^T = phi^-1 mapped^T
        d_matrix = lu_solve(phi_factorization, mapped.T).T

    log.debug(
        "Assembled DRBEM system with N=%d, L=%d (phi rcond ~ %.3e).",
        n_boundary,
        len(interior_points),
        phi_factorization.rcond,
    )
    return DrbemSystem(
        mesh=mesh,
        nodes=nodes,
        kappa=kappa,
        h_tilde=h_tilde,
        g_tilde=green,
        u_hat=u_hat,
        q_hat=q_hat,
        phi=phi,
        phi_factorization=phi_factorization,
        d_matrix=d_matrix,
    )


def _split_unknowns(system: DrbemSystem, solution: np.ndarray):
    return solution[: system.n_boundary], solution[system.n_boundary :]


def solve_poisson(
    system: DrbemSystem, boundary_u: np.ndarray, laplacian: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Steady solve of lap(u) = s with Dirichlet data.

    Returns the boundary flux and the interior values.
    """
    boundary_u = np.asarray(boundary_u, dtype=float)
    laplacian = np.asarray(laplacian, dtype=float)
    n_boundary = system.n_boundary
    if boundary_u.shape != (n_boundary,) or laplacian.shape != (len(system.nodes),):
        raise UsageError(
            operation="solve_poisson",
            reason="boundary data or source values have the wrong length.",
        )
    matrix = np.hstack((-system.g_tilde, system.h_tilde[:, n_boundary:]))
    rhs = system.d_matrix @ laplacian - system.h_tilde[:, :n_boundary] @ boundary_u
    solution = lu_solve(lu_factor(matrix), rhs)
    return _split_unknowns(system, solution)


@dataclass(eq=False)
class DrbemStepper:
    """The averaged time-stepping system, factored once.

    Unknowns per step are the boundary flux followed by the interior values.
    """

    system: DrbemSystem
    scheme: FractionalScheme
    refactor_each_step: bool = False
    left: np.ndarray = dataclasses.field(init=False)
    right: np.ndarray = dataclasses.field(init=False)
    matrix: np.ndarray = dataclasses.field(init=False)
    factorization: LUFactorization = dataclasses.field(init=False)

    def __post_init__(self):
        half_kappa = 0.5 * self.system.kappa
        memory_scale = self.scheme.weights[0] * self.scheme.theta
        h_tilde, d_matrix = self.system.h_tilde, self.system.d_matrix
        self.left = half_kappa * h_tilde - memory_scale * d_matrix
        self.right = half_kappa * h_tilde + memory_scale * d_matrix
        n_boundary = self.system.n_boundary
        self.matrix = np.hstack(
            (-half_kappa * self.system.g_tilde, self.left[:, n_boundary:])
        )
        self.factorization = lu_factor(self.matrix)

    def step(
        self,
        *,
        history: SolutionHistory,
        step: int,
        boundary_u: np.ndarray,
        flux_previous: np.ndarray,
        g_now: np.ndarray,
        g_previous: np.ndarray,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Advance to level `step`; returns all nodal values and the boundary flux."""
        scheme = self.scheme
        system = self.system
        n_boundary = system.n_boundary
        previous = history[step - 1]
        memory = memory_sum(scheme, history, step) + (
            scheme.tau * scheme.weights[step - 1] * history.velocity
        )
        rhs = (
            -self.left[:, :n_boundary] @ boundary_u
            - self.right @ previous
            + 0.5 * system.kappa * (system.g_tilde @ flux_previous)
            - scheme.theta * (system.d_matrix @ memory)
            - 0.5 * (system.d_matrix @ (g_now + g_previous))
        )
        factorization = (
            lu_factor(self.matrix) if self.refactor_each_step else self.factorization
        )
        flux, interior = _split_unknowns(system, lu_solve(factorization, rhs))
        return np.concatenate((boundary_u, interior)), flux


def drbem_time_march(
    system: DrbemSystem,
    scheme: FractionalScheme,
    problem: ProblemData,
    *,
    refactor_each_step: bool = False,
) -> SolutionHistory:
    """March the fractional problem with the averaged DRBEM scheme.

    The initial flux comes from the normal derivative of the problem data at
    t = 0.
    """
    mesh = system.mesh
    nodes = system.nodes
    stepper = DrbemStepper(
        system=system, scheme=scheme, refactor_each_step=refactor_each_step
    )
    history = SolutionHistory(
        initial=problem.initial_value(nodes),
        velocity=problem.initial_velocity(nodes),
        capacity=scheme.n_steps,
    )
    flux = np.asarray(
        problem.normal_derivative(mesh.midpoints, mesh.normals, 0.0), dtype=float
    )
    g_previous = problem.forcing(nodes, 0.0)
    for step in range(1, scheme.n_steps + 1):
        t = scheme.time(step)
        g_now = problem.forcing(nodes, t)
        values, flux = stepper.step(
            history=history,
            step=step,
            boundary_u=problem.boundary_value(mesh.midpoints, t),
            flux_previous=flux,
            g_now=g_now,
            g_previous=g_previous,
        )
        history.append(values)
        g_previous = g_now
        log.debug("DRBEM step %d/%d done (t=%.6g).", step, scheme.n_steps, t)
    return history
