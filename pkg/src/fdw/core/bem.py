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

"""Constant-element BEM for the modified Helmholtz equation solved in every
time step, with the domain integral of the source term desingularized and
evaluated on interior cells.

With G = -K0(kr)/(2 pi), which satisfies lap(G) - k^2 G = delta, the boundary
equations read G q = (Hbar - I/2) u + F and interior values follow from
u(P) = Hbar(P) u - G(P) q + F(P), where F is the domain integral of the
source over G.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from fdw.core.errors import ArgumentDomainError, ConfigurationError, UsageError
from fdw.core.geometry import BoundaryMesh, InteriorCellSet
from fdw.core.linalg import LUFactorization, lu_factor, lu_solve
from fdw.core.models import ProblemData
from fdw.core.quadrature import (
    BLOCK_ENTRIES,
    NEAR_GAUSS_ORDER,
    integrate_over_elements,
    split_element_rule,
)
from fdw.core.specfun import bessel_k0, bessel_k1, log_element_integral
from fdw.core.timefrac import (
    FractionalScheme,
    SolutionHistory,
    helmholtz_coefficients,
    rhs_f,
)

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
CELL_RESOLUTION_LIMIT = 1.0


def _distance(field: np.ndarray, source: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    delta = np.asarray(field, dtype=float) - np.asarray(source, dtype=float)
    return delta, np.hypot(delta[..., 0], delta[..., 1])


@dataclass(frozen=True)
class HelmholtzKernel:
    """Fundamental solution of lap(u) - k^2 u = 0 in the plane."""

    k_wave: float

    def __post_init__(self):
        if not (math.isfinite(self.k_wave) and self.k_wave > 0):
            raise ConfigurationError(
                parameter="k_wave", reason=f"{self.k_wave} is not a positive number."
            )

    def green(self, field: np.ndarray, source: np.ndarray):
        """-K0(k r)/(2 pi)."""
        _, r = _distance(field, source)
        if np.any(r == 0):
            raise ArgumentDomainError(
                function="kernel_g", value=0.0, reason="Field and source coincide."
            )
        return -bessel_k0(self.k_wave * r) / TWO_PI

    def green_normal_derivative(
        self, field: np.ndarray, source: np.ndarray, normal: np.ndarray
    ):
        """Normal derivative of the fundamental solution at the field point."""
        delta, r = _distance(field, source)
        if np.any(r == 0):
            raise ArgumentDomainError(
                function="kernel_dg_dn", value=0.0, reason="Field and source coincide."
            )
        projection = np.sum(delta * np.asarray(normal, dtype=float), axis=-1)
        return self.k_wave * bessel_k1(self.k_wave * r) * projection / (TWO_PI * r)


def kernel_g(k_wave: float, field: np.ndarray, source: np.ndarray):
    """Value of the Helmholtz fundamental solution."""
    return HelmholtzKernel(k_wave).green(field, source)


def kernel_dg_dn(
    k_wave: float, field: np.ndarray, source: np.ndarray, normal: np.ndarray
):
    """Normal derivative of the Helmholtz fundamental solution."""
    return HelmholtzKernel(k_wave).green_normal_derivative(field, source, normal)


@dataclass(frozen=True)
class AuxiliaryW:
    """w(X, P) = (1 - cosh(s (x1 - P1)))/b with s = sqrt(-b).

    Solves lap(w) + b w = 1 and vanishes at X = P.
    """

    b: float

    def __post_init__(self):
        if not self.b < 0:
            raise ConfigurationError(parameter="b", reason=f"{self.b} is not negative.")

    @property
    def s(self) -> float:
        """sqrt(-b)"""
        return math.sqrt(-self.b)

    def value(self, field: np.ndarray, source: np.ndarray) -> np.ndarray:
        """w at the field points."""
        offset = np.asarray(field)[..., 0] - np.asarray(source)[..., 0]
        return (1.0 - np.cosh(self.s * offset)) / self.b

    def normal_derivative(
        self, field: np.ndarray, source: np.ndarray, normal: np.ndarray
    ) -> np.ndarray:
        """Derivative of w along the normal at the field points."""
        offset = np.asarray(field)[..., 0] - np.asarray(source)[..., 0]
        return -self.s / self.b * np.sinh(self.s * offset) * np.asarray(normal)[..., 0]


def _helmholtz_integrand(kernel: HelmholtzKernel, auxiliary: AuxiliaryW):
    def integrand(field: np.ndarray, source: np.ndarray, normal: np.ndarray):
        delta, r = _distance(field, source)
        kr = kernel.k_wave * r
        green = -bessel_k0(kr) / TWO_PI
        projection = np.sum(delta * normal, axis=-1)
        flux = kernel.k_wave * bessel_k1(kr) * projection / (TWO_PI * r)
        volume = green * auxiliary.normal_derivative(
            field, source, normal
        ) - flux * auxiliary.value(field, source)
        return green, flux, volume

    return integrand


def _own_element_integrals(
    mesh: BoundaryMesh, kernel: HelmholtzKernel, auxiliary: AuxiliaryW
) -> tuple[np.ndarray, np.ndarray]:
    """G_ii and the volume term of every element for its own midpoint."""
    points, weights = split_element_rule(mesh, NEAR_GAUSS_ORDER)
    sources = mesh.midpoints[:, np.newaxis, :]
    _, r = _distance(points, sources)
    green = -bessel_k0(kernel.k_wave * r) / TWO_PI

    # log r is subtracted and integrated in closed form
    regular = np.sum((green - np.log(r) / TWO_PI) * weights, axis=1)
    singular = np.array([log_element_integral(length) for length in mesh.lengths])
    diagonal = regular + singular / TWO_PI

    # dG/dn vanishes on the own element, only G dw/dn remains
    derivative = auxiliary.normal_derivative(
        points, sources, mesh.normals[:, np.newaxis]
    )
    volume = np.sum(green * derivative * weights, axis=1)
    return diagonal, volume


def _cell_green(
    kernel: HelmholtzKernel,
    sources: np.ndarray,
    cells: InteriorCellSet,
    *,
    block_size: Optional[int] = None,
) -> np.ndarray:
    """G(P_j, P) S_j for every source P and cell j, zero where P_j = P.

    The (S, L) result is dense; it is filled `block_size` sources at a time.
    """
    if block_size is None:
        block_size = max(1, BLOCK_ENTRIES // len(cells))
    weights = np.zeros((len(sources), len(cells)))
    for start in range(0, len(sources), block_size):
        stop = start + block_size
        _, r = _distance(
            cells.points[np.newaxis, :, :], sources[start:stop, np.newaxis, :]
        )
        block = np.zeros_like(r)
        apart = r > 0
        block[apart] = -bessel_k0(kernel.k_wave * r[apart]) / TWO_PI
        weights[start:stop] = block * cells.weights[np.newaxis, :]
    return weights


def cell_resolution(k_wave: float, cells: InteriorCellSet) -> float:
    """k times the side of the largest cell.

    The cell rule follows the decay of K0(kr) only while this is of order one.
    """
    return k_wave * math.sqrt(float(cells.weights.max()))


@dataclass(frozen=True, eq=False)
class BemSystem:
    """Assembled boundary and domain operators for one wavenumber.

    Rows of `cell_green` and `boundary_volume` run over the boundary
    midpoints followed by the interior cell points.
    """

    mesh: BoundaryMesh
    kernel: HelmholtzKernel
    cells: Optional[InteriorCellSet]
    h: np.ndarray
    g: np.ndarray
    g_factorization: LUFactorization
    interior_h: np.ndarray
    interior_g: np.ndarray
    cell_green: np.ndarray
    boundary_volume: np.ndarray

    @property
    def n_boundary(self) -> int:
        """Number of boundary elements."""
        return len(self.mesh)

    @property
    def n_interior(self) -> int:
        """Number of interior cells."""
        return 0 if self.cells is None else len(self.cells)

    @property
    def nodes(self) -> np.ndarray:
        """Boundary midpoints followed by the interior cell points."""
        if self.cells is None:
            return self.mesh.midpoints
        return np.vstack((self.mesh.midpoints, self.cells.points))


def boundary_volume_integral(
    mesh: BoundaryMesh,
    kernel: HelmholtzKernel,
    sources: np.ndarray,
    *,
    self_elements: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Integral of G(X, P) over the domain for every source P via the boundary."""
    auxiliary = AuxiliaryW(b=-kernel.k_wave**2)
    sources = np.atleast_2d(np.asarray(sources, dtype=float))
    _, _, volume = integrate_over_elements(
        mesh,
        sources,
        _helmholtz_integrand(kernel, auxiliary),
        self_elements=self_elements,
    )
    if self_elements is not None:
        rows = np.flatnonzero(self_elements >= 0)
        _, own_volume = _own_element_integrals(mesh, kernel, auxiliary)
        volume[rows, self_elements[rows]] = own_volume[self_elements[rows]]
    return volume.sum(axis=1)


def assemble(
    mesh: BoundaryMesh, k_wave: float, cells: Optional[InteriorCellSet] = None
) -> BemSystem:
    """Assemble H, G and, when cells are given, the domain-integral operators."""
    kernel = HelmholtzKernel(k_wave)
    auxiliary = AuxiliaryW(b=-(k_wave**2))
    n_boundary = len(mesh)
    interior = np.empty((0, 2)) if cells is None else cells.points
    sources = np.vstack((mesh.midpoints, interior))
    self_elements = np.concatenate(
        (np.arange(n_boundary), np.full(len(interior), -1))
    )

    green, flux, volume = integrate_over_elements(
        mesh,
        sources,
        _helmholtz_integrand(kernel, auxiliary),
        self_elements=self_elements,
    )
    diagonal = np.arange(n_boundary)
    own_green, own_volume = _own_element_integrals(mesh, kernel, auxiliary)
    green[diagonal, diagonal] = own_green
    volume[diagonal, diagonal] = own_volume

    h = flux[:n_boundary] - 0.5 * np.eye(n_boundary)
    g = green[:n_boundary]
    cell_green = (
        np.zeros((n_boundary, 0))
        if cells is None
        else _cell_green(kernel, sources, cells)
    )
    if cells is not None and cell_resolution(k_wave, cells) > CELL_RESOLUTION_LIMIT:
        log.warning(
            "Interior cells are too coarse for k=%.4g: k*h=%.3g exceeds %.3g, the"
            " domain integral loses accuracy. Increase interior_res.",
            k_wave,
            cell_resolution(k_wave, cells),
            CELL_RESOLUTION_LIMIT,
        )
    log.debug(
        "Assembled Helmholtz BEM system with k=%.6g, N=%d, L=%d.",
        k_wave,
        n_boundary,
        len(interior),
    )
    return BemSystem(
        mesh=mesh,
        kernel=kernel,
        cells=cells,
        h=h,
        g=g,
        g_factorization=lu_factor(g),
        interior_h=flux[n_boundary:],
        interior_g=green[n_boundary:],
        cell_green=cell_green,
        boundary_volume=volume.sum(axis=1),
    )


def _require_cells(system: BemSystem, operation: str) -> InteriorCellSet:
    if system.cells is None:
        raise UsageError(
            operation=operation, reason="the system has no interior cells."
        )
    return system.cells


def domain_integrals(system: BemSystem, omega: np.ndarray) -> np.ndarray:
    """The desingularized domain integral of omega G for every node.

    `omega` holds values at the boundary midpoints followed by the cells.
    """
    _require_cells(system, "domain_integrals")
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (system.n_boundary + system.n_interior,):
        raise UsageError(
            operation="domain_integrals",
            reason=f"expected {system.n_boundary + system.n_interior} nodal values.",
        )
    on_cells = omega[system.n_boundary :]
    return (
        system.cell_green @ on_cells
        - omega * system.cell_green.sum(axis=1)
        + omega * system.boundary_volume
    )


def domain_integral(
    system: BemSystem,
    omega_cells: np.ndarray,
    *,
    source: np.ndarray,
    omega_source: float,
    beta: float = TWO_PI,
) -> float:
    """The desingularized domain integral of omega G for a single source point.

    The source may be an interior point or a boundary element midpoint.
    """
    cells = _require_cells(system, "domain_integral")
    source = np.asarray(source, dtype=float)
    omega_cells = np.asarray(omega_cells, dtype=float)
    if omega_cells.shape != (len(cells),):
        raise UsageError(
            operation="domain_integral", reason=f"expected {len(cells)} cell values."
        )

    weights = _cell_green(system.kernel, source[np.newaxis, :], cells)[0]
    desingularized = float(np.dot(omega_cells - omega_source, weights))

    matches = np.flatnonzero(np.all(system.mesh.midpoints == source, axis=1))
    own = np.array([matches[0] if matches.size else -1])
    volume = boundary_volume_integral(
        system.mesh, system.kernel, source[np.newaxis, :], self_elements=own
    )[0]
    auxiliary = AuxiliaryW(b=-system.kernel.k_wave**2)
    jump = beta / TWO_PI * float(auxiliary.value(source, source))
    return desingularized + omega_source * (jump + float(volume))


def solve_step(
    system: BemSystem, boundary_u: np.ndarray, omega: np.ndarray
) -> np.ndarray:
    """Boundary flux q from Dirichlet data and the nodal source omega."""
    boundary_u = np.asarray(boundary_u, dtype=float)
    if boundary_u.shape != (system.n_boundary,):
        raise UsageError(
            operation="solve_step",
            reason=f"expected {system.n_boundary} boundary values.",
        )
    rhs = system.h @ boundary_u
    if system.cells is not None:
        rhs = rhs + domain_integrals(system, omega)[: system.n_boundary]
    return lu_solve(system.g_factorization, rhs)


def interior_eval(
    system: BemSystem,
    boundary_u: np.ndarray,
    q: np.ndarray,
    omega: np.ndarray,
    *,
    targets: Optional[np.ndarray] = None,
    omega_targets: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Solution values at the interior cells, or at arbitrary interior targets."""
    boundary_u = np.asarray(boundary_u, dtype=float)
    q = np.asarray(q, dtype=float)
    if targets is None:
        _require_cells(system, "interior_eval")
        domain = domain_integrals(system, omega)[system.n_boundary :]
        return system.interior_h @ boundary_u - system.interior_g @ q + domain

    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    distances = system.mesh.distance_to_boundary(targets)
    on_boundary = distances <= 1e-12 * system.mesh.perimeter
    if np.any(on_boundary):
        raise ArgumentDomainError(
            function="interior_eval",
            value=float(distances[on_boundary][0]),
            reason="Targets must lie strictly inside the domain.",
        )
    auxiliary = AuxiliaryW(b=-system.kernel.k_wave**2)
    green, flux, _ = integrate_over_elements(
        system.mesh, targets, _helmholtz_integrand(system.kernel, auxiliary)
    )
    values = flux @ boundary_u - green @ q
    if system.cells is None:
        return values
    if omega_targets is None:
        raise UsageError(
            operation="interior_eval",
            reason="source values at the targets are needed for the domain integral.",
        )
    on_cells = np.asarray(omega, dtype=float)[system.n_boundary :]
    domain = np.array(
        [
            domain_integral(system, on_cells, source=target, omega_source=value)
            for target, value in zip(targets, np.asarray(omega_targets, dtype=float))
        ]
    )
    return values + domain


def bem_time_march(
    scheme: FractionalScheme,
    problem: ProblemData,
    mesh: BoundaryMesh,
    cells: InteriorCellSet,
) -> SolutionHistory:
    """March the fractional problem with one Helmholtz BEM solve per step.

    The history holds values at the boundary midpoints followed by the cells.
    """
    _, k_wave = helmholtz_coefficients(scheme)
    system = assemble(mesh, k_wave, cells)
    nodes = system.nodes
    history = SolutionHistory(
        initial=problem.initial_value(nodes),
        velocity=problem.initial_velocity(nodes),
        capacity=scheme.n_steps,
    )
    for step in range(1, scheme.n_steps + 1):
        t = scheme.time(step)
        g_mid = problem.forcing(nodes, t - 0.5 * scheme.tau)
        omega = rhs_f(scheme, history, step, g_mid) / scheme.kappa
        boundary_u = problem.boundary_value(mesh.midpoints, t)
        q = solve_step(system, boundary_u, omega)
        interior = interior_eval(system, boundary_u, q, omega)
        history.append(np.concatenate((boundary_u, interior)))
        log.debug("BEM step %d/%d done (t=%.6g).", step, scheme.n_steps, t)
    return history
