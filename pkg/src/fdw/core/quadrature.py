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

"""Gauss-Legendre rules on straight boundary elements.

Sources close to an element get a composite rule graded towards the closest
element point. Large source sets are processed in blocks of about
BLOCK_ENTRIES kernel evaluations.

Integrands receive field points of shape (..., Q, 2), source points of shape
(..., 1, 2) and outward normals of shape (..., 1, 2) and return one array of
shape (..., Q) per integrated kernel.
"""

from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from fdw.core.geometry import BoundaryMesh

GAUSS_ORDER = 8
NEAR_GAUSS_ORDER = 16
NEAR_FIELD_FACTOR = 2.0
MAX_GRADING_LEVELS = 48
MIN_GAP = 1e-14
BLOCK_ENTRIES = 1 << 21

Integrand = Callable[[np.ndarray, np.ndarray, np.ndarray], tuple[np.ndarray, ...]]


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def element_rule(mesh: BoundaryMesh, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature points (N, Q, 2) and scaled weights (N, Q) on every element."""
    nodes, weights = gauss_legendre(order)
    half_lengths = 0.5 * mesh.lengths
    offsets = nodes[np.newaxis, :] * half_lengths[:, np.newaxis]
    points = (
        mesh.midpoints[:, np.newaxis, :]
        + offsets[..., np.newaxis] * mesh.tangents[:, np.newaxis, :]
    )
    return points, weights[np.newaxis, :] * half_lengths[:, np.newaxis]


def split_element_rule(mesh: BoundaryMesh, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Like element_rule, with a separate rule on each half of every element.

    Used when the source sits at the element midpoint.
    """
    nodes, weights = gauss_legendre(order)
    quarter_lengths = 0.25 * mesh.lengths
    # local coordinate s in [-l/2, 0] and [0, l/2]
    local = np.concatenate((0.5 * (nodes - 1.0), 0.5 * (nodes + 1.0)))
    offsets = local[np.newaxis, :] * (2.0 * quarter_lengths)[:, np.newaxis]
    points = (
        mesh.midpoints[:, np.newaxis, :]
        + offsets[..., np.newaxis] * mesh.tangents[:, np.newaxis, :]
    )
    scaled = np.concatenate((weights, weights))[np.newaxis, :] * quarter_lengths[
        :, np.newaxis
    ]
    return points, scaled


def _closest_on_elements(
    mesh: BoundaryMesh, columns: np.ndarray, sources: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Local coordinate of the element point closest to each paired source
    and the distance between the two.
    """
    half_lengths = 0.5 * mesh.lengths[columns]
    tangents = mesh.tangents[columns]
    along = np.sum((sources - mesh.midpoints[columns]) * tangents, axis=-1)
    foot = np.clip(along, -half_lengths, half_lengths)
    closest = mesh.midpoints[columns] + foot[:, np.newaxis] * tangents
    gap = np.hypot(*(sources - closest).T)
    return foot, np.maximum(gap, MIN_GAP * mesh.lengths[columns])


def grading_levels(
    mesh: BoundaryMesh, columns: np.ndarray, sources: np.ndarray
) -> np.ndarray:
    """Number of panels graded_element_rule needs on each side of the closest
    point for every (element, source) pair.
    """
    foot, gap = _closest_on_elements(mesh, columns, sources)
    longer_side = 0.5 * mesh.lengths[columns] + np.abs(foot)
    levels = np.ceil(np.log2(longer_side / gap + 1.0))
    return np.clip(levels, 1, MAX_GRADING_LEVELS).astype(int)


def graded_element_rule(
    mesh: BoundaryMesh,
    columns: np.ndarray,
    sources: np.ndarray,
    order: int,
    levels: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Composite rule on the elements `columns`, refined towards the point of
    each element closest to its paired source.

    Starting at the closest point, panel ends sit at gap * (2^j - 1) on both
    sides, so every panel lies at least its own length away from the source.
    Panels past the element end collapse to zero weight. Returns points of
    shape (P, 2 * levels * order, 2) and weights of shape (P, 2 * levels * order).
    """
    nodes, weights = gauss_legendre(order)
    sources = np.asarray(sources, dtype=float)
    foot, gap = _closest_on_elements(mesh, columns, sources)
    half_lengths = 0.5 * mesh.lengths[columns]
    ends = gap[:, np.newaxis] * (2.0 ** np.arange(levels + 1) - 1.0)

    local_parts, weight_parts = [], []
    for sign, side in ((1.0, half_lengths - foot), (-1.0, half_lengths + foot)):
        bounds = np.minimum(ends, side[:, np.newaxis])
        centres = 0.5 * (bounds[:, 1:] + bounds[:, :-1])
        radii = 0.5 * (bounds[:, 1:] - bounds[:, :-1])
        offsets = centres[..., np.newaxis] + radii[..., np.newaxis] * nodes
        local_parts.append(foot[:, np.newaxis] + sign * offsets.reshape(len(foot), -1))
        weight_parts.append((radii[..., np.newaxis] * weights).reshape(len(foot), -1))

    local = np.concatenate(local_parts, axis=1)
    points = (
        mesh.midpoints[columns, np.newaxis, :]
        + local[..., np.newaxis] * mesh.tangents[columns, np.newaxis, :]
    )
    return points, np.concatenate(weight_parts, axis=1)


def _integrate_near_pairs(
    mesh: BoundaryMesh,
    sources: np.ndarray,
    integrand: Integrand,
    rows: np.ndarray,
    columns: np.ndarray,
    results: tuple[np.ndarray, ...],
) -> None:
    levels = grading_levels(mesh, columns, sources[rows])
    for level in np.unique(levels):
        chosen = np.flatnonzero(levels == level)
        pairs_per_block = max(1, BLOCK_ENTRIES // (2 * int(level) * NEAR_GAUSS_ORDER))
        for start in range(0, chosen.size, pairs_per_block):
            pairs = chosen[start : start + pairs_per_block]
            pair_rows, pair_columns = rows[pairs], columns[pairs]
            points, weights = graded_element_rule(
                mesh, pair_columns, sources[pair_rows], NEAR_GAUSS_ORDER, int(level)
            )
            values = integrand(
                points,
                sources[pair_rows, np.newaxis, :],
                mesh.normals[pair_columns, np.newaxis, :],
            )
            for result, value in zip(results, values):
                result[pair_rows, pair_columns] = np.einsum("pq,pq->p", value, weights)


def integrate_over_elements(
    mesh: BoundaryMesh,
    sources: np.ndarray,
    integrand: Integrand,
    *,
    self_elements: Optional[np.ndarray] = None,
    block_size: Optional[int] = None,
) -> tuple[np.ndarray, ...]:
    """Integrate kernels over every element for every source.

    Returns one (S, N) matrix per kernel. Pairs with the source closer to the
    element midpoint than NEAR_FIELD_FACTOR element lengths are integrated
    with graded_element_rule. Entries of sources sitting on their own element
    (given by `self_elements`, -1 for none) are left at zero for the caller
    to fill. Sources are processed `block_size` rows at a time.
    """
    sources = np.atleast_2d(np.asarray(sources, dtype=float))
    if block_size is None:
        block_size = max(1, BLOCK_ENTRIES // (len(mesh) * GAUSS_ORDER))
    points, weights = element_rule(mesh, GAUSS_ORDER)

    blocks = []
    for start in range(0, max(len(sources), 1), block_size):
        block = sources[start : start + block_size]
        values = integrand(
            points[np.newaxis, :, :, :],
            block[:, np.newaxis, np.newaxis, :],
            mesh.normals[np.newaxis, :, np.newaxis, :],
        )
        blocks.append([np.einsum("snq,nq->sn", value, weights) for value in values])
    results = tuple(np.concatenate(parts, axis=0) for parts in zip(*blocks))

    offsets = sources[:, np.newaxis, :] - mesh.midpoints[np.newaxis, :, :]
    distances = np.hypot(offsets[..., 0], offsets[..., 1])
    near = distances < NEAR_FIELD_FACTOR * mesh.lengths[np.newaxis, :]

    own_rows = own_columns = np.empty(0, dtype=int)
    if self_elements is not None:
        own_rows = np.flatnonzero(self_elements >= 0)
        own_columns = self_elements[own_rows]
        near[own_rows, own_columns] = False

    rows, columns = np.nonzero(near)
    if rows.size:
        _integrate_near_pairs(mesh, sources, integrand, rows, columns, results)

    for result in results:
        result[own_rows, own_columns] = 0.0
    return results
