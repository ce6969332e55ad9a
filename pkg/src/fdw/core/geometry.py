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

"""Domains, boundary meshes of constant elements and interior cell sets"""

import logging
import math
from dataclasses import dataclass
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from fdw.core.errors import ConfigurationError

log = logging.getLogger(__name__)

Point = tuple[float, float]

# L-shaped hexagon with one reentrant corner
DEFAULT_POLYGON: tuple[Point, ...] = (
    (0.0, 0.0),
    (1.0, 0.0),
    (1.0, 0.5),
    (0.5, 0.5),
    (0.5, 1.0),
    (0.0, 1.0),
)


def segment_distances(
    points: np.ndarray, starts: np.ndarray, ends: np.ndarray
) -> np.ndarray:
    """Distances between every point (P, 2) and every segment (E, 2) -> (P, E)."""
    edges = ends - starts
    relative = points[:, np.newaxis, :] - starts[np.newaxis, :, :]
    squared_lengths = np.einsum("ej,ej->e", edges, edges)
    fraction = np.einsum("pej,ej->pe", relative, edges) / squared_lengths
    fraction = np.clip(fraction, 0.0, 1.0)
    offset = relative - fraction[..., np.newaxis] * edges[np.newaxis, :, :]
    return np.hypot(offset[..., 0], offset[..., 1])


def _signed_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _orientation(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    return float((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))


def _segments_intersect(
    p1: np.ndarray, p2: np.ndarray, q1: np.ndarray, q2: np.ndarray
) -> bool:
    d1 = _orientation(q1, q2, p1)
    d2 = _orientation(q1, q2, p2)
    d3 = _orientation(p1, p2, q1)
    d4 = _orientation(p1, p2, q2)
    if d1 * d2 < 0 and d3 * d4 < 0:
        return True
    points = np.array([p1, p2, q1, q2])
    touching = segment_distances(
        points, np.array([q1, q1, p1, p1]), np.array([q2, q2, p2, p2])
    )
    return bool(np.any(np.diag(touching) == 0.0))


class RectangleDomain(BaseModel):
    """The axis-aligned rectangle [x0, x1] x [y0, y1]."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["rectangle"] = "rectangle"
    x0: float = 0.0
    y0: float = 0.0
    x1: float = math.pi
    y1: float = math.pi

    @model_validator(mode="after")
    def check_sides(self) -> "RectangleDomain":
        """Both side lengths must be positive."""
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("A rectangle needs positive side lengths.")
        return self

    @property
    def area(self) -> float:
        """The area of the rectangle."""
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Strict interior test for an array of points of shape (..., 2)."""
        points = np.asarray(points, dtype=float)
        x, y = points[..., 0], points[..., 1]
        return (self.x0 < x) & (x < self.x1) & (self.y0 < y) & (y < self.y1)


class DiskDomain(BaseModel):
    """A disk given by its center and radius."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["disk"] = "disk"
    cx: float = 0.0
    cy: float = 0.0
    radius: float = Field(default=1.0, gt=0)

    @property
    def area(self) -> float:
        """The area of the disk."""
        return math.pi * self.radius**2

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Strict interior test for an array of points of shape (..., 2)."""
        points = np.asarray(points, dtype=float)
        distance = np.hypot(points[..., 0] - self.cx, points[..., 1] - self.cy)
        return distance < self.radius


class PolygonDomain(BaseModel):
    """A simple polygon with counterclockwise vertices."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["polygon"] = "polygon"
    vertices: tuple[Point, ...] = DEFAULT_POLYGON

    @field_validator("vertices")
    @classmethod
    def check_vertices(cls, value: tuple[Point, ...]) -> tuple[Point, ...]:
        """Checks that the polygon is simple and counterclockwise."""
        if len(value) < 3:
            raise ValueError("A polygon needs at least three vertices.")
        vertices = np.asarray(value, dtype=float)
        if not np.all(np.isfinite(vertices)):
            raise ValueError("Polygon vertices must be finite.")
        if _signed_area(vertices) <= 0:
            raise ValueError("Polygon vertices must be ordered counterclockwise.")

        count = len(vertices)
        ends = np.roll(vertices, -1, axis=0)
        for first in range(count):
            for second in range(first + 1, count):
                if second - first in (1, count - 1):
                    continue
                if _segments_intersect(
                    vertices[first], ends[first], vertices[second], ends[second]
                ):
                    raise ValueError(
                        f"Polygon edges {first} and {second} intersect;"
                        + " the polygon must be simple."
                    )
        return value

    @property
    def vertex_array(self) -> np.ndarray:
        """The vertices as an array of shape (n, 2)."""
        return np.asarray(self.vertices, dtype=float)

    @property
    def area(self) -> float:
        """The enclosed area."""
        return _signed_area(self.vertex_array)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Strict interior test for an array of points of shape (..., 2)."""
        points = np.asarray(points, dtype=float)
        flat = points.reshape(-1, 2)
        starts = self.vertex_array
        ends = np.roll(starts, -1, axis=0)

        x = flat[:, np.newaxis, 0]
        y = flat[:, np.newaxis, 1]
        straddles = (starts[:, 1] > y) != (ends[:, 1] > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            crossing_x = starts[:, 0] + (y - starts[:, 1]) * (
                ends[:, 0] - starts[:, 0]
            ) / (ends[:, 1] - starts[:, 1])
        crossings = np.count_nonzero(straddles & (x < crossing_x), axis=1)
        inside = crossings % 2 == 1

        scale = float(np.ptp(starts, axis=0).max())
        on_edge = segment_distances(flat, starts, ends).min(axis=1) <= 1e-12 * scale
        return (inside & ~on_edge).reshape(points.shape[:-1])


Domain = Annotated[
    Union[RectangleDomain, DiskDomain, PolygonDomain], Field(discriminator="kind")
]


def contains(domain: Domain, point: np.ndarray) -> bool:
    """True iff the point lies strictly inside the domain."""
    return bool(domain.contains(np.asarray(point, dtype=float)))


@dataclass(frozen=True, eq=False)
class BoundaryElement:
    """A single straight constant element."""

    start: np.ndarray
    end: np.ndarray
    midpoint: np.ndarray
    length: float
    normal: np.ndarray


@dataclass(frozen=True, eq=False)
class BoundaryMesh:
    """Closed chain of straight elements traversed counterclockwise.

    All per-element quantities are stored as arrays indexed by element.
    """

    starts: np.ndarray
    ends: np.ndarray
    midpoints: np.ndarray
    lengths: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray

    @classmethod
    def from_vertices(cls, vertices: np.ndarray) -> "BoundaryMesh":
        """Build a closed mesh whose element i runs from vertex i to vertex i+1."""
        starts = np.array(vertices, dtype=float)
        ends = np.roll(starts, -1, axis=0)
        edges = ends - starts
        lengths = np.hypot(edges[:, 0], edges[:, 1])
        if np.any(lengths <= 0):
            raise ConfigurationError(
                parameter="n_elements", reason="degenerate boundary element."
            )
        tangents = edges / lengths[:, np.newaxis]
        normals = np.column_stack((tangents[:, 1], -tangents[:, 0]))
        for array in (starts, ends, tangents, normals, lengths):
            array.setflags(write=False)
        midpoints = 0.5 * (starts + ends)
        midpoints.setflags(write=False)
        return cls(
            starts=starts,
            ends=ends,
            midpoints=midpoints,
            lengths=lengths,
            tangents=tangents,
            normals=normals,
        )

    def __len__(self) -> int:
        return len(self.lengths)

    @property
    def perimeter(self) -> float:
        """Total length of the boundary."""
        return float(self.lengths.sum())

    def element(self, index: int) -> BoundaryElement:
        """The element with the given index."""
        return BoundaryElement(
            start=self.starts[index],
            end=self.ends[index],
            midpoint=self.midpoints[index],
            length=float(self.lengths[index]),
            normal=self.normals[index],
        )

    def distance_to_boundary(self, points: np.ndarray) -> np.ndarray:
        """Distance of each point (P, 2) to the closest element."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return segment_distances(points, self.starts, self.ends).min(axis=1)


@dataclass(frozen=True, eq=False)
class InteriorCellSet:
    """Interior collocation points with the areas of their cells."""

    points: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def total_area(self) -> float:
        """Sum of all cell areas."""
        return float(self.weights.sum())


def _rectangle_vertices(domain: RectangleDomain, n_elements: int) -> np.ndarray:
    if n_elements % 4 != 0:
        raise ConfigurationError(
            parameter="n_elements",
            reason=f"{n_elements} is not divisible by 4 as required for rectangles.",
        )
    corners = np.array(
        [
            (domain.x0, domain.y0),
            (domain.x1, domain.y0),
            (domain.x1, domain.y1),
            (domain.x0, domain.y1),
        ]
    )
    per_side = n_elements // 4
    return _subdivide(corners, [per_side] * 4)


def _disk_vertices(domain: DiskDomain, n_elements: int) -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(n_elements) / n_elements
    return np.column_stack(
        (
            domain.cx + domain.radius * np.cos(angles),
            domain.cy + domain.radius * np.sin(angles),
        )
    )


def _polygon_vertices(domain: PolygonDomain, n_elements: int) -> np.ndarray:
    corners = domain.vertex_array
    edge_count = len(corners)
    if n_elements < edge_count:
        raise ConfigurationError(
            parameter="n_elements",
            reason=(
                f"{n_elements} elements cannot resolve a polygon with"
                + f" {edge_count} edges."
            ),
        )
    edges = np.roll(corners, -1, axis=0) - corners
    edge_lengths = np.hypot(edges[:, 0], edges[:, 1])
    share = n_elements * edge_lengths / edge_lengths.sum()
    counts = np.maximum(np.floor(share).astype(int), 1)

    # largest remainder, every edge keeps at least one element
    while counts.sum() < n_elements:
        counts[np.argmax(share - counts)] += 1
    while counts.sum() > n_elements:
        candidates = np.where(counts > 1, share - counts, np.inf)
        counts[np.argmin(candidates)] -= 1
    return _subdivide(corners, counts.tolist())


def _subdivide(corners: np.ndarray, counts: list[int]) -> np.ndarray:
    ends = np.roll(corners, -1, axis=0)
    pieces = []
    for start, end, count in zip(corners, ends, counts):
        fractions = np.arange(count)[:, np.newaxis] / count
        pieces.append(start + fractions * (end - start))
    return np.concatenate(pieces)


def discretize_boundary(domain: Domain, n_elements: int) -> BoundaryMesh:
    """Split the boundary of the domain into straight constant elements.

    Rectangles get the same number of elements on every side, disks a uniform
    angular subdivision and polygons element counts proportional to the edge
    lengths. The mesh starts at the first corner (or at angle zero) and runs
    counterclockwise.
    """
    if n_elements < 4:
        raise ConfigurationError(
            parameter="n_elements",
            reason=f"at least 4 elements needed, got {n_elements}.",
        )
    if isinstance(domain, RectangleDomain):
        vertices = _rectangle_vertices(domain, n_elements)
    elif isinstance(domain, DiskDomain):
        vertices = _disk_vertices(domain, n_elements)
    else:
        vertices = _polygon_vertices(domain, n_elements)

    mesh = BoundaryMesh.from_vertices(vertices)
    log.debug("Discretized %s boundary into %d elements.", domain.kind, len(mesh))
    return mesh


def _rectangle_cells(domain: RectangleDomain, resolution: int) -> InteriorCellSet:
    dx = (domain.x1 - domain.x0) / resolution
    dy = (domain.y1 - domain.y0) / resolution
    xs = domain.x0 + (np.arange(resolution) + 0.5) * dx
    ys = domain.y0 + (np.arange(resolution) + 0.5) * dy
    grid_x, grid_y = np.meshgrid(xs, ys)
    points = np.column_stack((grid_x.ravel(), grid_y.ravel()))
    return InteriorCellSet(points=points, weights=np.full(len(points), dx * dy))


def _disk_cells(domain: DiskDomain, resolution: int) -> InteriorCellSet:
    sectors = 4 * resolution
    radii = domain.radius * np.arange(resolution + 1) / resolution
    sector_angle = 2.0 * np.pi / sectors
    mid_radii = 0.5 * (radii[:-1] + radii[1:])
    ring_areas = 0.5 * sector_angle * (radii[1:] ** 2 - radii[:-1] ** 2)
    angles = (np.arange(sectors) + 0.5) * sector_angle

    ring_radius, ring_angle = np.meshgrid(mid_radii, angles, indexing="ij")
    points = np.column_stack(
        (
            domain.cx + (ring_radius * np.cos(ring_angle)).ravel(),
            domain.cy + (ring_radius * np.sin(ring_angle)).ravel(),
        )
    )
    weights = np.repeat(ring_areas, sectors)
    return InteriorCellSet(points=points, weights=weights)


def _polygon_cells(domain: PolygonDomain, resolution: int) -> InteriorCellSet:
    vertices = domain.vertex_array
    lower = vertices.min(axis=0)
    upper = vertices.max(axis=0)
    spacing = (upper - lower) / resolution
    xs = lower[0] + (np.arange(resolution) + 0.5) * spacing[0]
    ys = lower[1] + (np.arange(resolution) + 0.5) * spacing[1]
    grid_x, grid_y = np.meshgrid(xs, ys)
    candidates = np.column_stack((grid_x.ravel(), grid_y.ravel()))
    points = candidates[domain.contains(candidates)]
    return InteriorCellSet(
        points=points, weights=np.full(len(points), spacing[0] * spacing[1])
    )


def interior_cells(domain: Domain, resolution: int) -> InteriorCellSet:
    """Interior collocation points at cell centers with the cell areas as weights."""
    if resolution < 2:
        raise ConfigurationError(
            parameter="interior_res", reason=f"at least 2 needed, got {resolution}."
        )
    if isinstance(domain, RectangleDomain):
        cells = _rectangle_cells(domain, resolution)
    elif isinstance(domain, DiskDomain):
        cells = _disk_cells(domain, resolution)
    else:
        cells = _polygon_cells(domain, resolution)

    if len(cells) == 0:
        raise ConfigurationError(
            parameter="interior_res",
            reason=f"no cell center of the {resolution}x{resolution} grid is interior.",
        )
    cells.points.setflags(write=False)
    cells.weights.setflags(write=False)
    log.debug("Built %d interior cells on the %s.", len(cells), domain.kind)
    return cells
