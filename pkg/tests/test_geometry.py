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

"""Tests for boundary meshes, domains and interior cells"""

import math

import numpy as np
import pytest
from pydantic import TypeAdapter, ValidationError

from fdw.core.errors import ConfigurationError
from fdw.core.geometry import (
    DEFAULT_POLYGON,
    DiskDomain,
    Domain,
    PolygonDomain,
    RectangleDomain,
    contains,
    discretize_boundary,
    interior_cells,
)

DOMAINS = [
    RectangleDomain(),
    DiskDomain(cx=0.5, cy=-1.0, radius=2.0),
    PolygonDomain(),
]


@pytest.mark.parametrize("domain", DOMAINS, ids=lambda domain: domain.kind)
def test_element_invariants(domain):
    """Test unit outward normals, midpoints and lengths of every element."""
    mesh = discretize_boundary(domain, 40)
    assert len(mesh) == 40
    np.testing.assert_allclose(np.linalg.norm(mesh.normals, axis=1), 1.0, atol=1e-12)
    edges = mesh.ends - mesh.starts
    np.testing.assert_allclose(np.sum(edges * mesh.normals, axis=1), 0.0, atol=1e-12)
    np.testing.assert_allclose(mesh.midpoints, 0.5 * (mesh.starts + mesh.ends))
    np.testing.assert_allclose(mesh.lengths, np.linalg.norm(edges, axis=1))
    np.testing.assert_array_equal(mesh.ends[:-1], mesh.starts[1:])
    np.testing.assert_array_equal(mesh.ends[-1], mesh.starts[0])

    # a small step against the normal enters the domain
    step = 1e-3 * mesh.lengths.min()
    assert np.all(domain.contains(mesh.midpoints - step * mesh.normals))
    if not isinstance(domain, DiskDomain):
        assert not np.any(domain.contains(mesh.midpoints + step * mesh.normals))
    else:
        # chords lie inside the circle, so step out by the sagitta as well
        sagitta = domain.radius * (1 - math.cos(math.pi / len(mesh)))
        outside = mesh.midpoints + (sagitta + step) * mesh.normals
        assert not np.any(domain.contains(outside))


def test_element_view():
    """Test that a single element carries the mesh data."""
    mesh = discretize_boundary(RectangleDomain(), 8)
    element = mesh.element(2)
    assert element.length == pytest.approx(math.pi / 2)
    np.testing.assert_allclose(element.midpoint, [math.pi, math.pi / 4])
    np.testing.assert_allclose(element.normal, [1.0, 0.0], atol=1e-15)


def test_perimeters():
    """Test the perimeters of the square and the inscribed disk polygon."""
    square = discretize_boundary(RectangleDomain(), 8)
    assert square.perimeter == pytest.approx(4 * math.pi)
    n_elements = 30
    disk = discretize_boundary(DiskDomain(), n_elements)
    expected = 2 * n_elements * math.sin(math.pi / n_elements)
    assert disk.perimeter == pytest.approx(expected)


def test_polygon_element_distribution():
    """Test that every polygon edge gets elements in proportion to its length."""
    mesh = discretize_boundary(PolygonDomain(), 48)
    assert len(mesh) == 48
    # the L-shape has edges of lengths 1, 0.5, 0.5, 0.5, 0.5, 1 (perimeter 4)
    np.testing.assert_allclose(mesh.lengths, 1 / 12)
    corners = {tuple(np.round(vertex, 12)) for vertex in mesh.starts}
    assert {tuple(vertex) for vertex in DEFAULT_POLYGON} <= corners


@pytest.mark.parametrize(
    "domain, n_elements",
    [
        (RectangleDomain(), 3),
        (RectangleDomain(), 10),
        (DiskDomain(), 2),
        (PolygonDomain(), 5),
    ],
)
def test_invalid_element_counts(domain, n_elements: int):
    """Test that unusable element counts are rejected."""
    with pytest.raises(ConfigurationError):
        discretize_boundary(domain, n_elements)


def test_rectangle_cells():
    """Test the cell grid of the square."""
    cells = interior_cells(RectangleDomain(), 5)
    assert len(cells) == 25
    assert cells.total_area == pytest.approx(math.pi**2)
    np.testing.assert_allclose(cells.points.min(axis=0), math.pi / 10)
    assert not cells.points.flags.writeable


def test_disk_cells():
    """Test that the disk cells tile the disk exactly."""
    domain = DiskDomain(cx=1.0, cy=2.0, radius=0.5)
    cells = interior_cells(domain, 4)
    assert len(cells) == 4 * 16
    assert cells.total_area == pytest.approx(domain.area, rel=1e-14)
    assert np.all(domain.contains(cells.points))


def test_polygon_cells():
    """Test that polygon cells are interior and roughly cover the polygon."""
    domain = PolygonDomain()
    cells = interior_cells(domain, 20)
    assert np.all(domain.contains(cells.points))
    assert cells.total_area == pytest.approx(domain.area, rel=0.05)


def test_invalid_resolution():
    """Test that resolutions below two are rejected."""
    with pytest.raises(ConfigurationError):
        interior_cells(RectangleDomain(), 1)


def test_contains():
    """Test strict interior membership, boundary points excluded."""
    assert contains(RectangleDomain(), [1.0, 1.0])
    assert not contains(RectangleDomain(), [0.0, 1.0])
    assert not contains(DiskDomain(), [1.0, 0.0])
    assert contains(DiskDomain(), [0.3, -0.3])
    polygon = PolygonDomain()
    assert contains(polygon, [0.25, 0.75])
    assert not contains(polygon, [0.75, 0.75])
    assert not contains(polygon, [0.5, 0.75])


@pytest.mark.parametrize(
    "payload",
    [
        {"kind": "rectangle", "x0": 1.0, "x1": 0.0},
        {"kind": "disk", "radius": 0.0},
        {"kind": "polygon", "vertices": [[0, 0], [0, 1], [1, 0]]},
        {"kind": "polygon", "vertices": [[0, 0], [2, 0], [0, 1], [2, 1]]},
        {"kind": "polygon", "vertices": [[0, 0], [1, 0]]},
    ],
)
def test_invalid_domains(payload: dict):
    """Test that degenerate, clockwise and self-intersecting domains are rejected."""
    with pytest.raises(ValidationError):
        TypeAdapter(Domain).validate_python(payload)


def test_domain_discriminator():
    """Test that the kind field selects the domain type."""
    domain = TypeAdapter(Domain).validate_python({"kind": "disk", "radius": 3.0})
    assert isinstance(domain, DiskDomain)
    assert domain.area == pytest.approx(9 * math.pi)
