"""Conforming 2D triangle meshes with a facet-indexed representation.

Every scheme term in this package is a cell or facet integral, so the mesh
stores, besides vertices and cells, a deduplicated facet table with
two-sided cell adjacency, a fixed global unit normal per facet, and the
per-cell sign relating outward and global normals.

Conventions
-----------
* cells are counterclockwise vertex triples; local facet j of cell
  (v0, v1, v2) is the edge (vj, v(j+1) mod 3)
* a facet is stored as a sorted vertex pair (a, b) with a < b; its global
  normal is the tangent (b - a) rotated by -90 degrees, and its quadrature
  parametrization runs from a to b
* for interior facets, side 0 is the adjacent cell with the smaller index
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import MeshParseError, MeshTopologyError
from .quadrature import interval_rule, map_to_cells, triangle_rule


@dataclass(frozen=True)
class FacetSide:
    """One side of a facet: adjacent cell, local facet index, and the sign
    relating the cell's outward normal to the facet's global normal."""

    cell: int
    local_index: int
    sign: int


class Mesh:
    """Immutable conforming triangulation of a polygonal 2D domain."""

    def __init__(self, vertices, cells, _reorient=False):
        vertices = np.asarray(vertices, dtype=float)
        cells = np.asarray(cells, dtype=int)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise ValueError("vertices must be an (n, 2) array")
        if cells.ndim != 2 or cells.shape[1] != 3:
            raise ValueError("cells must be an (m, 3) array of vertex ids")
        if cells.size and (cells.min() < 0 or cells.max() >= len(vertices)):
            raise MeshTopologyError("cell references a missing vertex")

        signed = _signed_areas(vertices, cells)
        flipped = signed < 0.0
        if flipped.any():
            if not _reorient:
                raise MeshTopologyError(
                    f"{int(flipped.sum())} cell(s) have negative orientation"
                )
            warnings.warn(
                f"reoriented {int(flipped.sum())} clockwise cell(s)",
                stacklevel=3,
            )
            cells = cells.copy()
            cells[flipped] = cells[flipped][:, ::-1]
            signed = np.abs(signed)
        if (signed <= 0.0).any():
            bad = int(np.argmin(signed))
            raise MeshTopologyError(f"cell {bad} is degenerate (zero area)")

        self.vertices = vertices
        self.cells = cells
        self.cell_areas = signed
        self.cell_vertices = vertices[cells]  # (m, 3, 2)
        self._build_facets()
        self._frozen = True

    def __setattr__(self, name, value):
        if getattr(self, "_frozen", False):
            raise AttributeError("Mesh is immutable after construction")
        super().__setattr__(name, value)

    def _build_facets(self):
        cells = self.cells
        m = len(cells)
        # edges in local order (v0,v1), (v1,v2), (v2,v0)
        edges = np.stack(
            [cells, np.roll(cells, -1, axis=1)], axis=-1
        ).reshape(-1, 2)
        sorted_edges = np.sort(edges, axis=1)
        facets, inverse = np.unique(sorted_edges, axis=0, return_inverse=True)
        nf = len(facets)

        counts = np.bincount(inverse, minlength=nf)
        if counts.max() > 2:
            raise MeshTopologyError(
                f"facet {int(np.argmax(counts))} is shared by more than 2 cells"
            )

        facet_cells = np.full((nf, 2), -1, dtype=int)
        facet_local = np.full((nf, 2), -1, dtype=int)
        cell_ids = np.repeat(np.arange(m), 3)
        local_ids = np.tile(np.arange(3), m)
        # fill side 0 with the smaller cell id by iterating in cell order
        for f, c, l in zip(inverse, cell_ids, local_ids):
            if facet_cells[f, 0] == -1:
                facet_cells[f, 0] = c
                facet_local[f, 0] = l
            else:
                facet_cells[f, 1] = c
                facet_local[f, 1] = l

        tang = self.vertices[facets[:, 1]] - self.vertices[facets[:, 0]]
        lengths = np.hypot(tang[:, 0], tang[:, 1])
        if (lengths == 0.0).any():
            raise MeshTopologyError("zero-length facet")
        tang = tang / lengths[:, None]
        normals = np.column_stack([tang[:, 1], -tang[:, 0]])

        # sign: +1 when the cell traverses the edge in sorted (a -> b) order
        cell_facets = inverse.reshape(m, 3)
        traversal_matches = edges[:, 0] < edges[:, 1]
        cell_facet_signs = np.where(traversal_matches, 1, -1).reshape(m, 3)
        cell_facet_sides = (
            facet_cells[cell_facets, 1] == np.arange(m)[:, None]
        ).astype(int)

        self.facets = facets
        self.facet_cells = facet_cells
        self.facet_local = facet_local
        self.facet_normals = normals
        self.facet_lengths = lengths
        self.facet_is_boundary = facet_cells[:, 1] == -1
        self.cell_facets = cell_facets
        self.cell_facet_signs = cell_facet_signs
        self.cell_facet_sides = cell_facet_sides

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_cells(self):
        return len(self.cells)

    @property
    def num_facets(self):
        return len(self.facets)

    @property
    def h(self):
        """Mesh size: maximum facet length."""
        return float(self.facet_lengths.max())

    def facet_sides(self, facet):
        """The 1-2 FacetSide records adjacent to a facet."""
        sides = []
        for s in range(2):
            c = self.facet_cells[facet, s]
            if c < 0:
                continue
            l = self.facet_local[facet, s]
            sides.append(FacetSide(int(c), int(l), int(self.cell_facet_signs[c, l])))
        return sides

    def min_angle(self):
        """Smallest interior angle over all cells, in degrees (reported as a
        shape-regularity indicator; no bound is enforced)."""
        v = self.cell_vertices
        angles = []
        for i in range(3):
            a = v[:, (i + 1) % 3] - v[:, i]
            b = v[:, (i + 2) % 3] - v[:, i]
            cosang = np.einsum("ij,ij->i", a, b) / (
                np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
            )
            angles.append(np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0))))
        return float(np.min(angles))


def _signed_areas(vertices, cells):
    v = vertices[cells]
    e1 = v[:, 1] - v[:, 0]
    e2 = v[:, 2] - v[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def build_structured_mesh(nx: int, domain=(0.0, 0.0, 1.0, 1.0)) -> Mesh:
    """Uniform triangulation of an axis-aligned rectangle.

    Each of the nx*nx grid squares is split along its main diagonal into
    two counterclockwise triangles (2*nx^2 cells total).

    Parameters
    ----------
    nx : cells per axis, >= 1
    domain : (x0, y0, x1, y1) rectangle corners
    """
    if nx < 1:
        raise ValueError("nx must be at least 1")
    x0, y0, x1, y1 = domain
    if not (x1 > x0 and y1 > y0):
        raise ValueError("domain rectangle is empty")
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, nx + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return i * (nx + 1) + j

    cells = []
    for i in range(nx):
        for j in range(nx):
            v00 = vid(i, j)
            v10 = vid(i + 1, j)
            v01 = vid(i, j + 1)
            v11 = vid(i + 1, j + 1)
            cells.append((v00, v10, v11))
            cells.append((v00, v11, v01))
    return Mesh(vertices, np.array(cells))


def load_mesh(path) -> Mesh:
    """Read the documented text format.

    Header line "vertices N / cells M", then N lines "x y", then M lines
    "i j k" (0-based vertex ids). Clockwise cells are reoriented with a
    warning; broken connectivity raises MeshTopologyError.
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()

    def tokens(line):
        return line.replace("/", " ").split()

    idx = 0
    while idx < len(lines) and not lines[idx].strip():
        idx += 1
    if idx >= len(lines):
        raise MeshParseError(1, "empty file")
    head = tokens(lines[idx])
    if len(head) != 4 or head[0] != "vertices" or head[2] != "cells":
        raise MeshParseError(idx + 1, "expected header 'vertices N / cells M'")
    try:
        nv, nc = int(head[1]), int(head[3])
    except ValueError:
        raise MeshParseError(idx + 1, "header counts must be integers") from None

    def read_rows(start, count, width, cast, what):
        rows = []
        lineno = start
        while len(rows) < count:
            if lineno >= len(lines):
                raise MeshParseError(lineno + 1, f"unexpected end of file in {what}")
            raw = lines[lineno].strip()
            lineno += 1
            if not raw or raw.startswith("#"):
                continue
            parts = raw.split()
            if len(parts) != width:
                raise MeshParseError(lineno, f"expected {width} {what} fields")
            try:
                rows.append([cast(p) for p in parts])
            except ValueError:
                raise MeshParseError(lineno, f"bad {what} value {raw!r}") from None
        return rows, lineno

    verts, after = read_rows(idx + 1, nv, 2, float, "vertex")
    cells, after = read_rows(after, nc, 3, int, "cell")
    return Mesh(np.array(verts), np.array(cells), _reorient=True)


def write_mesh(path, mesh: Mesh):
    """Write a Mesh in the format accepted by load_mesh."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"vertices {mesh.num_vertices} / cells {mesh.num_cells}\n")
        for x, y in mesh.vertices:
            fh.write(f"{x!r} {y!r}\n")
        for a, b, c in mesh.cells:
            fh.write(f"{a} {b} {c}\n")


def facet_quadrature(mesh: Mesh, facet: int, order: int):
    """Gauss points mapped to one facet; weights sum to its length."""
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    t, w = interval_rule(order)
    a = mesh.vertices[mesh.facets[facet, 0]]
    b = mesh.vertices[mesh.facets[facet, 1]]
    points = a[None, :] + t[:, None] * (b - a)[None, :]
    return points, w * mesh.facet_lengths[facet]


def all_facet_quadrature(mesh: Mesh, order: int):
    """Vectorized facet rule: t-params (nq,), points (F, nq, 2), weights
    (F, nq)."""
    t, w = interval_rule(order)
    a = mesh.vertices[mesh.facets[:, 0]]
    b = mesh.vertices[mesh.facets[:, 1]]
    points = a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]
    weights = w[None, :] * mesh.facet_lengths[:, None]
    return t, points, weights


def all_cell_quadrature(mesh: Mesh, degree: int):
    """Triangle rule mapped to every cell: points (m, nq, 2), weights
    (m, nq)."""
    ref_pts, ref_w = triangle_rule(degree)
    return map_to_cells(ref_pts, ref_w, mesh.cell_vertices)
