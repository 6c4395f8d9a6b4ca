"""Discrete spaces: broken P_k on cells, single-valued P_k on facets, and
broken Raviart-Thomas RT_k on cells, for k in {0, 1}.

All bases are built in physical coordinates, centered and scaled per cell
for conditioning. The RT basis on each cell is the dual basis of the
degrees of freedom

    (1/h_e) <u . n_e, mu_j>_e   for each facet e, mu_j in P_k(e),
    (1/|K|) (u, e_m)_K          for e_m in [P_{k-1}(K)]^2 (k = 1 only),

with n_e the facet's fixed global normal and the facet parametrized from
its smaller to its larger vertex id. Interpolation therefore reduces to
evaluating these functionals, and a constant field (1, 0) has facet
coefficients n_{e,x}.
"""

from dataclasses import dataclass, field

import numpy as np

from .mesh import FacetSide, Mesh
from .quadrature import interval_rule, triangle_rule


def _cell_sizes(mesh):
    centers = mesh.cell_vertices.mean(axis=1)
    scales = np.sqrt(2.0 * mesh.cell_areas)
    return centers, scales


class FeSpace:
    """Basis + DOF layout for one space kind on a mesh."""

    CELL = "cell_pk"
    FACET = "facet_pk"
    RT = "rt_k"

    def __init__(self, kind: str, mesh: Mesh, degree: int):
        if kind not in (self.CELL, self.FACET, self.RT):
            raise ValueError(f"unknown space kind {kind!r}")
        if degree not in (0, 1):
            raise ValueError("only degrees 0 and 1 are supported")
        self.kind = kind
        self.mesh = mesh
        self.degree = degree
        self.centers, self.scales = _cell_sizes(mesh)
        if kind == self.CELL:
            self.ndofs_local = (degree + 1) * (degree + 2) // 2
            self.num_entities = mesh.num_cells
        elif kind == self.FACET:
            self.ndofs_local = degree + 1
            self.num_entities = mesh.num_facets
        else:
            self.ndofs_local = (degree + 1) * (degree + 3)
            self.num_entities = mesh.num_cells
        self.dofs_total = self.ndofs_local * self.num_entities
        self._rt_coef = None

    def entity_dofs(self, entities=None):
        """Global dof indices, shape (num_entities, ndofs_local)."""
        if entities is None:
            entities = np.arange(self.num_entities)
        entities = np.asarray(entities)
        return entities[..., None] * self.ndofs_local + np.arange(self.ndofs_local)

    # -- scalar cell basis -------------------------------------------------

    def cell_values(self, cells, points):
        """P_k values at physical points, shape (..., nq, nloc).

        cells: (...,) cell ids; points: (..., nq, 2).
        """
        self._need(self.CELL)
        cells = np.asarray(cells)
        xc = self.centers[cells][..., None, :]
        s = self.scales[cells][..., None]
        out = np.ones(points.shape[:-1] + (self.ndofs_local,))
        if self.degree >= 1:
            out[..., 1] = (points[..., 0] - xc[..., 0]) / s
            out[..., 2] = (points[..., 1] - xc[..., 1]) / s
        return out

    def cell_gradients(self, cells):
        """Constant P_k gradients per cell, shape (..., nloc, 2)."""
        self._need(self.CELL)
        cells = np.asarray(cells)
        out = np.zeros(cells.shape + (self.ndofs_local, 2))
        if self.degree >= 1:
            s = self.scales[cells]
            out[..., 1, 0] = 1.0 / s
            out[..., 2, 1] = 1.0 / s
        return out

    # -- facet basis ---------------------------------------------------------

    def facet_values(self, t):
        """P_k(e) values at parameters t in [0, 1], shape (nq, k+1).

        The basis is the same for every facet (global parametrization)."""
        self._need(self.FACET)
        t = np.asarray(t, dtype=float)
        out = np.ones(t.shape + (self.ndofs_local,))
        if self.degree >= 1:
            out[..., 1] = 2.0 * t - 1.0
        return out

    # -- Raviart-Thomas basis ------------------------------------------------

    @property
    def num_generators(self):
        return self.ndofs_local

    def rt_generators(self, cells, points):
        """Monomial generating set of RT_k at physical points.

        Returns values (..., nq, ngen, 2) and divergences (..., nq, ngen).
        """
        self._need(self.RT)
        cells = np.asarray(cells)
        xc = self.centers[cells][..., None, :]
        s = self.scales[cells][..., None]
        xb = (points[..., 0] - xc[..., 0]) / s
        yb = (points[..., 1] - xc[..., 1]) / s
        shape = points.shape[:-1]
        ngen = self.num_generators
        vals = np.zeros(shape + (ngen, 2))
        divs = np.zeros(shape + (ngen,))
        vals[..., 0, 0] = 1.0
        vals[..., 1, 1] = 1.0
        if self.degree == 0:
            vals[..., 2, 0] = xb
            vals[..., 2, 1] = yb
            divs[..., 2] = 2.0 / s
        else:
            vals[..., 2, 0] = xb
            vals[..., 3, 0] = yb
            vals[..., 4, 1] = xb
            vals[..., 5, 1] = yb
            vals[..., 6, 0] = xb * xb
            vals[..., 6, 1] = xb * yb
            vals[..., 7, 0] = xb * yb
            vals[..., 7, 1] = yb * yb
            divs[..., 2] = 1.0 / s
            divs[..., 5] = 1.0 / s
            divs[..., 6] = 3.0 * xb / s
            divs[..., 7] = 3.0 * yb / s
        return vals, divs

    @property
    def rt_coef(self):
        """Generator-to-basis coefficients (ncells, ngen, ndof), basis dual
        to the facet/interior moment functionals."""
        self._need(self.RT)
        if self._rt_coef is None:
            self._rt_coef = _build_rt_coef(self)
        return self._rt_coef

    def rt_values(self, cells, points):
        """RT basis values and divergences at physical points.

        Returns values (..., nq, ndof, 2) and divergences (..., nq, ndof).
        """
        gen_vals, gen_divs = self.rt_generators(cells, points)
        coef = self.rt_coef[np.asarray(cells)]
        vals = np.einsum("...qgx,...gd->...qdx", gen_vals, coef)
        divs = np.einsum("...qg,...gd->...qd", gen_divs, coef)
        return vals, divs

    def _need(self, kind):
        if self.kind != kind:
            raise ValueError(f"operation requires a {kind} space, got {self.kind}")


def _build_rt_coef(space):
    """Invert the local moment Vandermonde on every cell."""
    mesh = space.mesh
    k = space.degree
    ndof = space.ndofs_local
    m = mesh.num_cells

    t, w = interval_rule(2 * k + 1)
    mu = np.ones((len(t), k + 1))
    if k >= 1:
        mu[:, 1] = 2.0 * t - 1.0

    V = np.zeros((m, ndof, ndof))
    cells = np.arange(m)
    for j in range(3):
        fac = mesh.cell_facets[:, j]
        a = mesh.vertices[mesh.facets[fac, 0]]
        b = mesh.vertices[mesh.facets[fac, 1]]
        pts = a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]
        gen_vals, _ = space.rt_generators(cells, pts)
        n = mesh.facet_normals[fac]
        tr = np.einsum("mqgx,mx->mqg", gen_vals, n)
        # (1/h_e) int (g . n_e) mu_i ds with physical weight h_e * w -> h_e cancels
        rows = np.einsum("q,mqg,qi->mig", w, tr, mu)
        V[:, j * (k + 1) : (j + 1) * (k + 1), :] = rows
    if k == 1:
        pts, wts = triangle_rule(2 * k + 2), None
        ref_pts, ref_w = pts
        from .quadrature import map_to_cells

        qp, qw = map_to_cells(ref_pts, ref_w, mesh.cell_vertices)
        gen_vals, _ = space.rt_generators(cells, qp)
        for m_i in range(2):
            rows = np.einsum("mq,mqg->mg", qw, gen_vals[..., m_i])
            V[:, 3 * (k + 1) + m_i, :] = rows / mesh.cell_areas[:, None]
    try:
        coef = np.linalg.inv(V)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - geometric guard
        raise ValueError("RT moment matrix singular; degenerate cell?") from exc
    return coef


@dataclass
class DiscreteField:
    """Coefficient vector bound to a space."""

    space: FeSpace
    coefficients: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.coefficients is None:
            self.coefficients = np.zeros(self.space.dofs_total)
        else:
            self.coefficients = np.asarray(self.coefficients, dtype=float)
            if self.coefficients.shape != (self.space.dofs_total,):
                raise ValueError(
                    f"coefficient length {self.coefficients.shape} does not "
                    f"match dofs_total {self.space.dofs_total}"
                )

    def copy(self):
        return DiscreteField(self.space, self.coefficients.copy())


def cell_space(mesh, degree):
    return FeSpace(FeSpace.CELL, mesh, degree)


def facet_space(mesh, degree):
    return FeSpace(FeSpace.FACET, mesh, degree)


def rt_space(mesh, degree):
    return FeSpace(FeSpace.RT, mesh, degree)


# -- spec-level evaluation API ------------------------------------------------


def eval_cell_basis(space: FeSpace, cell: int, points):
    """Shape functions of one cell at reference points.

    points: (nq, 2) inside the reference triangle. Returns (values,
    gradients) for cell P_k and (values, divergences) for RT_k.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if (points < -1e-12).any() or (points.sum(axis=1) > 1.0 + 1e-12).any():
        raise ValueError("points must lie inside the reference triangle")
    v = space.mesh.cell_vertices[cell]
    phys = v[0] + points[:, :1] * (v[1] - v[0]) + points[:, 1:] * (v[2] - v[0])
    if space.kind == FeSpace.CELL:
        vals = space.cell_values(cell, phys[None])[0]
        grads = np.broadcast_to(
            space.cell_gradients(cell), (len(phys), space.ndofs_local, 2)
        )
        return vals, grads
    if space.kind == FeSpace.RT:
        vals, divs = space.rt_values(cell, phys[None])
        return vals[0], divs[0]
    raise ValueError("eval_cell_basis needs a cell or RT space")


def eval_facet_trace(space: FeSpace, side: FacetSide, points):
    """Traces on a facet, taken from the given cell side.

    points: (nq, 2) physical points on the facet. RT spaces return the
    scalar normal trace with the cell's outward normal.
    """
    mesh = space.mesh
    if side.cell < 0 or side.cell >= mesh.num_cells or not 0 <= side.local_index < 3:
        raise ValueError("facet side does not describe a cell facet")
    facet = mesh.cell_facets[side.cell, side.local_index]
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if space.kind == FeSpace.CELL:
        return space.cell_values(side.cell, points[None])[0]
    if space.kind == FeSpace.RT:
        vals, _ = space.rt_values(side.cell, points[None])
        outward = side.sign * mesh.facet_normals[facet]
        return vals[0] @ outward
    # facet space: recover the global parameter of each point
    a = mesh.vertices[mesh.facets[facet, 0]]
    b = mesh.vertices[mesh.facets[facet, 1]]
    d = b - a
    t = (points - a) @ d / (d @ d)
    return space.facet_values(t)


# -- field evaluation helpers -------------------------------------------------


def eval_cell_field(field: DiscreteField, points, cells=None):
    """Evaluate a cell P_k field at physical points (m, nq, 2) -> (m, nq)."""
    space = field.space
    if cells is None:
        cells = np.arange(space.num_entities)
    vals = space.cell_values(cells, points)
    coefs = field.coefficients[space.entity_dofs(cells)]
    return np.einsum("mqd,md->mq", vals, coefs)


def eval_rt_field(field: DiscreteField, points, cells=None, divergence=False):
    """Evaluate an RT field at physical points (m, nq, 2) -> (m, nq, 2)."""
    space = field.space
    if cells is None:
        cells = np.arange(space.num_entities)
    vals, divs = space.rt_values(cells, points)
    coefs = field.coefficients[space.entity_dofs(cells)]
    out = np.einsum("mqdx,md->mqx", vals, coefs)
    if divergence:
        return out, np.einsum("mqd,md->mq", divs, coefs)
    return out


def eval_facet_field(field: DiscreteField, t, facets=None):
    """Evaluate a facet field at parameters t (nq,) -> (nfacets, nq)."""
    space = field.space
    if facets is None:
        facets = np.arange(space.num_entities)
    vals = space.facet_values(t)
    coefs = field.coefficients[space.entity_dofs(facets)]
    return np.einsum("qd,md->mq", vals, coefs)
