"""P1 finite-element matrices: stiffness K, mass M, boundary mass B, and A = K + alpha*B.

All matrices are scipy CSR with both triangles stored explicitly. Element
integrals for affine P1 elements are closed-form, so assembly carries no
quadrature error. Assembled matrices are never mutated in place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import AssemblyError
from .mesh import Mesh, cell_measures, facet_measures


def _to_csr(rows, cols, vals, n) -> sp.csr_matrix:
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    return mat


def stiffness(mesh: Mesh) -> sp.csr_matrix:
    """Stiffness matrix of the Dirichlet energy; PSD with constants in the kernel."""
    n = mesh.num_vertices
    meas = cell_measures(mesh)
    if np.any(meas <= 0):
        raise AssemblyError("degenerate cell with non-positive measure")
    if mesh.dim == 1:
        h = meas
        i0, i1 = mesh.cells[:, 0], mesh.cells[:, 1]
        w = 1.0 / h
        rows = np.concatenate([i0, i1, i0, i1])
        cols = np.concatenate([i0, i1, i1, i0])
        vals = np.concatenate([w, w, -w, -w])
        return _to_csr(rows, cols, vals, n)
    v = mesh.vertices[mesh.cells]  # (nc, 3, 2)
    # gradient of barycentric i is (b_i, c_i) / (2*area), cyclic edge vectors
    b = v[:, [1, 2, 0], 1] - v[:, [2, 0, 1], 1]
    c = v[:, [2, 0, 1], 0] - v[:, [1, 2, 0], 0]
    ke = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) \
        / (4.0 * meas)[:, None, None]
    rows = np.repeat(mesh.cells, 3, axis=1).ravel()
    cols = np.tile(mesh.cells, (1, 3)).ravel()
    return _to_csr(rows, cols, ke.ravel(), n)


def mass(mesh: Mesh) -> sp.csr_matrix:
    """Consistent (not lumped) P1 mass matrix; symmetric positive definite."""
    n = mesh.num_vertices
    meas = cell_measures(mesh)
    if np.any(meas <= 0):
        raise AssemblyError("degenerate cell with non-positive measure")
    nloc = mesh.dim + 1
    # segment: (h/6) [[2,1],[1,2]]; triangle: (area/12) [[2,1,1],...]
    local = (np.ones((nloc, nloc)) + np.eye(nloc))
    scale = meas / (6.0 if mesh.dim == 1 else 12.0)
    me = scale[:, None, None] * local[None]
    rows = np.repeat(mesh.cells, nloc, axis=1).ravel()
    cols = np.tile(mesh.cells, (1, nloc)).ravel()
    return _to_csr(rows, cols, me.ravel(), n)


def boundary_mass(mesh: Mesh) -> sp.csr_matrix:
    """Boundary mass matrix; supported exactly on boundary vertices.

    In 1D this is a unit atom at each endpoint; in 2D the edgewise P1 mass
    (h/6) [[2,1],[1,2]] per boundary edge.
    """
    n = mesh.num_vertices
    if len(mesh.boundary_facets) == 0:
        raise AssemblyError("mesh has no boundary facets")
    if mesh.dim == 1:
        idx = mesh.boundary_facets[:, 0]
        return _to_csr(idx, idx, np.ones(len(idx)), n)
    h = facet_measures(mesh)
    if np.any(h <= 0):
        raise AssemblyError("degenerate boundary edge")
    local = np.ones((2, 2)) + np.eye(2)
    be = (h / 6.0)[:, None, None] * local[None]
    rows = np.repeat(mesh.boundary_facets, 2, axis=1).ravel()
    cols = np.tile(mesh.boundary_facets, (1, 2)).ravel()
    return _to_csr(rows, cols, be.ravel(), n)


@dataclass(frozen=True)
class RobinForm:
    """The quadratic form u -> u'Ku + alpha*u'Bu over the mass inner product u'Mu."""

    stiff: sp.csr_matrix
    mass: sp.csr_matrix
    boundary: sp.csr_matrix
    alpha: float
    mesh_hash: str = ""

    @property
    def dim(self) -> int:
        return self.stiff.shape[0]


def robin_form(mesh: Mesh, alpha: float) -> RobinForm:
    """Assemble K, M, B for a mesh and bundle them with the Robin parameter."""
    return RobinForm(stiffness(mesh), mass(mesh), boundary_mass(mesh),
                     float(alpha), mesh.hash())


def robin_matrix(form: RobinForm) -> sp.csr_matrix:
    """A = K + alpha*B. Symmetric; indefinite for alpha < 0 by design."""
    if not (form.stiff.shape == form.mass.shape == form.boundary.shape):
        raise ValueError("matrix dimensions disagree")
    return (form.stiff + form.alpha * form.boundary).tocsr()


def rayleigh(u: np.ndarray, form: RobinForm) -> float:
    """(u'Ku + alpha*u'Bu) / u'Mu; an upper bound for the first eigenvalue."""
    u = np.asarray(u, dtype=float)
    if u.shape != (form.dim,):
        raise ValueError(f"vector length {u.shape} does not match dim {form.dim}")
    if not np.any(u):
        raise ValueError("Rayleigh quotient of the zero vector")
    num = u @ (form.stiff @ u) + form.alpha * (u @ (form.boundary @ u))
    return float(num / (u @ (form.mass @ u)))


def symmetry_defect(mat: sp.spmatrix) -> float:
    """max |A - A'| / max |A|; zero for exactly symmetric matrices."""
    diff = (mat - mat.T).tocoo()
    top = np.abs(diff.data).max() if diff.nnz else 0.0
    scale = np.abs(mat.tocoo().data).max() if mat.nnz else 1.0
    return float(top / scale) if scale else float(top)


# ---------------------------------------------------------------------------
# triplet debug format
# ---------------------------------------------------------------------------

def write_triplets(mat: sp.spmatrix, path) -> None:
    """Dump a sparse matrix as 'row col value' lines under a 'symsparse' header."""
    coo = mat.tocoo()
    with open(path, "w") as fh:
        fh.write(f"symsparse {coo.shape[0]} {coo.nnz}\n")
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c} {v:.17g}\n")


def read_triplets(path) -> sp.csr_matrix:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != "symsparse":
            raise ValueError("expected 'symsparse <dim> <nnz>' header")
        n, nnz = int(header[1]), int(header[2])
        rows, cols, vals = [], [], []
        for _ in range(nnz):
            r, c, v = fh.readline().split()
            rows.append(int(r))
            cols.append(int(c))
            vals.append(float(v))
    return _to_csr(np.array(rows, dtype=int), np.array(cols, dtype=int),
                   np.array(vals), n)
