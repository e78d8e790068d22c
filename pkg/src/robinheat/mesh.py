"""Interval meshes and triangulated rectangle meshes with tagged boundary facets.

Meshes are immutable after construction. Vertices are 0-based everywhere,
including the plain-text file format. Boundary "facets" are endpoints in 1D
and edges in 2D; in 1D each endpoint carries boundary measure 1, so boundary
integrals reduce to endpoint sums.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import MeshFormatError

FORMAT_NAME = "robinmesh"
FORMAT_VERSION = 1

# barycentric slack for point location; points this close to a cell boundary
# resolve to the lowest-index containing cell
LOCATE_TOL = 1e-12


@dataclass(eq=False)
class Mesh:
    """Simplicial mesh of dimension 1 (segments) or 2 (triangles).

    Attributes
    ----------
    dim : int
        Spatial dimension, 1 or 2.
    vertices : ndarray, shape (nv, dim)
        Vertex coordinates.
    cells : ndarray, shape (nc, dim+1)
        Vertex indices per cell, positively oriented.
    boundary_facets : ndarray, shape (nf, dim)
        Vertex indices per boundary facet (a point in 1D, an edge in 2D).
    boundary_parents : ndarray, shape (nf,)
        Index of the unique cell owning each facet.
    """

    dim: int
    vertices: np.ndarray
    cells: np.ndarray
    boundary_facets: np.ndarray
    boundary_parents: np.ndarray
    boundary_vertex_flags: np.ndarray = field(init=False)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        if self.vertices.ndim == 1:
            self.vertices = self.vertices[:, None]
        self.cells = np.ascontiguousarray(self.cells, dtype=np.int64)
        self.boundary_facets = np.ascontiguousarray(self.boundary_facets, dtype=np.int64)
        if self.boundary_facets.ndim == 1:
            self.boundary_facets = self.boundary_facets[:, None]
        self.boundary_parents = np.ascontiguousarray(self.boundary_parents, dtype=np.int64)
        flags = np.zeros(len(self.vertices), dtype=bool)
        valid = (self.boundary_facets >= 0) & (self.boundary_facets < len(self.vertices))
        flags[self.boundary_facets[valid]] = True
        self.boundary_vertex_flags = flags
        for arr in (self.vertices, self.cells, self.boundary_facets,
                    self.boundary_parents, self.boundary_vertex_flags):
            arr.setflags(write=False)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    def hash(self) -> str:
        """SHA-256 of the canonical text serialization; stable mesh identity."""
        return hashlib.sha256(mesh_to_text(self).encode()).hexdigest()


def interval_mesh(length: float, cells: int) -> Mesh:
    """Uniform mesh of [0, length] with `cells` segments.

    Vertex i sits at i*length/cells, so the vertex set of a mesh with 2n
    cells contains the vertex set of the mesh with n cells exactly.
    """
    if cells < 2:
        raise ValueError(f"need at least 2 cells, got {cells}")
    if not length > 0:
        raise ValueError(f"length must be positive, got {length}")
    verts = np.arange(cells + 1, dtype=float) * length / cells
    conn = np.column_stack([np.arange(cells), np.arange(1, cells + 1)])
    facets = np.array([[0], [cells]])
    parents = np.array([0, cells - 1])
    return Mesh(1, verts[:, None], conn, facets, parents)


def rectangle_mesh(lx: float, ly: float, nx: int, ny: int) -> Mesh:
    """Structured triangulation of [0,lx] x [0,ly] on an (nx x ny) grid.

    Each grid square is split along its lower-left to upper-right diagonal,
    giving 2*nx*ny positively oriented triangles and 2*(nx+ny) boundary
    edges, oriented counterclockwise around the rectangle.
    """
    if not (lx > 0 and ly > 0):
        raise ValueError(f"side lengths must be positive, got {lx}, {ly}")
    if nx < 1 or ny < 1:
        raise ValueError(f"subdivisions must be >= 1, got nx={nx}, ny={ny}")
    xs = np.arange(nx + 1, dtype=float) * lx / nx
    ys = np.arange(ny + 1, dtype=float) * ly / ny
    xx, yy = np.meshgrid(xs, ys)  # row j = constant y
    verts = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i, j):
        return j * (nx + 1) + i

    cells = []
    for j in range(ny):
        for i in range(nx):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            cells.append((a, b, c))
            cells.append((a, c, d))
    cells = np.array(cells)

    def tri_index(i, j, upper):
        return 2 * (j * nx + i) + (1 if upper else 0)

    facets, parents = [], []
    for i in range(nx):  # bottom, left to right
        facets.append((vid(i, 0), vid(i + 1, 0)))
        parents.append(tri_index(i, 0, upper=False))
    for j in range(ny):  # right, bottom to top
        facets.append((vid(nx, j), vid(nx, j + 1)))
        parents.append(tri_index(nx - 1, j, upper=False))
    for i in range(nx, 0, -1):  # top, right to left
        facets.append((vid(i, ny), vid(i - 1, ny)))
        parents.append(tri_index(i - 1, ny - 1, upper=True))
    for j in range(ny, 0, -1):  # left, top to bottom
        facets.append((vid(0, j), vid(0, j - 1)))
        parents.append(tri_index(0, j - 1, upper=True))
    return Mesh(2, verts, cells, np.array(facets), np.array(parents))


def cell_measures(mesh: Mesh) -> np.ndarray:
    """Signed measure of every cell (length in 1D, area in 2D)."""
    v = mesh.vertices[mesh.cells]
    if mesh.dim == 1:
        return v[:, 1, 0] - v[:, 0, 0]
    e1 = v[:, 1] - v[:, 0]
    e2 = v[:, 2] - v[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def facet_measures(mesh: Mesh) -> np.ndarray:
    """Measure of every boundary facet; endpoints count 1 in 1D."""
    if mesh.dim == 1:
        return np.ones(len(mesh.boundary_facets))
    v = mesh.vertices[mesh.boundary_facets]
    return np.linalg.norm(v[:, 1] - v[:, 0], axis=1)


def measures(mesh: Mesh) -> tuple[float, float]:
    """Total volume and boundary measure of the mesh."""
    return float(cell_measures(mesh).sum()), float(facet_measures(mesh).sum())


def validate(mesh: Mesh) -> list[str]:
    """Check every structural invariant; returns a list of defects (empty = ok)."""
    defects = []
    nv, nc = mesh.num_vertices, mesh.num_cells
    if mesh.dim not in (1, 2):
        return [f"unsupported dimension {mesh.dim}"]
    if mesh.vertices.shape[1] != mesh.dim:
        defects.append(f"vertex coordinate count {mesh.vertices.shape[1]} != dim {mesh.dim}")
        return defects
    if not np.all(np.isfinite(mesh.vertices)):
        defects.append("non-finite vertex coordinate")
    if mesh.cells.shape[1] != mesh.dim + 1:
        defects.append(f"cells must have {mesh.dim + 1} vertices")
        return defects

    if mesh.cells.size and (mesh.cells.min() < 0 or mesh.cells.max() >= nv):
        defects.append("cell vertex index out of range")
        return defects
    for ci, cell in enumerate(mesh.cells):
        if len(set(cell.tolist())) != len(cell):
            defects.append(f"cell {ci}: repeated vertex index")
    meas = cell_measures(mesh)
    for ci in np.nonzero(meas <= 0)[0]:
        defects.append(f"cell {ci}: non-positive measure")
    if meas.sum() <= 0:
        defects.append("total cell measure is not positive")

    if mesh.boundary_facets.size and (mesh.boundary_facets.min() < 0
                                      or mesh.boundary_facets.max() >= nv):
        defects.append("boundary facet vertex index out of range")
        return defects
    if len(mesh.boundary_parents) != len(mesh.boundary_facets):
        defects.append("boundary parent list length mismatch")
        return defects
    if mesh.boundary_parents.size and (mesh.boundary_parents.min() < 0
                                       or mesh.boundary_parents.max() >= nc):
        defects.append("boundary parent cell index out of range")
        return defects

    seen = set()
    for fi, facet in enumerate(mesh.boundary_facets):
        key = tuple(sorted(facet.tolist()))
        if key in seen:
            defects.append(f"facet {fi}: duplicate facet {key}")
        seen.add(key)
        if not set(facet.tolist()) <= set(mesh.cells[mesh.boundary_parents[fi]].tolist()):
            defects.append(f"facet {fi}: not a face of its parent cell")

    # declared boundary must coincide with the topological boundary
    if mesh.dim == 2:
        edge_count: dict[tuple, int] = {}
        for cell in mesh.cells:
            a, b, c = cell.tolist()
            for e in ((a, b), (b, c), (c, a)):
                key = tuple(sorted(e))
                edge_count[key] = edge_count.get(key, 0) + 1
        topo = {e for e, n in edge_count.items() if n == 1}
        bad = {e for e, n in edge_count.items() if n > 2}
        if bad:
            defects.append(f"{len(bad)} edges shared by more than two cells")
        declared = {tuple(sorted(f.tolist())) for f in mesh.boundary_facets}
        for e in declared - set(edge_count):
            defects.append(f"boundary facet {e} is not a cell edge")
        missing = topo - declared
        if missing:
            defects.append(f"{len(missing)} topological boundary edges not declared")
        extra = declared & (set(edge_count) - topo)
        if extra:
            defects.append(f"{len(extra)} declared boundary edges are interior")
        # closure: every boundary vertex on exactly two boundary edges
        touch = np.zeros(nv, dtype=int)
        for facet in mesh.boundary_facets:
            touch[facet] += 1
        for vi in np.nonzero((touch != 0) & (touch != 2))[0]:
            defects.append(f"boundary vertex {vi} touches {touch[vi]} boundary edges")
    else:
        if len(mesh.boundary_facets) != 2:
            defects.append(f"1D mesh must have exactly 2 boundary points, "
                           f"found {len(mesh.boundary_facets)}")
        vertex_use = np.zeros(nv, dtype=int)
        for cell in mesh.cells:
            vertex_use[cell] += 1
        for facet in mesh.boundary_facets:
            if vertex_use[facet[0]] != 1:
                defects.append(f"boundary point {facet[0]} is not an endpoint")
    return defects


def locate_point(mesh: Mesh, point) -> tuple[int, np.ndarray]:
    """Find the lowest-index cell containing `point`; returns (cell, barycentric).

    Points within LOCATE_TOL of a cell boundary resolve to the lowest-index
    containing cell. Raises ValueError for points outside the mesh.
    """
    p = np.atleast_1d(np.asarray(point, dtype=float))
    if p.shape != (mesh.dim,):
        raise ValueError(f"point must have {mesh.dim} coordinates, got {p.shape}")
    if mesh.dim == 1:
        x = p[0]
        for ci, cell in enumerate(mesh.cells):
            x0, x1 = mesh.vertices[cell[0], 0], mesh.vertices[cell[1], 0]
            h = x1 - x0
            lam = (x - x0) / h
            if -LOCATE_TOL <= lam <= 1 + LOCATE_TOL:
                return ci, np.array([1 - lam, lam])
    else:
        for ci, cell in enumerate(mesh.cells):
            a, b, c = mesh.vertices[cell]
            det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
            l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det
            l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det
            l0 = 1.0 - l1 - l2
            if l0 >= -LOCATE_TOL and l1 >= -LOCATE_TOL and l2 >= -LOCATE_TOL:
                return ci, np.array([l0, l1, l2])
    raise ValueError(f"point {p.tolist()} is outside the mesh")


def interpolate(mesh: Mesh, nodal: np.ndarray, point) -> float:
    """Piecewise-linear interpolation of nodal values at a point."""
    ci, bary = locate_point(mesh, point)
    return float(np.dot(bary, np.asarray(nodal)[mesh.cells[ci]]))


# ---------------------------------------------------------------------------
# plain-text serialization
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def mesh_to_text(mesh: Mesh) -> str:
    lines = [f"{FORMAT_NAME} {FORMAT_VERSION}", f"dim {mesh.dim}",
             f"vertices {mesh.num_vertices}"]
    for v in mesh.vertices:
        lines.append(" ".join(_fmt(x) for x in v))
    lines.append(f"cells {mesh.num_cells}")
    for cell in mesh.cells:
        lines.append(" ".join(str(i) for i in cell))
    lines.append(f"boundary {len(mesh.boundary_facets)}")
    for facet, parent in zip(mesh.boundary_facets, mesh.boundary_parents):
        lines.append(" ".join(str(i) for i in facet) + f" {parent}")
    return "\n".join(lines) + "\n"


def write_mesh(mesh: Mesh, path) -> None:
    """Write the mesh in the plain-text format (17 significant digits)."""
    with open(path, "w") as fh:
        fh.write(mesh_to_text(mesh))


class _LineReader:
    """Line iterator that strips comments/blanks and tracks line numbers."""

    def __init__(self, text: str):
        self._lines = text.splitlines()
        self._pos = 0
        self.lineno = 0

    def next(self, what: str) -> list[str]:
        while self._pos < len(self._lines):
            self._pos += 1
            self.lineno = self._pos
            raw = self._lines[self._pos - 1]
            stripped = raw.split("#", 1)[0].strip()
            if stripped:
                return stripped.split()
        raise MeshFormatError(f"unexpected end of file, expected {what}",
                              line=self.lineno + 1)


def mesh_from_text(text: str) -> Mesh:
    rd = _LineReader(text)
    tok = rd.next("header")
    if tok[0] != FORMAT_NAME or len(tok) != 2 or tok[1] != str(FORMAT_VERSION):
        raise MeshFormatError(f"expected header '{FORMAT_NAME} {FORMAT_VERSION}'",
                              line=rd.lineno)
    tok = rd.next("dim")
    if tok[0] != "dim" or len(tok) != 2:
        raise MeshFormatError("expected 'dim <m>'", line=rd.lineno)
    try:
        dim = int(tok[1])
    except ValueError:
        raise MeshFormatError(f"invalid dimension {tok[1]!r}", line=rd.lineno) from None
    if dim not in (1, 2):
        raise MeshFormatError(f"dimension must be 1 or 2, got {dim}", line=rd.lineno)

    def count_of(section: str) -> int:
        tok = rd.next(f"'{section} <count>'")
        if tok[0] != section or len(tok) != 2:
            raise MeshFormatError(f"expected '{section} <count>'", line=rd.lineno)
        try:
            n = int(tok[1])
        except ValueError:
            raise MeshFormatError(f"invalid count {tok[1]!r}", line=rd.lineno) from None
        if n < 0:
            raise MeshFormatError(f"negative count {n}", line=rd.lineno)
        return n

    nv = count_of("vertices")
    verts = np.empty((nv, dim))
    for i in range(nv):
        tok = rd.next("vertex coordinates")
        if len(tok) != dim:
            raise MeshFormatError(f"expected {dim} coordinates, got {len(tok)}",
                                  line=rd.lineno)
        try:
            verts[i] = [float(t) for t in tok]
        except ValueError:
            raise MeshFormatError(f"non-numeric coordinate in {tok}",
                                  line=rd.lineno) from None

    nc = count_of("cells")
    cells = np.empty((nc, dim + 1), dtype=np.int64)
    for i in range(nc):
        tok = rd.next("cell indices")
        if len(tok) != dim + 1:
            raise MeshFormatError(f"expected {dim + 1} vertex indices", line=rd.lineno)
        try:
            cells[i] = [int(t) for t in tok]
        except ValueError:
            raise MeshFormatError(f"non-integer index in {tok}", line=rd.lineno) from None

    nf = count_of("boundary")
    facets = np.empty((nf, dim), dtype=np.int64)
    parents = np.empty(nf, dtype=np.int64)
    for i in range(nf):
        tok = rd.next("boundary facet")
        if len(tok) != dim + 1:
            raise MeshFormatError(f"expected {dim} vertex indices plus parent cell",
                                  line=rd.lineno)
        try:
            facets[i] = [int(t) for t in tok[:dim]]
            parents[i] = int(tok[dim])
        except ValueError:
            raise MeshFormatError(f"non-integer index in {tok}", line=rd.lineno) from None
    return Mesh(dim, verts, cells, facets, parents)


def read_mesh(path) -> Mesh:
    """Read a mesh file; raises MeshFormatError with a line number on bad input."""
    with open(path) as fh:
        return mesh_from_text(fh.read())
