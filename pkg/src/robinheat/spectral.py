"""Generalized symmetric eigensolver for (K + alpha*B) phi = lambda M phi.

The dense direct path reduces the pencil with a Cholesky factorization of M,
tridiagonalizes, and runs implicit-shift QL/QR (LAPACK sygv via scipy's
driver='gv'), which stays deterministic and is unaffected by the
indefiniteness of the Robin operator for alpha < 0. Vectors are then
re-orthonormalized in the M inner product by modified Gram-Schmidt and
sign-normalized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .assembly import RobinForm, robin_matrix
from .errors import AssemblyError, MeshFormatError

SOLVER_TOL = 1e-9
ORTHO_TOL = 1e-8
CLUSTER_RTOL = 1e-9

SPEC_FORMAT_NAME = "robinspec"
SPEC_FORMAT_VERSION = 1


@dataclass
class EigenPair:
    value: float
    vector: np.ndarray
    residual: float


@dataclass
class Spectrum:
    """Ascending, M-orthonormal eigenpairs of a Robin form on one mesh.

    `mass` is the mass matrix the pairs are orthonormal against; it is bound
    at solve time and not serialized, so it must be re-attached (by
    reassembling from the mesh) after reading a spectrum from file.
    """

    alpha: float
    pairs: list[EigenPair]
    mesh_hash: str
    k_requested: int
    k_converged: int
    mass: sp.csr_matrix | None = field(default=None, repr=False)

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.pairs])

    @property
    def vectors(self) -> np.ndarray:
        """Column-stacked eigenvectors, shape (n, k)."""
        return np.column_stack([p.vector for p in self.pairs])

    def clusters(self) -> list[tuple[int, int]]:
        """Half-open index ranges of numerically coincident eigenvalues."""
        vals = self.values
        out, start = [], 0
        for i in range(1, len(vals) + 1):
            if i == len(vals) or \
                    vals[i] - vals[i - 1] > CLUSTER_RTOL * max(1.0, abs(vals[i])):
                out.append((start, i))
                start = i
        return out


def _sign_normalize(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for j in range(out.shape[1]):
        v = out[:, j]
        if j == 0 and v.mean() != 0.0:
            if v.mean() < 0.0:
                out[:, j] = -v
        elif v[np.argmax(np.abs(v))] < 0.0:
            out[:, j] = -v
    return out


def _m_orthonormalize(vectors: np.ndarray, m_mat) -> np.ndarray:
    """Modified Gram-Schmidt in the M inner product, in ascending order."""
    out = vectors.astype(float).copy()
    for j in range(out.shape[1]):
        v = out[:, j]
        for i in range(j):
            v -= (out[:, i] @ (m_mat @ v)) * out[:, i]
        nrm = np.sqrt(v @ (m_mat @ v))
        if not nrm > 0:
            raise AssemblyError("eigenvector collapsed during M-orthonormalization")
        out[:, j] = v / nrm
    return out


def solve_spectrum(form: RobinForm, k: int) -> Spectrum:
    """The k lowest eigenpairs of (K + alpha*B, M), M-orthonormal and ascending."""
    n = form.dim
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    a_sparse = robin_matrix(form)
    a = a_sparse.toarray()
    m = form.mass.toarray()
    try:
        vals, vecs = scipy.linalg.eigh(a, m, driver="gv")
    except scipy.linalg.LinAlgError as exc:
        raise AssemblyError(f"mass matrix is not positive definite: {exc}") from exc
    order = np.argsort(vals, kind="stable")[:k]
    vals = vals[order]
    vecs = _m_orthonormalize(vecs[:, order], form.mass)
    vecs = _sign_normalize(vecs)

    a_norm = np.abs(a_sparse).sum(axis=1).max()
    pairs = []
    for j in range(k):
        v = vecs[:, j]
        res = np.linalg.norm(a_sparse @ v - vals[j] * (form.mass @ v))
        res /= a_norm * np.linalg.norm(v)
        pairs.append(EigenPair(float(vals[j]), v, float(res)))
    return Spectrum(form.alpha, pairs, form.mesh_hash, k, k, mass=form.mass)


def solve_eigenvalues(form: RobinForm) -> np.ndarray:
    """All eigenvalues of the pencil, ascending, without eigenvectors."""
    try:
        return scipy.linalg.eigvalsh(robin_matrix(form).toarray(),
                                     form.mass.toarray(), driver="gv")
    except scipy.linalg.LinAlgError as exc:
        raise AssemblyError(f"mass matrix is not positive definite: {exc}") from exc


def eigengap(spectrum: Spectrum) -> float:
    """lambda_2 - lambda_1; positive on connected meshes."""
    if spectrum.k_converged < 2:
        raise ValueError("need at least 2 converged pairs for the gap")
    return float(spectrum.pairs[1].value - spectrum.pairs[0].value)


def project(spectrum: Spectrum, u0: np.ndarray) -> np.ndarray:
    """Coefficients of u0 against the eigenbasis in the M inner product."""
    if spectrum.mass is None:
        raise ValueError("spectrum has no mass matrix bound; reassemble from the mesh")
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (spectrum.mass.shape[0],):
        raise ValueError(f"u0 length {u0.shape} does not match mesh dimension")
    return spectrum.vectors.T @ (spectrum.mass @ u0)


# ---------------------------------------------------------------------------
# plain-text serialization
# ---------------------------------------------------------------------------

def write_spectrum(spectrum: Spectrum, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{SPEC_FORMAT_NAME} {SPEC_FORMAT_VERSION}\n")
        fh.write(f"mesh {spectrum.mesh_hash}\n")
        fh.write(f"alpha {spectrum.alpha:.17g}\n")
        fh.write(f"k {spectrum.k_converged}\n")
        for p in spectrum.pairs:
            coords = " ".join(f"{x:.17g}" for x in p.vector)
            fh.write(f"{p.value:.17g} {coords}\n")


def read_spectrum(path, form: RobinForm | None = None) -> Spectrum:
    """Read a spectrum file; residuals are recomputed when a form is supplied."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    body = [(i + 1, ln.split("#", 1)[0].strip()) for i, ln in enumerate(lines)]
    body = [(no, ln) for no, ln in body if ln]
    if not body or body[0][1].split() != [SPEC_FORMAT_NAME, str(SPEC_FORMAT_VERSION)]:
        raise MeshFormatError(f"expected header '{SPEC_FORMAT_NAME} "
                              f"{SPEC_FORMAT_VERSION}'", line=body[0][0] if body else 1)

    def take(idx, key):
        no, ln = body[idx]
        tok = ln.split()
        if len(tok) != 2 or tok[0] != key:
            raise MeshFormatError(f"expected '{key} <value>'", line=no)
        return no, tok[1]

    _, mesh_hash = take(1, "mesh")
    no, alpha_s = take(2, "alpha")
    try:
        alpha = float(alpha_s)
    except ValueError:
        raise MeshFormatError(f"invalid alpha {alpha_s!r}", line=no) from None
    no, k_s = take(3, "k")
    try:
        k = int(k_s)
    except ValueError:
        raise MeshFormatError(f"invalid k {k_s!r}", line=no) from None
    if len(body) != 4 + k:
        raise MeshFormatError(f"expected {k} eigenpair lines, found {len(body) - 4}",
                              line=body[-1][0])

    a_sparse = robin_matrix(form) if form is not None else None
    a_norm = np.abs(a_sparse).sum(axis=1).max() if a_sparse is not None else None
    pairs = []
    for no, ln in body[4:]:
        try:
            nums = np.array([float(t) for t in ln.split()])
        except ValueError:
            raise MeshFormatError("non-numeric entry in eigenpair line", line=no) from None
        if len(nums) < 2:
            raise MeshFormatError("eigenpair line needs a value and a vector", line=no)
        val, vec = float(nums[0]), nums[1:]
        if form is not None:
            res = float(np.linalg.norm(a_sparse @ vec - val * (form.mass @ vec))
                        / (a_norm * np.linalg.norm(vec)))
        else:
            res = float("nan")
        pairs.append(EigenPair(val, vec, res))
    return Spectrum(alpha, pairs, mesh_hash, k, k,
                    mass=form.mass if form is not None else None)
