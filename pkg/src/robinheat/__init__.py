"""Robin heat kernels on interval and triangulated rectangle meshes.

P1 finite elements build the stiffness/mass/boundary-mass matrices of the
Robin quadratic form for any real boundary parameter; a dense generalized
eigensolver produces M-orthonormal spectra; truncated spectral sums give the
heat kernel and propagator. Exact transcendental interval spectra act as
ground truth, and the verify module turns the qualitative theory
(positivity, monotonicity, eigenvalue growth, trace inequalities) into
quantitative checks.
"""

from .assembly import (RobinForm, boundary_mass, mass, rayleigh, robin_form,
                       robin_matrix, stiffness)
from .errors import AssemblyError, MeshFormatError
from .kernel import Field, SpectralKernel, TruncationResult
from .mesh import (Mesh, interval_mesh, measures, read_mesh, rectangle_mesh,
                   validate, write_mesh)
from .oracle import (ExactMode, interval_kernel, interval_spectrum,
                     rectangle_spectrum)
from .spectral import (EigenPair, Spectrum, eigengap, project, read_spectrum,
                       solve_eigenvalues, solve_spectrum, write_spectrum)

__version__ = "0.1.0"

__all__ = [
    "AssemblyError", "EigenPair", "ExactMode", "Field", "Mesh",
    "MeshFormatError", "RobinForm", "SpectralKernel", "Spectrum",
    "TruncationResult", "boundary_mass", "eigengap", "interval_kernel",
    "interval_mesh", "interval_spectrum", "mass", "measures", "project",
    "rayleigh", "read_mesh", "read_spectrum", "rectangle_mesh",
    "rectangle_spectrum", "robin_form", "robin_matrix", "solve_eigenvalues",
    "solve_spectrum", "stiffness", "validate", "write_mesh", "write_spectrum",
]
