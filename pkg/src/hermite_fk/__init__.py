"""Robin eigenvalues of the Hermite operator and a numerical Gaussian Faber-Krahn check."""

from .errors import (
    ConfigurationError,
    DomainError,
    MeshError,
    SolverError,
    StageError,
    TruncationError,
)
from .gauss_geometry import (
    CorpusEntry,
    Domain2D,
    HalfSpace,
    isoperimetric_g,
    load_corpus,
    measure_2d,
    measure_halfspace,
    perimeter_2d,
    symmetrize,
)
from .solver_1d import HalfLineProblem, dirichlet_lambda1, lambda1_sweep, solve_lambda1
from .solver_2d import lambda1_2d, lambda1_2d_extrapolated, mesh_domain

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "CorpusEntry",
    "Domain2D",
    "DomainError",
    "HalfLineProblem",
    "HalfSpace",
    "MeshError",
    "SolverError",
    "StageError",
    "TruncationError",
    "dirichlet_lambda1",
    "isoperimetric_g",
    "lambda1_2d",
    "lambda1_2d_extrapolated",
    "lambda1_sweep",
    "load_corpus",
    "measure_2d",
    "measure_halfspace",
    "mesh_domain",
    "perimeter_2d",
    "solve_lambda1",
    "symmetrize",
]
