"""Composition of quantum boundary conditions on [0, 1] and alternating-boundary dynamics."""
from .bc_algebra import (
    BoundaryCondition,
    FullDirichlet,
    OneSingular,
    Regular,
    cayley,
    classify,
    compose,
    dirichlet,
    inverse_cayley,
    make_named,
    mixed,
    neumann,
    pseudo_periodic,
    robin,
    spectral_decomp,
    star,
)
from .errors import (
    ConstraintViolation,
    ConvergenceFailure,
    ResolutionMismatch,
    SingularBoundaryCondition,
    UnsupportedBoundaryCondition,
)
from .grid import StateGrid

__all__ = [
    "BoundaryCondition",
    "ConstraintViolation",
    "ConvergenceFailure",
    "FullDirichlet",
    "OneSingular",
    "Regular",
    "ResolutionMismatch",
    "SingularBoundaryCondition",
    "StateGrid",
    "UnsupportedBoundaryCondition",
    "cayley",
    "classify",
    "compose",
    "dirichlet",
    "inverse_cayley",
    "make_named",
    "mixed",
    "neumann",
    "pseudo_periodic",
    "robin",
    "spectral_decomp",
    "star",
]
