"""Exception types raised by the package."""


class SingularBoundaryCondition(ValueError):
    """U has an eigenvalue at -1 and lies outside the range of the Cayley transform."""


class ConstraintViolation(ValueError):
    """Boundary data violates the constraint imposed by a singular U."""


class ConvergenceFailure(RuntimeError):
    """A secular-equation root failed to refine to tolerance."""


class ResolutionMismatch(ValueError):
    """The state grid undersamples the spectral basis."""


class UnsupportedBoundaryCondition(ValueError):
    """The finite-difference stencil cannot encode this boundary condition."""
