"""
Algebra of U(2) boundary conditions for the free particle on [0, 1].

A boundary condition is a 2x2 unitary U acting on the boundary data
phi = (psi(0), psi(1)), phi' = (-psi'(0), psi'(1)) through

    i (I + U) phi' = (I - U) phi.

Regular unitaries (no eigenvalue at -1) are Cayley images of Hermitian
matrices K with phi' = K phi.  The star product averages those Hermitian
preimages and keeps every constraint on phi carried by a -1 eigenvalue.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy.linalg import polar

from .errors import SingularBoundaryCondition

SINGULAR_TOL = 1e-9
PARALLEL_TOL = 1e-9
UNITARY_TOL = 1e-12

_I2 = np.eye(2, dtype=complex)
_SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
_SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)

FAMILIES = ("dirichlet", "neumann", "robin", "mixed", "pseudoperiodic")


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def unitarity_defect(u: np.ndarray) -> float:
    """Max-norm of U^dagger U - I."""
    return float(np.max(np.abs(u.conj().T @ u - _I2)))


@dataclass(frozen=True, eq=False)
class BoundaryCondition:
    """A 2x2 unitary boundary-condition matrix.

    Construction checks unitarity to `UNITARY_TOL`.  The stored array is
    read-only so instances can be shared freely.
    """

    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        if u.shape != (2, 2):
            raise ValueError(f"boundary condition must be 2x2, got shape {u.shape}")
        if not np.all(np.isfinite(u)):
            raise ValueError("boundary condition has non-finite entries")
        defect = unitarity_defect(u)
        if defect > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (defect {defect:.3e})")
        object.__setattr__(self, "u", _frozen(u))

    def __repr__(self):
        rows = ", ".join("[" + ", ".join(f"{z:.6g}" for z in row) + "]" for row in self.u)
        return f"BoundaryCondition([{rows}])"

    def allclose(self, other: "BoundaryCondition", atol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.u - other.u)) <= atol)

    def is_full_dirichlet(self, tol: float = SINGULAR_TOL) -> bool:
        return isinstance(classify(self, tol), FullDirichlet)


# ---------------------------------------------------------------------------
# named families
# ---------------------------------------------------------------------------

def dirichlet() -> BoundaryCondition:
    return BoundaryCondition(-_I2)


def neumann() -> BoundaryCondition:
    return BoundaryCondition(_I2)


def robin(alpha: float) -> BoundaryCondition:
    """psi'(0) = -tan(alpha/2) psi(0), psi'(1) = tan(alpha/2) psi(1)."""
    _check_angle(alpha)
    return BoundaryCondition(np.exp(-1j * alpha) * _I2)


def mixed(alpha: float) -> BoundaryCondition:
    """Dirichlet at x = 0, Robin with angle alpha at x = 1."""
    _check_angle(alpha)
    return BoundaryCondition(np.diag([-1.0, np.exp(-1j * alpha)]))


def pseudo_periodic(alpha: float) -> BoundaryCondition:
    """psi(1) = e^{i alpha} psi(0), psi'(1) = e^{i alpha} psi'(0)."""
    _check_angle(alpha)
    return BoundaryCondition(math.cos(alpha) * _SIGMA_X + math.sin(alpha) * _SIGMA_Y)


def make_named(family: str, alpha: float | None = None) -> BoundaryCondition:
    """Build a boundary condition from a family name and optional angle."""
    family = family.lower().replace("-", "").replace("_", "")
    if family == "dirichlet":
        return dirichlet()
    if family == "neumann":
        return neumann()
    makers = {"robin": robin, "mixed": mixed, "pseudoperiodic": pseudo_periodic}
    if family not in makers:
        raise ValueError(f"unknown boundary-condition family {family!r}")
    if alpha is None:
        raise ValueError(f"family {family!r} needs an angle alpha")
    return makers[family](float(alpha))


def _check_angle(alpha):
    if not math.isfinite(alpha):
        raise ValueError(f"alpha must be finite, got {alpha!r}")


# ---------------------------------------------------------------------------
# Cayley transform
# ---------------------------------------------------------------------------

def scalar_cayley(k: float) -> complex:
    return (1 - 1j * k) / (1 + 1j * k)


def scalar_inverse_cayley(lam: complex) -> float:
    """Real k with scalar_cayley(k) == lam, for unimodular lam != -1."""
    return float((-1j * (1 - lam) / (1 + lam)).real)


def cayley(k: np.ndarray) -> BoundaryCondition:
    """(I - iK)(I + iK)^{-1} for Hermitian K.

    Evaluated through the eigendecomposition of K, which keeps the result
    unitary to round-off however large K is.
    """
    k = np.asarray(k, dtype=complex)
    if k.shape != (2, 2):
        raise ValueError(f"K must be 2x2, got shape {k.shape}")
    if not np.all(np.isfinite(k)):
        raise np.linalg.LinAlgError("I + iK is not invertible: K has non-finite entries")
    herm_defect = np.max(np.abs(k - k.conj().T))
    if herm_defect > 1e-12 * max(1.0, np.max(np.abs(k))):
        raise ValueError(f"K is not Hermitian (defect {herm_defect:.3e})")
    kval, q = np.linalg.eigh((k + k.conj().T) / 2)
    lam = (1 - 1j * kval) / (1 + 1j * kval)
    return BoundaryCondition((q * lam) @ q.conj().T)


def inverse_cayley(u: BoundaryCondition, tol: float = SINGULAR_TOL) -> np.ndarray:
    """Hermitian K = -i (I - U)(I + U)^{-1}.

    Raises SingularBoundaryCondition when an eigenvalue of U lies within
    `tol` of -1.
    """
    d = spectral_decomp(u, tol)
    if abs(d.u1 + 1) < tol:
        raise SingularBoundaryCondition(
            f"U has eigenvalue {d.u1:.6g} within {tol:g} of -1; it is outside the Cayley range"
        )
    return _k_from_decomp(d)


def _k_from_decomp(d) -> np.ndarray:
    q = np.column_stack([d.xi, d.xi_perp])
    kval = np.array([scalar_inverse_cayley(d.u1), scalar_inverse_cayley(d.u2)])
    k = (q * kval) @ q.conj().T
    return (k + k.conj().T) / 2


# ---------------------------------------------------------------------------
# spectral decomposition and classification
# ---------------------------------------------------------------------------

class SpectralDecomp2(NamedTuple):
    u1: complex
    u2: complex
    xi: np.ndarray
    xi_perp: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.u1 * np.outer(self.xi, self.xi.conj()) + self.u2 * np.outer(
            self.xi_perp, self.xi_perp.conj()
        )


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    j = 0 if abs(v[0]) > 1e-8 else 1
    return v * (abs(v[j]) / v[j])


def _perp(xi: np.ndarray) -> np.ndarray:
    return np.array([-np.conj(xi[1]), np.conj(xi[0])])


def spectral_decomp(u: BoundaryCondition, tol: float = SINGULAR_TOL) -> SpectralDecomp2:
    """Eigen-decomposition u1 |xi><xi| + u2 |xi_perp><xi_perp|.

    The eigenvalue closer to -1 comes first, so a singular eigenvalue is
    always u1.  Eigenvectors come from eigh of the Hermitian matrix
    (conj(mu) U + mu U^dagger)/2, with mu aligned to the eigenvalue difference
    so its eigenvalues are maximally separated; they are orthonormal even for
    (near-)degenerate U.
    """
    a = np.asarray(u.u)
    # eigenvalue difference from the traceless part; tr^2 - 4 det cancels
    # catastrophically for nearly degenerate U
    half = (a[0, 0] - a[1, 1]) / 2
    delta = 2 * np.sqrt(complex(half * half + a[0, 1] * a[1, 0]))
    mu = delta / abs(delta) if abs(delta) > 0 else 1.0
    h = (np.conj(mu) * a + mu * a.conj().T) / 2
    _, z = np.linalg.eigh(h)
    lam = np.einsum("ji,jk,ki->i", z.conj(), a, z)
    order = np.argsort(np.abs(lam + 1), kind="stable")
    lam = lam[order]
    # unimodular by construction; strip round-off in the modulus
    lam = lam / np.abs(lam)
    xi = _canonical_phase(z[:, order[0]])
    return SpectralDecomp2(complex(lam[0]), complex(lam[1]), xi, _perp(xi))


@dataclass(frozen=True, eq=False)
class Regular:
    """No eigenvalue at -1: free ends, phi' = k phi."""

    k: np.ndarray


@dataclass(frozen=True, eq=False)
class OneSingular:
    """One constraint <xi|phi> = 0; eigenvalue u2 != -1 on xi_perp."""

    xi: np.ndarray
    u2: complex

    @property
    def xi_perp(self) -> np.ndarray:
        return _perp(self.xi)

    @property
    def k2(self) -> float:
        """Boundary strength on xi_perp: <xi_perp|phi'> = k2 <xi_perp|phi>."""
        return scalar_inverse_cayley(self.u2)


@dataclass(frozen=True, eq=False)
class FullDirichlet:
    """U = -I, phi = 0."""


BCClass = Union[Regular, OneSingular, FullDirichlet]


def classify(u: BoundaryCondition, tol: float = SINGULAR_TOL) -> BCClass:
    """Branch of U with its data; cached per instance and tolerance."""
    # instances are immutable, so the result can be shared
    cache = u.__dict__.setdefault("_classified", {})
    if tol not in cache:
        d = spectral_decomp(u, tol)
        n_singular = sum(abs(lam + 1) < tol for lam in (d.u1, d.u2))
        if n_singular == 2:
            cls = FullDirichlet()
        elif n_singular == 1:
            cls = OneSingular(_frozen(d.xi), d.u2)
        else:
            cls = Regular(_frozen(_k_from_decomp(d)))
        cache[tol] = cls
    return cache[tol]


def class_name(c: BCClass) -> str:
    return type(c).__name__


# ---------------------------------------------------------------------------
# the star product
# ---------------------------------------------------------------------------

def _reunitarize(w: np.ndarray) -> np.ndarray:
    if unitarity_defect(w) > UNITARY_TOL:
        w = polar(w)[0]
    return w


def _one_singular_result(xi: np.ndarray, m: float) -> BoundaryCondition:
    xp = _perp(xi)
    w2 = scalar_cayley(m)
    return BoundaryCondition(-np.outer(xi, xi.conj()) + w2 * np.outer(xp, xp.conj()))


def star(
    u: BoundaryCondition,
    v: BoundaryCondition,
    tol: float = SINGULAR_TOL,
    tol_par: float = PARALLEL_TOL,
) -> BoundaryCondition:
    """Composition U * V of two boundary conditions.

    Regular parts combine by averaging Cayley preimages; each -1 eigenvector
    is a constraint on phi that survives in the result, and two independent
    constraints leave only phi = 0.
    """
    cu, cv = classify(u, tol), classify(v, tol)

    if isinstance(cu, FullDirichlet) or isinstance(cv, FullDirichlet):
        return dirichlet()

    if isinstance(cu, Regular) and isinstance(cv, Regular):
        w = cayley((cu.k + cv.k) / 2).u
        return BoundaryCondition(_reunitarize(w))

    if isinstance(cu, Regular):
        cu, cv = cv, cu
    if isinstance(cv, Regular):
        xp = cu.xi_perp
        m = (cu.k2 + float(np.vdot(xp, cv.k @ xp).real)) / 2
        return _one_singular_result(cu.xi, m)

    overlap = np.vdot(cu.xi, cv.xi)
    if abs(overlap) <= 1 - tol_par:
        return dirichlet()
    # symmetric choice of the shared constraint direction
    aligned = cv.xi * (np.conj(overlap) / abs(overlap))
    xi = (cu.xi + aligned) / np.linalg.norm(cu.xi + aligned)
    return _one_singular_result(_canonical_phase(xi), (cu.k2 + cv.k2) / 2)


def compose(*bcs: BoundaryCondition, tol: float = SINGULAR_TOL) -> BoundaryCondition:
    """Left fold ((b1 * b2) * b3) * ...; the star product is not associative."""
    if len(bcs) < 2:
        raise ValueError("compose needs at least two boundary conditions")
    acc = bcs[0]
    for b in bcs[1:]:
        acc = star(acc, b, tol)
    return acc


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

def to_record(bc: BoundaryCondition) -> dict:
    return {
        "re": [[float(z.real) + 0.0 for z in row] for row in bc.u],
        "im": [[float(z.imag) + 0.0 for z in row] for row in bc.u],
    }


def from_record(rec: dict) -> BoundaryCondition:
    """Accept {"re": [[..]], "im": [[..]]} or {"family": ..., "alpha": ...}."""
    if not isinstance(rec, dict):
        raise ValueError(f"boundary-condition record must be an object, got {type(rec).__name__}")
    if "family" in rec:
        return make_named(str(rec["family"]), rec.get("alpha"))
    if "re" in rec:
        re = np.asarray(rec["re"], dtype=float)
        im = np.asarray(rec.get("im", np.zeros((2, 2))), dtype=float)
        return BoundaryCondition(re + 1j * im)
    raise ValueError("record needs either 'family' or 're'/'im' keys")
