"""
Finite-difference Laplacian with U(2) boundary rows, used as an independent oracle.

The discrete operator comes from the discrete quadratic form

    t_h(psi) = sum_j |psi_{j+1} - psi_j|^2 / h - <phi|K phi>

with trapezoid mass matrix W.  The boundary rows are the half-cell
(ghost-point) closure of i(I+U)phi' = (I-U)phi, which keeps the operator
W-self-adjoint: Crank-Nicolson steps are then exactly unitary in the W norm.
Dirichlet ends are eliminated.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eig_banded
from scipy.sparse.linalg import splu

from .bc_algebra import SINGULAR_TOL, BoundaryCondition, FullDirichlet, OneSingular, classify, scalar_inverse_cayley
from .errors import UnsupportedBoundaryCondition
from .grid import StateGrid, trapezoid_weights


def _endpoint_data(u: BoundaryCondition, tol: float):
    """(free endpoint flags, boundary matrix K restricted to free ends)."""
    cls = classify(u, tol)
    if isinstance(cls, FullDirichlet):
        return (False, False), np.zeros((2, 2), dtype=complex)
    if isinstance(cls, OneSingular):
        if abs(u.u[0, 1]) > tol or abs(u.u[1, 0]) > tol:
            raise UnsupportedBoundaryCondition(
                "the stencil encodes singular conditions only when U is diagonal"
            )
        free = tuple(abs(u.u[i, i] + 1) >= tol for i in range(2))
        k = np.zeros((2, 2), dtype=complex)
        for i in range(2):
            if free[i]:
                k[i, i] = scalar_inverse_cayley(u.u[i, i])
        return free, k
    return (True, True), np.asarray(cls.k)


def fd_laplacian(u: BoundaryCondition, m: int, tol: float = SINGULAR_TOL):
    """Stiffness matrix S, trapezoid weights and index of the free nodes.

    The discrete eigenproblem is S psi = E W psi on the free nodes.
    """
    free, k = _endpoint_data(u, tol)
    h = 1.0 / m
    n = m + 1
    main = np.full(n, 2.0 / h)
    main[0] = main[-1] = 1.0 / h
    off = np.full(n - 1, -1.0 / h)
    s = sp.diags([off, main, off], [-1, 0, 1], format="lil", dtype=complex)
    ends = (0, m)
    for a in range(2):
        for b in range(2):
            if free[a] and free[b]:
                s[ends[a], ends[b]] -= k[a, b]
    keep = np.arange(n)
    if not free[0]:
        keep = keep[keep != 0]
    if not free[1]:
        keep = keep[keep != m]
    s = s.tocsr()[keep][:, keep]
    return s.tocsc(), trapezoid_weights(m)[keep], keep


def cranknicolson_oracle(
    u: BoundaryCondition, tau: float, steps: int, psi0: StateGrid, tol: float = SINGULAR_TOL
) -> StateGrid:
    """Evolve psi0 for time tau with `steps` implicit-midpoint steps.

    Raises UnsupportedBoundaryCondition for non-diagonal singular U.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    s, w, keep = fd_laplacian(u, psi0.m, tol)
    dt = tau / steps
    wm = sp.diags(w.astype(complex), format="csc")
    lhs = splu((wm + 0.5j * dt * s).tocsc())
    rhs = (wm - 0.5j * dt * s).tocsr()
    out = np.zeros_like(psi0.samples)
    x = psi0.samples[keep].copy()
    for _ in range(steps):
        x = lhs.solve(rhs @ x)
    out[keep] = x
    return StateGrid(out, psi0.weights)


def fd_eigenvalues(u: BoundaryCondition, m: int, n_lowest: int, tol: float = SINGULAR_TOL) -> np.ndarray:
    """Lowest `n_lowest` eigenvalues of the discrete problem S psi = E W psi.

    Interleaving the nodes as 0, M, 1, M-1, ... turns the corner coupling
    into a band of half-width 2, so the full problem is solved exactly by a
    banded Hermitian eigensolver.
    """
    s, w, _ = fd_laplacian(u, m, tol)
    d = 1.0 / np.sqrt(w)
    a = sp.diags(d) @ s @ sp.diags(d)
    n = len(w)
    order = np.empty(n, dtype=int)
    order[0::2] = np.arange((n + 1) // 2)
    order[1::2] = n - 1 - np.arange(n // 2)
    b = a.tocsr()[order][:, order].todia()
    band = 2
    ab = np.zeros((band + 1, n), dtype=complex)
    for off in range(band + 1):
        ab[band - off, off:] = b.diagonal(off)
    return eig_banded(ab, eigvals_only=True, select="i", select_range=(0, n_lowest - 1))
