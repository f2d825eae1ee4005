"""
Spectrum of T_U = -d^2/dx^2 on [0, 1] for a U(2) boundary condition.

Units: 2m = hbar = 1, interval length 1.  An energy E is an eigenvalue when
the boundary condition, imposed on the two fundamental solutions of
-psi'' = E psi, has a nontrivial solution: the 2x2 secular matrix is singular.

Root search works with the entire functions

    c(x; E) = cos(sqrt(E) x),   s(x; E) = sin(sqrt(E) x) / sqrt(E)

(cosh / sinh for E < 0, 1 and x at E = 0), so one smooth real function of E
covers the evanescent, zero and oscillatory ranges.  det M(E) / sqrt(det U)
is real for real E, which turns the complex determinant into a bracketing
function.  Double roots (periodic-type degeneracies) are extrema of that
function and are located through its analytic E-derivative.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .bc_algebra import (
    SINGULAR_TOL,
    BoundaryCondition,
    FullDirichlet,
    OneSingular,
    Regular,
    classify,
)
from .errors import ConstraintViolation, ConvergenceFailure
from .grid import StateGrid


class ModeKind(str, Enum):
    OSCILLATORY = "oscillatory"
    EVANESCENT = "evanescent"
    ZERO = "zero"


_KIND_ORDER = {ModeKind.EVANESCENT: 0, ModeKind.ZERO: 1, ModeKind.OSCILLATORY: 2}


@dataclass(frozen=True, eq=False)
class BoundaryVector:
    """phi = (psi(0), psi(1)) and phi' = (-psi'(0), psi'(1)); outward derivatives."""

    phi: np.ndarray
    phi_prime: np.ndarray


def bc_residual(u: BoundaryCondition, bv: BoundaryVector) -> float:
    """||i (I + U) phi' - (I - U) phi||_2, zero iff the boundary condition holds."""
    eye = np.eye(2)
    r = 1j * (eye + u.u) @ np.asarray(bv.phi_prime) - (eye - u.u) @ np.asarray(bv.phi)
    return float(np.linalg.norm(r))


# ---------------------------------------------------------------------------
# modes
# ---------------------------------------------------------------------------

# Pairs of fundamental solutions.  "exp" = (e^{-kx}, e^{-k(1-x)}) spans the
# same space as (cosh kx, sinh kx) and stays well conditioned for large k.
_TRIG, _HYP, _POLY, _EXP = "trig", "hyp", "poly", "exp"
# evanescent modes with kappa at least this use the exponential pair
_EXP_KAPPA = 1.0


def _stable_pair(kind: ModeKind, w: float) -> str:
    if kind is ModeKind.OSCILLATORY:
        return _TRIG
    if kind is ModeKind.ZERO:
        return _POLY
    return _EXP if w >= _EXP_KAPPA else _HYP


def _gram(pair: str, w: float) -> np.ndarray:
    """L2(0,1) Gram matrix of a fundamental pair, in closed form."""
    if pair == _POLY:
        return np.array([[1.0, 0.5], [0.5, 1.0 / 3.0]])
    if pair == _TRIG:
        if w < 1e-2:
            i22 = w**2 / 3 - w**4 / 15 + 2 * w**6 / 315
        else:
            i22 = 0.5 - math.sin(2 * w) / (4 * w)
        return np.array([[1.0 - i22, math.sin(w) ** 2 / (2 * w)],
                         [math.sin(w) ** 2 / (2 * w), i22]])
    if pair == _EXP:
        d = -math.expm1(-2 * w) / (2 * w)
        return np.array([[d, math.exp(-w)], [math.exp(-w), d]])
    if w < 1e-2:
        i22 = w**2 / 3 + w**4 / 15 + 2 * w**6 / 315
    else:
        i22 = math.sinh(2 * w) / (4 * w) - 0.5
    return np.array([[1.0 + i22, math.sinh(w) ** 2 / (2 * w)],
                     [math.sinh(w) ** 2 / (2 * w), i22]])


def _derivative_map(pair: str, w: float) -> np.ndarray:
    """Matrix D with (f1', f2') coefficients = D @ (a, b) in the same pair."""
    if pair == _TRIG:
        # (a cos + b sin)' = w (b cos - a sin)
        return w * np.array([[0.0, 1.0], [-1.0, 0.0]])
    if pair == _HYP:
        # (a cosh + b sinh)' = w (b cosh + a sinh)
        return w * np.array([[0.0, 1.0], [1.0, 0.0]])
    if pair == _EXP:
        return w * np.array([[-1.0, 0.0], [0.0, 1.0]])
    return np.array([[0.0, 1.0], [0.0, 0.0]])


def _pair_values(pair: str, w: float, x):
    if pair == _TRIG:
        return np.cos(w * x), np.sin(w * x)
    if pair == _HYP:
        return np.cosh(w * x), np.sinh(w * x)
    if pair == _EXP:
        return np.exp(-w * x), np.exp(-w * (1.0 - x))
    return np.ones_like(x), x


def _exp_to_hyp(w: float) -> np.ndarray:
    """(a, b) in (cosh, sinh) from (p, q) in (e^{-wx}, e^{-w(1-x)})."""
    e = math.exp(-w)
    return np.array([[1.0, e], [-1.0, e]])


@dataclass(frozen=True, eq=False)
class Mode:
    """One normalized eigenfunction (coeff_a f1 + coeff_b f2) / norm of T_U.

    The fundamental pair (f1, f2) is (cos kx, sin kx), (cosh kx, sinh kx) or
    (1, x) according to `kind`; `wavenumber` is k, kappa or 0.  Evanescent
    modes with kappa >= 1 also carry their coefficients on the decaying
    pair (e^{-kappa x}, e^{-kappa (1 - x)}), which is used for evaluation:
    the cosh/sinh form cancels catastrophically for an edge-localized state.
    """

    energy: float
    kind: ModeKind
    wavenumber: float
    coeff_a: complex
    coeff_b: complex
    norm: float
    decay_coeffs: tuple | None = field(default=None, repr=False)

    @property
    def coefficients(self) -> np.ndarray:
        """Coefficients of the unit-norm eigenfunction in the fundamental pair."""
        return np.array([self.coeff_a, self.coeff_b]) / self.norm

    def _stable(self):
        if self.decay_coeffs is not None:
            return _EXP, np.array(self.decay_coeffs) / self.norm
        pair = _HYP if self.kind is ModeKind.EVANESCENT else _stable_pair(self.kind, self.wavenumber)
        return pair, self.coefficients

    def __call__(self, x):
        """Eigenfunction value at x in [0, 1]; accepts scalars or arrays."""
        x = np.asarray(x, dtype=float)
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise ValueError("mode evaluation outside [0, 1]")
        pair, (a, b) = self._stable()
        f1, f2 = _pair_values(pair, self.wavenumber, x)
        out = a * f1 + b * f2
        return complex(out) if out.ndim == 0 else out

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        pair, c = self._stable()
        a, b = _derivative_map(pair, self.wavenumber) @ c
        f1, f2 = _pair_values(pair, self.wavenumber, x)
        out = a * f1 + b * f2
        return complex(out) if out.ndim == 0 else out

    def boundary_vector(self) -> BoundaryVector:
        phi = np.array([self(0.0), self(1.0)])
        phi_prime = np.array([-self.derivative(0.0), self.derivative(1.0)])
        return BoundaryVector(phi, phi_prime)

    def l2_norm(self) -> float:
        pair, c = self._stable()
        return float(np.sqrt(np.vdot(c, _gram(pair, self.wavenumber) @ c).real))

    def derivative_norm_sq(self) -> float:
        """||psi'||^2 in closed form."""
        pair, c = self._stable()
        d = _derivative_map(pair, self.wavenumber) @ c
        return float(np.vdot(d, _gram(pair, self.wavenumber) @ d).real)


def mode_eval(m: Mode, x):
    return m(x)


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    bc: BoundaryCondition
    cutoff_energy: float
    modes: tuple

    def __len__(self):
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __getitem__(self, i):
        return self.modes[i]

    @property
    def energies(self) -> np.ndarray:
        return np.array([m.energy for m in self.modes])

    def sample(self, x: np.ndarray) -> np.ndarray:
        """Matrix of mode values, shape (len(x), n_modes)."""
        return np.column_stack([m(x) for m in self.modes]) if self.modes else np.zeros((len(x), 0))


@dataclass(frozen=True)
class SolverOptions:
    grid_step: float = math.pi / 20
    root_tol: float = 1e-12
    degeneracy_tol: float = 1e-8
    max_iter: int = 200
    singular_tol: float = SINGULAR_TOL
    # uniform evanescent scan up to this kappa, geometric beyond
    uniform_kappa: float = 64.0


# ---------------------------------------------------------------------------
# secular matrix
# ---------------------------------------------------------------------------

def secular_matrix(u: BoundaryCondition, energy: float) -> np.ndarray:
    """Columns i(I+U)phi' - (I-U)phi of the two fundamental solutions.

    Fundamental pair: (cos kx, sin kx) for E > 0, (cosh kx, sinh kx) for
    E < 0 and (1, x) at E = 0.  Singular exactly at eigenvalues.
    """
    eye = np.eye(2)
    p = 1j * (eye + u.u)
    q = eye - u.u
    e = float(energy)
    if e > 0:
        k = math.sqrt(e)
        vals = np.array([[1.0, 0.0], [math.cos(k), math.sin(k)]])
        ders = np.array([[0.0, -k], [-k * math.sin(k), k * math.cos(k)]])
    elif e < 0:
        k = math.sqrt(-e)
        vals = np.array([[1.0, 0.0], [math.cosh(k), math.sinh(k)]])
        ders = np.array([[0.0, -k], [k * math.sinh(k), k * math.cosh(k)]])
    else:
        vals = np.array([[1.0, 0.0], [1.0, 1.0]])
        ders = np.array([[0.0, -1.0], [0.0, 1.0]])
    return p @ ders - q @ vals


_SERIES_N = 10
_FACT = [math.factorial(n) for n in range(2 * _SERIES_N + 3)]
_SMALL_E = 1e-2


def _fundamental_scalar(e: float):
    """(1/rho, c, s, Es, dc, ds, dEs), all but 1/rho divided by rho.

    rho = cosh(sqrt(-E)) for E < 0 and 1 otherwise; the scaling keeps every
    quantity O(1) deep in the evanescent range.
    """
    if abs(e) < _SMALL_E:
        c = sum((-e) ** n / _FACT[2 * n] for n in range(_SERIES_N))
        s = sum((-e) ** n / _FACT[2 * n + 1] for n in range(_SERIES_N))
        ds = sum(n * (-1) ** n * e ** (n - 1) / _FACT[2 * n + 1] for n in range(1, _SERIES_N))
        es = e * s
        if e < 0:
            return 1.0 / c, 1.0, s / c, es / c, -s / (2 * c), ds / c, (c + s) / (2 * c)
        return 1.0, c, s, es, -s / 2, ds, (c + s) / 2
    if e > 0:
        k = math.sqrt(e)
        c = math.cos(k)
        s = math.sin(k) / k
        return 1.0, c, s, k * math.sin(k), -s / 2, (c - s) / (2 * e), (c + s) / 2
    kap = math.sqrt(-e)
    t = math.tanh(kap)
    s = t / kap
    inv_rho = 1.0 / math.cosh(kap) if kap < 700 else 0.0
    return inv_rho, 1.0, s, -kap * t, -s / 2, (1.0 - s) / (2 * e), (1.0 + s) / 2


class _Secular:
    """Real secular function F(E) and the sign-carrying derivative G(E)."""

    def __init__(self, u: BoundaryCondition):
        eye = np.eye(2)
        p = 1j * (eye + u.u)
        q = eye - u.u
        self.p = [[complex(p[i, j]) for j in range(2)] for i in range(2)]
        self.q = [[complex(q[i, j]) for j in range(2)] for i in range(2)]
        self.phase = 1.0 / cmath.sqrt(complex(np.linalg.det(u.u)))
        self.ref_scale = float(np.linalg.norm(p) + np.linalg.norm(q))

    def columns(self, f):
        inv_rho, c, s, es, dc, ds, des = f
        p, q = self.p, self.q
        col0 = (-p[0][1] * es - q[0][0] * inv_rho - q[0][1] * c,
                -p[1][1] * es - q[1][0] * inv_rho - q[1][1] * c)
        col1 = (-p[0][0] * inv_rho + p[0][1] * c - q[0][1] * s,
                -p[1][0] * inv_rho + p[1][1] * c - q[1][1] * s)
        dcol0 = (-p[0][1] * des - q[0][1] * dc, -p[1][1] * des - q[1][1] * dc)
        dcol1 = (p[0][1] * dc - q[0][1] * ds, p[1][1] * dc - q[1][1] * ds)
        return col0, col1, dcol0, dcol1

    def evaluate(self, f):
        """Return (F, G, normalized |det|) for fundamental data f."""
        inv_rho, c, s, es = f[0], f[1], f[2], f[3]
        col0, col1, dcol0, dcol1 = self.columns(f)
        det = col0[0] * col1[1] - col0[1] * col1[0]
        ddet = dcol0[0] * col1[1] + col0[0] * dcol1[1] - dcol0[1] * col1[0] - col0[1] * dcol1[0]
        weight = inv_rho * inv_rho + c * c
        d = (det * self.phase).real
        dd = (ddet * self.phase).real
        fval = d / weight
        gval = dd + d * c * s / weight
        # sigma_min / bound with bound >= ||M||; small at simple and double roots
        bound = self.ref_scale * (inv_rho + abs(c) + abs(s) + abs(es))
        frob = np.sqrt(abs(col0[0]) ** 2 + abs(col0[1]) ** 2 + abs(col1[0]) ** 2 + abs(col1[1]) ** 2)
        return fval, gval, abs(det) / (np.maximum(frob, 1e-300 * bound) * bound)

    def at(self, e: float):
        if e <= -_EXP_KAPPA**2:
            return self.evaluate_exp(math.sqrt(-e))
        return self.evaluate(_fundamental_scalar(e))

    def evaluate_exp(self, w: float):
        """(F, G, normalized |det|) on the pair (e^{-wx}, e^{-w(1-x)}).

        Deep in the evanescent range cosh and sinh/kappa are nearly parallel
        and hide the left-end data at relative size 1/cosh(kappa).  The
        exponential pair keeps both ends at O(1); its determinant is a
        positive multiple of the scan determinant, so signs and roots agree.
        """
        e = math.exp(-w)
        p, q = self.p, self.q
        # boundary data of g1, g2 and their kappa-derivatives
        g = (((1.0, e), (w, -w * e)), ((e, 1.0), (-w * e, w)))
        dg = (((0.0, -e), (1.0, e * (w - 1.0))), ((-e, 0.0), (e * (w - 1.0), 1.0)))

        def column(data):
            (f0, f1), (d0, d1) = data
            return (p[0][0] * d0 + p[0][1] * d1 - q[0][0] * f0 - q[0][1] * f1,
                    p[1][0] * d0 + p[1][1] * d1 - q[1][0] * f0 - q[1][1] * f1)

        c0, c1 = column(g[0]), column(g[1])
        dc0, dc1 = column(dg[0]), column(dg[1])
        det = c0[0] * c1[1] - c0[1] * c1[0]
        ddet = dc0[0] * c1[1] + c0[0] * dc1[1] - dc0[1] * c1[0] - c0[1] * dc1[0]
        fval = (det * self.phase).real
        # dkappa/dE = -1/(2 kappa)
        gval = -(ddet * self.phase).real / (2.0 * w)
        bound = self.ref_scale * (1.0 + w)
        frob = math.sqrt(abs(c0[0]) ** 2 + abs(c0[1]) ** 2 + abs(c1[0]) ** 2 + abs(c1[1]) ** 2)
        return fval, gval, abs(det) / (max(frob, 1e-300 * bound) * bound)

    def matrix(self, e: float) -> np.ndarray:
        col0, col1, _, _ = self.columns(_fundamental_scalar(e))
        return np.array([[col0[0], col1[0]], [col0[1], col1[1]]])


def _energy(s: float) -> float:
    return s * abs(s)


def _kappa_max(cls) -> float:
    if isinstance(cls, Regular):
        return 2.0 * (float(np.linalg.norm(cls.k, 2)) + 1.0)
    if isinstance(cls, OneSingular) and cls.k2 > 0:
        return 2.0 * (cls.k2 + 1.0)
    return 0.0


def _scan_grid(kappa_max: float, k_max: float, opts: SolverOptions) -> np.ndarray:
    h = opts.grid_step
    pos = np.arange(0.0, k_max + h, h)
    if pos[-1] < k_max + h / 2:
        pos = np.append(pos, pos[-1] + h)
    neg = np.arange(h, min(kappa_max, opts.uniform_kappa) + h, h)
    if kappa_max > opts.uniform_kappa:
        n = int(math.ceil(math.log(kappa_max / neg[-1]) / math.log(1.02))) + 1
        neg = np.concatenate([neg, neg[-1] * 1.02 ** np.arange(1, n + 1)])
    return np.concatenate([-neg[::-1], pos])


def _find_roots(sec: _Secular, grid: np.ndarray, opts: SolverOptions) -> list[tuple[float, int]]:
    """Roots in the scan variable s (E = s|s|) with a priority tag for merging."""
    # scalar path everywhere so bracket signs agree bit for bit with brentq
    f, g, dn = (np.array(col) for col in zip(*(sec.at(_energy(float(s))) for s in grid)))
    F = lambda s: sec.at(_energy(s))[0]  # noqa: E731
    G = lambda s: sec.at(_energy(s))[1]  # noqa: E731

    def solve(fun, a, b):
        try:
            return brentq(fun, a, b, xtol=1e-300, maxiter=opts.max_iter)
        except RuntimeError as exc:
            raise ConvergenceFailure(f"root refinement failed on [{a}, {b}]: {exc}") from exc

    found = []
    for i, s in enumerate(grid):
        if dn[i] <= 0.1 * opts.root_tol:
            found.append((float(s), 0))
    for i in range(len(grid) - 1):
        a, b = float(grid[i]), float(grid[i + 1])
        cuts = [a, b]
        if g[i] * g[i + 1] < 0:
            s_ext = solve(G, a, b)
            if sec.at(_energy(s_ext))[2] <= 1e-11:
                found.append((s_ext, 1))
            cuts = [a, s_ext, b]
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            flo, fhi = F(lo), F(hi)
            if flo * fhi < 0:
                found.append((solve(F, lo, hi), 2))

    found.sort()
    merged: list[tuple[float, int]] = []
    for s, tag in found:
        if merged and abs(s - merged[-1][0]) <= 1e-7 * max(1.0, abs(s)):
            if tag < merged[-1][1]:
                merged[-1] = (s, tag)
            continue
        merged.append((s, tag))
    return merged


def _canonical(v: np.ndarray) -> np.ndarray:
    j = int(np.argmax(np.abs(v) + np.array([1e-12, 0.0])))
    return v * (abs(v[j]) / v[j])


def _exp_secular(sec: _Secular, w: float) -> np.ndarray:
    """Secular matrix on the pair (e^{-wx}, e^{-w(1-x)})."""
    e = math.exp(-w)
    p = np.array(sec.p)
    q = np.array(sec.q)
    phi = np.array([[1.0, e], [e, 1.0]])
    dphi = w * np.array([[1.0, -e], [-e, 1.0]])
    return p @ dphi - q @ phi


def _modes_at(sec: _Secular, s: float, opts: SolverOptions) -> list[Mode]:
    e = _energy(s)
    if abs(e) <= 1e-13:
        kind, w, e = ModeKind.ZERO, 0.0, 0.0
    elif e > 0:
        kind, w = ModeKind.OSCILLATORY, math.sqrt(e)
    else:
        kind, w = ModeKind.EVANESCENT, math.sqrt(-e)
    pair = _stable_pair(kind, w)

    if pair == _EXP:
        m = _exp_secular(sec, w)
        to_pair = np.ones(2)
        scale = sec.ref_scale * max(1.0, w)
    else:
        # the scan matrix uses (c, s) = (cos, sin/k), (cosh, sinh/kappa) or (1, x)
        m = sec.matrix(e)
        to_pair = np.array([1.0, 1.0 / w if w > 0 else 1.0])
        scale = sec.ref_scale * max(1.0, abs(s))
    _, sv, vh = np.linalg.svd(m)
    if sv[0] <= opts.degeneracy_tol * scale:
        kernel = [np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex)]
    else:
        resid = sv[-1] / sv[0]
        if resid > math.sqrt(opts.root_tol) * max(1.0, abs(s)):
            raise ConvergenceFailure(f"secular matrix not singular at E={e!r} (residual {resid:.3e})")
        kernel = [vh[-1].conj()]

    gram = _gram(pair, w)
    ortho = []
    for v in (to_pair * k for k in kernel):
        for o in ortho:
            v = v - np.vdot(o, gram @ v) * o
        ortho.append(v / math.sqrt(np.vdot(v, gram @ v).real))
    out = []
    for v in ortho:
        v = _canonical(v / np.linalg.norm(v))
        nrm = math.sqrt(np.vdot(v, gram @ v).real)
        if pair == _EXP:
            a, b = _exp_to_hyp(w) @ v
            out.append(Mode(float(e), kind, w, complex(a), complex(b), nrm, (complex(v[0]), complex(v[1]))))
        else:
            out.append(Mode(float(e), kind, w, complex(v[0]), complex(v[1]), nrm))
    return out


def _sort_key(m: Mode):
    a, b = m.coefficients
    return (m.energy, _KIND_ORDER[m.kind], a.real, a.imag, b.real, b.imag)


def find_spectrum(
    u: BoundaryCondition, e_max: float, opts: SolverOptions | None = None
) -> SpectralBasis:
    """All eigenpairs of T_U with energy <= e_max, ascending.

    Negative energies are searched down to -(2(||K|| + 1))^2 for regular U
    (the analogous scalar bound on the free direction for one singular
    eigenvalue).  Degenerate levels return two L2-orthonormal modes.
    """
    opts = opts or SolverOptions()
    if not e_max > 0:
        raise ValueError(f"e_max must be positive, got {e_max!r}")
    cls = classify(u, opts.singular_tol)
    sec = _Secular(u)
    grid = _scan_grid(_kappa_max(cls), math.sqrt(e_max), opts)
    modes = []
    for s, _ in _find_roots(sec, grid, opts):
        if _energy(s) > e_max * (1 + 1e-12):
            continue
        modes.extend(_modes_at(sec, s, opts))
    modes.sort(key=_sort_key)
    return SpectralBasis(u, float(e_max), tuple(modes))


def find_lowest(u: BoundaryCondition, n_modes: int, opts: SolverOptions | None = None) -> SpectralBasis:
    """At least the lowest `n_modes` eigenpairs, growing the cutoff as needed."""
    e_max = ((n_modes + 3) * math.pi) ** 2
    while True:
        basis = find_spectrum(u, e_max, opts)
        if len(basis) >= n_modes:
            return basis
        e_max *= 1.5


# ---------------------------------------------------------------------------
# quadratic forms
# ---------------------------------------------------------------------------

def gamma_form(u: BoundaryCondition, phi, tol: float = 1e-8) -> float:
    """Boundary form Gamma_U(phi) so that t_U(psi) = ||psi'||^2 - Gamma_U(phi).

    Regular U: <phi|K phi>.  One eigenvalue -1 on xi: phi must satisfy
    <xi|phi> = 0 and Gamma = k2 |<xi_perp|phi>|^2 with
    k2 = -i (1 - u2)/(1 + u2).  U = -I: phi must vanish and Gamma = 0.
    """
    phi = np.asarray(phi, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(phi)))
    cls = classify(u)
    if isinstance(cls, FullDirichlet):
        if np.linalg.norm(phi) > tol * scale:
            raise ConstraintViolation(f"Dirichlet condition needs phi = 0, got |phi| = {np.linalg.norm(phi):.3e}")
        return 0.0
    if isinstance(cls, OneSingular):
        if abs(np.vdot(cls.xi, phi)) > tol * scale:
            raise ConstraintViolation(
                f"boundary values violate <xi|phi> = 0 (|<xi|phi>| = {abs(np.vdot(cls.xi, phi)):.3e})"
            )
        val = -1j * (1 - cls.u2) / (1 + cls.u2) * abs(np.vdot(cls.xi_perp, phi)) ** 2
    else:
        val = np.vdot(phi, cls.k @ phi)
    if abs(val.imag) > 1e-10 * (1 + abs(val.real)):
        raise ValueError(f"boundary form is not real: {val}")
    return float(val.real)


def kinetic_form(u: BoundaryCondition, psi, tol: float = 1e-8) -> float:
    """t_U(psi) = ||psi'||^2 - Gamma_U(phi) for a Mode or a StateGrid."""
    if isinstance(psi, Mode):
        return psi.derivative_norm_sq() - gamma_form(u, psi.boundary_vector().phi, tol)
    if isinstance(psi, StateGrid):
        h = 1.0 / psi.m
        grad = np.sum(np.abs(np.diff(psi.samples)) ** 2) / h
        phi = np.array([psi.samples[0], psi.samples[-1]])
        return float(grad) - gamma_form(u, phi, tol)
    raise TypeError(f"kinetic_form expects a Mode or StateGrid, got {type(psi).__name__}")
