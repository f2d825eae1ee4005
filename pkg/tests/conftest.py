import numpy as np
import pytest
from hypothesis import strategies as st

from bc_compose.bc_algebra import BoundaryCondition, cayley

angles = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


def random_hermitian(rng, scale=1.0):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return scale * (a + a.conj().T) / 2


def random_unit_vector(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def random_regular(rng, scale=1.0):
    return cayley(random_hermitian(rng, scale))


def random_one_singular(rng, xi=None):
    xi = random_unit_vector(rng) if xi is None else xi
    xp = np.array([-np.conj(xi[1]), np.conj(xi[0])])
    u2 = np.exp(1j * rng.uniform(-3.0, 3.0))
    return BoundaryCondition(-np.outer(xi, xi.conj()) + u2 * np.outer(xp, xp.conj()))


def random_pair(rng, branch):
    """A pair (u, v) landing in the named star-product branch."""
    if branch == "regular":
        return random_regular(rng), random_regular(rng)
    if branch == "singular_regular":
        pair = [random_one_singular(rng), random_regular(rng)]
        return tuple(pair[:: rng.choice([1, -1])])
    if branch == "parallel":
        xi = random_unit_vector(rng)
        return random_one_singular(rng, xi), random_one_singular(rng, xi * np.exp(1j * rng.uniform(0, 6)))
    if branch == "transverse":
        return random_one_singular(rng), random_one_singular(rng)
    if branch == "dirichlet":
        pair = [BoundaryCondition(-np.eye(2)), random_regular(rng)]
        return tuple(pair[:: rng.choice([1, -1])])
    raise ValueError(branch)


BRANCHES = ("regular", "singular_regular", "parallel", "transverse", "dirichlet")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@st.composite
def hermitian_matrices(draw, max_entry=50.0):
    x = st.floats(min_value=-max_entry, max_value=max_entry, allow_nan=False)
    d0, d1, re, im = draw(x), draw(x), draw(x), draw(x)
    return np.array([[d0, re + 1j * im], [re - 1j * im, d1]])


@st.composite
def unitaries(draw):
    """Arbitrary U(2) element, including exact singular families."""
    kind = draw(st.sampled_from(["regular", "one_singular", "dirichlet"]))
    if kind == "dirichlet":
        return BoundaryCondition(-np.eye(2))
    if kind == "regular":
        return cayley(draw(hermitian_matrices(max_entry=10.0)))
    theta = draw(st.floats(min_value=0.0, max_value=np.pi))
    phase = draw(angles)
    u2 = draw(angles)
    xi = np.array([np.cos(theta / 2), np.sin(theta / 2) * np.exp(1j * phase)])
    xp = np.array([-np.conj(xi[1]), np.conj(xi[0])])
    return BoundaryCondition(-np.outer(xi, xi.conj()) + np.exp(1j * u2) * np.outer(xp, xp.conj()))
