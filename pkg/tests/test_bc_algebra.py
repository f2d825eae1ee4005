import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bc_compose.bc_algebra import (
    BoundaryCondition,
    FullDirichlet,
    OneSingular,
    Regular,
    cayley,
    classify,
    compose,
    dirichlet,
    from_record,
    inverse_cayley,
    make_named,
    mixed,
    neumann,
    pseudo_periodic,
    robin,
    scalar_cayley,
    spectral_decomp,
    star,
    to_record,
    unitarity_defect,
)
from bc_compose.errors import SingularBoundaryCondition

from .conftest import angles, hermitian_matrices, random_regular, unitaries


# named families

def test_named_families():
    a = 0.8
    assert np.array_equal(make_named("dirichlet").u, -np.eye(2))
    assert np.array_equal(make_named("neumann").u, np.eye(2))
    assert np.allclose(make_named("robin", a).u, np.exp(-1j * a) * np.eye(2), atol=1e-15)
    assert np.allclose(make_named("mixed", a).u, np.diag([-1, np.exp(-1j * a)]), atol=1e-15)
    expected = np.array([[0, np.exp(-1j * a)], [np.exp(1j * a), 0]])
    assert np.allclose(make_named("pseudoperiodic", a).u, expected, atol=1e-15)


@given(angles)
def test_named_families_unitary(a):
    for fam in ("robin", "mixed", "pseudoperiodic"):
        assert unitarity_defect(make_named(fam, a).u) <= 1e-15


def test_make_named_rejects_bad_input():
    with pytest.raises(ValueError):
        make_named("robin")
    with pytest.raises(ValueError):
        make_named("robin", float("nan"))
    with pytest.raises(ValueError):
        make_named("torus", 1.0)


def test_non_unitary_rejected():
    with pytest.raises(ValueError):
        BoundaryCondition(np.array([[1.0, 0.1], [0.0, 1.0]]))


# Cayley transform

def test_cayley_examples():
    assert np.allclose(cayley(np.zeros((2, 2))).u, np.eye(2))
    a = 1.1
    assert np.allclose(cayley(math.tan(a / 2) * np.eye(2)).u, np.exp(-1j * a) * np.eye(2), atol=1e-14)
    assert np.allclose(inverse_cayley(neumann()), 0)
    assert np.allclose(inverse_cayley(robin(a)), math.tan(a / 2) * np.eye(2), atol=1e-14)


def test_inverse_cayley_rejects_singular():
    for u in (dirichlet(), mixed(0.3), pseudo_periodic(0.3)):
        with pytest.raises(SingularBoundaryCondition):
            inverse_cayley(u)


def test_cayley_rejects_non_hermitian():
    with pytest.raises(ValueError):
        cayley(np.array([[0, 1], [0, 0]]))


@given(hermitian_matrices(max_entry=1e6))
def test_cayley_round_trip(k):
    u = cayley(k)
    assert unitarity_defect(u.u) <= 1e-12
    back = inverse_cayley(u)
    norm = max(1.0, np.max(np.abs(k)))
    # with both eigenvalues of K large, U sits near -I and K is recovered to eps * ||K|| relative
    rel = max(1e-10, 1e-15 * norm)
    assert np.max(np.abs(back - back.conj().T)) <= rel * norm
    assert np.max(np.abs(back - k)) <= rel * norm
    # storing K rounds its small-eigenvalue direction by eps * ||K||, which maps directly into U
    assert cayley(back).allclose(u, rel)


def test_cayley_round_trip_large_norm():
    # relative accuracy is bounded by eps * ||K|| for large boundary strength
    k = np.array([[1e6, 3e5 - 2e5j], [3e5 + 2e5j, -7e5]])
    back = inverse_cayley(cayley(k))
    assert np.max(np.abs(back - k)) / np.max(np.abs(k)) <= 1e-10


def test_cayley_round_trip_nearly_degenerate():
    # eigenvalues of U differ by ~1e-8 here; the decomposition must not lose the off-diagonal
    k = np.array([[122049.0, 4j], [-4j, 122160.0]])
    back = inverse_cayley(cayley(k))
    assert np.max(np.abs(back - k)) / np.max(np.abs(k)) <= 1e-12


# spectral decomposition and classification

def test_spectral_decomp_pseudo_periodic():
    a = 0.9
    d = spectral_decomp(pseudo_periodic(a))
    assert abs(d.u1 + 1) < 1e-14 and abs(d.u2 - 1) < 1e-14
    xi = np.array([1, -np.exp(1j * a)]) / math.sqrt(2)
    assert abs(abs(np.vdot(d.xi, xi)) - 1) < 1e-14


def test_spectral_decomp_mixed():
    a = 0.4
    d = spectral_decomp(mixed(a))
    assert abs(d.u1 + 1) < 1e-14
    assert abs(d.u2 - np.exp(-1j * a)) < 1e-14
    assert abs(abs(d.xi[0]) - 1) < 1e-14


@given(unitaries())
def test_spectral_decomp_invariants(u):
    d = spectral_decomp(u)
    assert abs(abs(d.u1) - 1) <= 1e-12 and abs(abs(d.u2) - 1) <= 1e-12
    assert abs(np.vdot(d.xi, d.xi_perp)) <= 1e-12
    assert abs(np.linalg.norm(d.xi) - 1) <= 1e-12
    assert np.max(np.abs(d.reconstruct() - u.u)) <= 1e-10
    assert abs(d.u1 + 1) <= abs(d.u2 + 1) + 1e-12


def test_classify_examples():
    c = classify(neumann())
    assert isinstance(c, Regular) and np.allclose(c.k, 0)
    c = classify(pseudo_periodic(0.5))
    assert isinstance(c, OneSingular) and abs(c.u2 - 1) < 1e-14
    assert abs(abs(np.vdot(c.xi, np.array([1, -np.exp(0.5j)]) / math.sqrt(2))) - 1) < 1e-14
    assert isinstance(classify(dirichlet()), FullDirichlet)


# star product

def test_star_examples():
    v = random_regular(np.random.default_rng(3))
    assert star(dirichlet(), v).allclose(dirichlet(), 0.0)
    assert star(v, dirichlet()).allclose(dirichlet(), 0.0)
    a = 1.3
    assert star(neumann(), robin(a)).allclose(robin(2 * math.atan(math.tan(a / 2) / 2)), 1e-14)
    assert star(pseudo_periodic(0.3), pseudo_periodic(1.1)).allclose(dirichlet(), 0.0)


def test_star_singular_with_regular_formula():
    # Dirichlet at 0 composed with Robin(a) keeps the constraint and halves the Robin strength
    a = 0.9
    w = star(mixed(a), neumann())
    expected = np.diag([-1.0, scalar_cayley(math.tan(a / 2) / 2)])
    assert np.allclose(w.u, expected, atol=1e-14)


def test_star_parallel_singular():
    w = star(mixed(0.4), mixed(1.2))
    expected = np.diag([-1.0, scalar_cayley((math.tan(0.2) + math.tan(0.6)) / 2)])
    assert np.allclose(w.u, expected, atol=1e-14)


def test_star_transverse_singular():
    flipped = BoundaryCondition(np.diag([np.exp(-0.3j), -1.0]))
    assert star(mixed(0.4), flipped).allclose(dirichlet(), 0.0)


@settings(max_examples=200)
@given(unitaries(), unitaries())
def test_star_properties(u, v):
    w = star(u, v)
    assert unitarity_defect(w.u) <= 1e-10
    assert w.allclose(star(v, u), 1e-10)
    assert star(u, u).allclose(u, 1e-10)


@given(hermitian_matrices(max_entry=10.0), hermitian_matrices(max_entry=10.0))
def test_star_regular_average(ku, kv):
    w = star(cayley(ku), cayley(kv))
    assert np.max(np.abs(inverse_cayley(w) - (ku + kv) / 2)) <= 1e-10


def test_star_not_associative():
    u, v, w = neumann(), robin(1.0), robin(2.0)
    left = star(star(u, v), w)
    right = star(u, star(v, w))
    assert np.max(np.abs(left.u - right.u)) >= 1e-3


def test_compose_left_fold():
    u, v, w = neumann(), robin(1.0), robin(2.0)
    assert compose(u, v, w).allclose(star(star(u, v), w), 0.0)
    with pytest.raises(ValueError):
        compose(u)


# records

@given(unitaries())
def test_record_round_trip(u):
    assert from_record(to_record(u)).allclose(u, 0.0)


def test_named_record():
    assert from_record({"family": "robin", "alpha": 0.5}).allclose(robin(0.5), 0.0)
    with pytest.raises(ValueError):
        from_record({"alpha": 1.0})
    with pytest.raises(ValueError):
        from_record([1, 2])


@given(st.floats(min_value=-1e-12, max_value=1e-12))
def test_near_threshold_is_deterministic(eps):
    u = BoundaryCondition(np.diag([-np.exp(1j * eps), 1.0]))
    assert isinstance(classify(u), OneSingular)
