import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import lagrangian
from slmorse.errors import DimensionMismatch, NotIsotropic, RankDeficient
from slmorse.symplectic import (
    QuadraticForm,
    SymplecticConvention,
    dirichlet_plane,
    frame_from_columns,
    gap_distance,
    inertia,
    intersection_dim,
    isotropy_residual,
    lagrangian_projection,
    omega,
    orthonormalize,
    standard_J,
)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_structure_matrix(n):
    J = standard_J(n)
    assert np.allclose(J @ J, -np.eye(2 * n))
    assert np.allclose(J.T, -J)
    SymplecticConvention(n)
    assert np.linalg.matrix_rank(J) == 2 * n


def test_omega_antisymmetric():
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal((2, 4))
    assert omega(a, b) == pytest.approx(-omega(b, a))
    assert omega(a, a) == pytest.approx(0.0, abs=1e-14)


def test_frame_from_columns_examples():
    frame_from_columns(np.array([[1.0], [0.0]]))
    e = np.eye(4)
    frame_from_columns(e[:, [0, 1]])
    with pytest.raises(NotIsotropic):
        frame_from_columns(e[:, [0, 2]])
    with pytest.raises(RankDeficient):
        frame_from_columns(np.array([[1.0, 2.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(DimensionMismatch):
        frame_from_columns(np.ones((3, 1)))


def test_orthonormalize_scaling():
    F = orthonormalize(np.array([[2.0], [0.0]]))
    assert np.allclose(F.columns, [[1.0], [0.0]])


@given(st.integers(0, 10**6), st.integers(1, 3))
def test_orthonormalize_span_and_idempotence(seed, n):
    Z = lagrangian(seed, n) @ np.random.default_rng(seed + 1).standard_normal((n, n))
    F = orthonormalize(Z)
    assert np.allclose(F.columns.T @ F.columns, np.eye(n), atol=1e-12)
    assert gap_distance(Z, F) < 1e-10
    assert np.allclose(orthonormalize(F).columns, F.columns, atol=1e-12)


def test_intersection_examples():
    e = np.eye(4)
    A = e[:, [0, 1]]
    assert intersection_dim(A, A) == 2
    assert intersection_dim([[1.0], [0.0]], [[0.0], [1.0]]) == 0
    B = np.column_stack([e[:, 1], e[:, 2] + e[:, 0]])
    assert intersection_dim(A, B) == 1


def test_gap_distance_examples():
    assert gap_distance([[1.0], [0.0]], [[1.0], [0.0]]) == pytest.approx(0.0, abs=1e-15)
    assert gap_distance([[1.0], [0.0]], [[0.0], [1.0]]) == pytest.approx(1.0)
    th = np.pi / 6
    assert gap_distance([[1.0], [0.0]], [[np.cos(th)], [np.sin(th)]]) == pytest.approx(0.5)


def test_inertia_examples():
    assert tuple(inertia(np.diag([1.0, -1.0, 0.0]))) == (1, 1, 1)
    assert tuple(inertia([[0.0, 1.0], [1.0, 0.0]])) == (1, 0, 1)


@given(st.integers(0, 10**6), st.integers(1, 5))
def test_inertia_sylvester(seed, k):
    rng = np.random.default_rng(seed)
    d = rng.choice([-1.0, 0.0, 1.0], k) * rng.uniform(0.5, 2.0, k)
    S = np.diag(d)
    G = rng.standard_normal((k, k)) + 3 * np.eye(k)
    assert inertia(S, atol=1e-9) == inertia(G.T @ S @ G, atol=1e-9)


def test_quadratic_form_rejects_asymmetric():
    with pytest.raises(ValueError):
        QuadraticForm(np.eye(2), np.array([[1.0, 2.0], [0.0, 1.0]]))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_dirichlet_plane(n):
    D = dirichlet_plane(n)
    assert np.allclose(D.columns[:n], np.eye(n)) and np.allclose(D.columns[n:], 0.0)
    assert intersection_dim(D, D) == n
    assert isotropy_residual(D) == 0.0


@given(st.integers(0, 10**6), st.integers(1, 3))
def test_lagrangian_projection_repairs_perturbation(seed, n):
    Z = lagrangian(seed, n)
    noisy = Z + 1e-4 * np.random.default_rng(seed).standard_normal(Z.shape)
    P = lagrangian_projection(noisy)
    assert isotropy_residual(P) < 1e-12
    assert gap_distance(P, Z) < 1e-3
