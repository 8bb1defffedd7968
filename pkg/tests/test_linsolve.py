import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from stokes_darcy import linsolve
from stokes_darcy.linsolve import DirichletSolver, SingularMatrixError, factorize, solve


def test_identity():
    rhs = np.arange(5.0)
    assert np.array_equal(solve(factorize(sp.identity(5)), rhs), rhs)


def test_two_by_two():
    x = solve(factorize(sp.csr_matrix([[2.0, 1.0], [1.0, 2.0]])), np.array([3.0, 3.0]))
    assert np.allclose(x, [1, 1], atol=1e-14)


@pytest.mark.parametrize("symmetric", [False, True])
def test_laplacian_1d(symmetric):
    # nodes s = 0, 1/4, ..., 1 with s=0 and s=1 eliminated
    h = 0.25
    n = 5
    K = sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]).tocsr()
    ds = DirichletSolver(K, [0, n - 1], symmetric=symmetric)
    x = ds.solve(np.full(n, h * h), np.zeros(2))
    s = np.linspace(0, 1, n)
    assert np.allclose(x, s * (1 - s) / 2, atol=1e-12)


@pytest.mark.parametrize("symmetric", [False, True])
def test_saddle(symmetric):
    A = sp.csr_matrix([[2.0, 0, 1], [0, 2.0, 1], [1, 1, 0]])
    x = solve(factorize(A, symmetric=symmetric), np.array([3.0, 3.0, 2.0]))
    assert np.allclose(x, [1, 1, 1], atol=1e-14)


def test_zero_rhs_and_determinism():
    rng = np.random.default_rng(0)
    A = sp.random(50, 50, density=0.1, random_state=1) + 10 * sp.identity(50)
    f = factorize(A)
    assert not solve(f, np.zeros(50)).any()
    b = rng.standard_normal(50)
    assert np.array_equal(solve(f, b), solve(f, b))


def test_random_rhs_accuracy():
    n = 200
    A = (sp.random(n, n, density=0.02, random_state=2) + 5 * sp.identity(n)).tocsr()
    f = factorize(A)
    rng = np.random.default_rng(4)
    for _ in range(100):
        x = rng.standard_normal(n)
        assert np.linalg.norm(solve(f, A @ x) - x) <= 1e-10 * np.linalg.norm(x)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 30), st.integers(0, 10**6))
def test_spd_roundtrip(n, seed):
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((n, n))
    A = sp.csr_matrix(R @ R.T + n * np.eye(n))
    x = rng.standard_normal(n)
    assert np.allclose(solve(factorize(A, symmetric=True), A @ x), x, rtol=1e-10, atol=1e-10)


def test_singular_reports_row():
    A = sp.csr_matrix([[1.0, 0, 0], [0, 0, 0], [0, 0, 2.0]])
    with pytest.raises(SingularMatrixError) as exc:
        factorize(A)
    assert exc.value.row == 1
    B = sp.csr_matrix([[1.0, 2.0, 0], [2.0, 4.0, 0], [0, 0, 1.0]])
    with pytest.raises(SingularMatrixError) as exc:
        factorize(B)
    assert exc.value.row in (0, 1)


def test_dimension_mismatch():
    f = factorize(sp.identity(3))
    with pytest.raises(ValueError):
        f.solve(np.ones(4))
    with pytest.raises(ValueError):
        factorize(sp.csr_matrix(np.ones((2, 3))))


def test_factorization_counter():
    before = linsolve.factorization_count
    factorize(sp.identity(2))
    assert linsolve.factorization_count == before + 1
