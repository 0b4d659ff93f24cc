import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bohrcheck.errors import DomainError, NoConvergence, NonSquare, NotHermitian, ShapeMismatch
from bohrcheck.matkernel import (DEFAULT_TOL, AbsPower, Polynomial, Power, Tolerance, abs_op,
                                 arith, func_calculus, herm_eig, jacobi_eigh, ky_fan,
                                 scalar_function_from_dict, singular_values, spectral_bounds)

from conftest import rand_complex, rand_hermitian, rand_psd


def test_tolerance_bound_and_env():
    tol = Tolerance(1e-10, 1e-8)
    assert tol.bound(100.0) == pytest.approx(1e-10 + 1e-6)
    env = Tolerance.from_env({"BOHR_TOL_ATOL": "1e-6", "BOHR_TOL_RTOL": "1e-4"})
    assert env.atol == 1e-6 and env.rtol == 1e-4
    with pytest.raises(ValueError):
        Tolerance(0.0, 1e-8)


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_eig_small_examples(method):
    e = herm_eig(np.array([[0, 1], [1, 0]]), method=method)
    assert np.allclose(e.eigenvalues, [1, -1])
    e = herm_eig(np.diag([4.0, 9.0]), method=method)
    assert np.allclose(e.eigenvalues, [9, 4])
    assert np.allclose(np.abs(e.vectors), [[0, 1], [1, 0]])


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_eig_reconstruction_6x6(rng, method):
    H = rand_hermitian(rng, 6)
    e = herm_eig(H, method=method)
    scale = np.linalg.norm(H, 2)
    assert np.all(np.diff(e.eigenvalues) <= 0)
    assert np.linalg.norm(e.reconstruct() - H, 2) <= 1e-12 * scale
    U = e.vectors
    assert np.abs(U.conj().T @ U - np.eye(6)).max() <= DEFAULT_TOL.bound(scale)


def test_jacobi_agrees_with_lapack_up_to_dim_32(rng):
    for n in (1, 2, 5, 12, 32):
        H = rand_hermitian(rng, n)
        w, U = jacobi_eigh(H)
        assert np.allclose(np.sort(w), np.linalg.eigvalsh(H), atol=1e-11 * max(1, n))
        assert np.abs((U * w) @ U.conj().T - H).max() <= 1e-11 * np.linalg.norm(H, 2)


def test_jacobi_sweep_cap():
    H = rand_hermitian(np.random.default_rng(1), 8)
    with pytest.raises(NoConvergence):
        jacobi_eigh(H, max_sweeps=1)


def test_eig_errors():
    with pytest.raises(NonSquare):
        herm_eig(np.ones((2, 3)))
    with pytest.raises(NotHermitian):
        herm_eig(np.array([[0, 1], [0, 0]]))
    # tiny asymmetry is symmetrized, not rejected
    herm_eig(np.array([[1, 1e-14], [0, 1]]))


def test_eig_stable_tie_order():
    e = herm_eig(np.eye(3))
    assert np.allclose(e.vectors, np.eye(3))


def test_func_calculus_examples():
    assert np.allclose(func_calculus(np.diag([1.0, 2.0]), Power(2)), np.diag([1, 4]))
    assert np.allclose(func_calculus(np.diag([4.0, 9.0]), Power(0.5)), np.diag([2, 3]))
    H = np.array([[2.0, 1.0], [1.0, 2.0]])
    assert np.allclose(func_calculus(H, Power(2)), H @ H)
    assert np.allclose(func_calculus(H, Power(2)), [[5, 4], [4, 5]])


def test_func_calculus_domain():
    with pytest.raises(DomainError):
        func_calculus(np.diag([1.0, 0.0]), Power(-1))
    with pytest.raises(DomainError):
        func_calculus(np.diag([1.0, -0.5]), Power(0.5))
    # rounding-level negatives are clamped
    R = func_calculus(np.diag([1.0, -1e-14]), Power(0.5))
    assert np.allclose(R, np.diag([1.0, 0.0]))
    assert np.allclose(func_calculus(np.diag([-2.0, 3.0]), AbsPower(2)), np.diag([4, 9]))


def _horner(coeffs, M):
    # independent oracle: explicit matrix polynomial via arith
    n = M.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for c in reversed(coeffs):
        out = arith(arith(out, M, "mul"), c * np.eye(n), "add")
    return out


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.lists(st.floats(-3, 3), min_size=1, max_size=5), st.integers(0, 2**32 - 1))
def test_polynomial_matches_horner_oracle(n, coeffs, seed):
    M = rand_hermitian(np.random.default_rng(seed), n)
    got = func_calculus(M, Polynomial(coeffs))
    want = _horner(coeffs, M)
    scale = max(1.0, np.linalg.norm(want, 2), np.linalg.norm(M, 2) ** (len(coeffs) - 1))
    assert np.abs(got - want).max() <= 1e-10 * scale


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_abs_op_squares_to_gram(n, seed):
    C = rand_complex(np.random.default_rng(seed), n)
    R = abs_op(C)
    G = C.conj().T @ C
    assert np.linalg.eigvalsh(R)[0] >= -DEFAULT_TOL.tau(G)
    assert np.linalg.norm(R @ R - G, 2) <= 10 * DEFAULT_TOL.tau(G)


def test_abs_op_examples():
    assert np.allclose(abs_op(np.array([[0, 1], [0, 0]])), np.diag([0, 1]))
    P = rand_psd(np.random.default_rng(3), 4)
    assert np.allclose(abs_op(P), P)
    assert np.allclose(abs_op(-np.eye(3)), np.eye(3))
    # rectangular rows >= cols gives a cols x cols result
    assert abs_op(np.ones((3, 2))).shape == (2, 2)


def test_singular_values_examples(rng):
    assert np.allclose(singular_values(np.diag([3.0, -1.0])), [3, 1])
    Q = np.linalg.qr(rand_complex(rng, 4))[0]
    assert np.allclose(singular_values(Q), np.ones(4))
    assert np.allclose(singular_values(np.array([[0, 2], [0, 0]])), [2, 0])
    H = rand_hermitian(rng, 5)
    assert np.allclose(singular_values(H), np.sort(np.abs(np.linalg.eigvalsh(H)))[::-1])
    assert np.allclose(ky_fan(np.diag([3.0, -1.0, 2.0])), [3, 5, 6])


def test_unitary_equivariance(rng):
    M = rand_hermitian(rng, 5)
    U = np.linalg.qr(rand_complex(rng, 5))[0]
    for f in (Power(3), AbsPower(1.5), Polynomial([1, -2, 0.5])):
        lhs = func_calculus(U.conj().T @ M @ U, f)
        rhs = U.conj().T @ func_calculus(M, f) @ U
        assert np.abs(lhs - rhs).max() <= 1e-10 * np.linalg.norm(rhs, 2)


def test_spectral_bounds_examples():
    assert np.allclose(spectral_bounds(np.diag([1.0, 4.0])), (1, 4))
    assert np.allclose(spectral_bounds(np.eye(3)), (1, 1))
    assert np.allclose(spectral_bounds(np.array([[2.0, 1.0], [1.0, 2.0]])), (1, 3))


def test_arith_examples():
    assert np.allclose(arith(np.array([[1j]]), kind="adjoint"), [[-1j]])
    A = rand_complex(np.random.default_rng(0), 3)
    assert np.array_equal(arith(A, np.eye(3), "mul"), A @ np.eye(3))
    assert np.allclose(arith(np.array([[1, 1], [0, 1]]), np.array([[1, 0], [1, 1]]), "mul"),
                       [[2, 1], [1, 1]])
    assert np.allclose(arith(A, kind="scale", alpha=2j), 2j * A)
    with pytest.raises(ShapeMismatch):
        arith(np.ones((2, 2)), np.ones((3, 3)), "add")


def test_scalar_function_round_trip():
    for f in (AbsPower(2.5), Power(-1), Polynomial([0, -1, 2])):
        assert scalar_function_from_dict(f.to_dict()) == f
