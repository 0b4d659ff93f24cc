import numpy as np
import pytest

from bohrcheck.catalog import check_vasic_keckic_scalar
from bohrcheck.errors import BadParam, ConditionViolated, ShapeMismatch
from bohrcheck.majorization import (MajorizationInstance, block_diagonal_route, check_eigen_bohr,
                                    check_major_jensen, eigen_bohr_sides, partial_sums,
                                    weak_major_leq)
from bohrcheck.matkernel import AbsPower, Polynomial, Power, abs_op, func_calculus

from conftest import rand_complex, rand_hermitian, rand_psd


def test_partial_sums_examples():
    assert np.array_equal(partial_sums([3, 1]), [3, 4])
    assert np.array_equal(partial_sums([0, 0, 0]), [0, 0, 0])
    assert np.array_equal(partial_sums([2, 2]), [2, 4])
    assert np.array_equal(partial_sums([1, 3]), [3, 4])


def test_weak_major_examples():
    assert weak_major_leq([2, 2], [3, 1])
    assert not weak_major_leq([3, 1], [2, 2])
    assert weak_major_leq([5, -1, 2], [5, -1, 2])
    with pytest.raises(ShapeMismatch):
        weak_major_leq([1], [1, 2])


def test_weak_major_reflexive_transitive(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        x = rng.normal(size=n)
        assert weak_major_leq(x, x)
        y = x + np.abs(rng.normal(size=n)) * rng.integers(0, 2)
        z = y + np.abs(rng.normal(size=n)) * rng.integers(0, 2)
        # entrywise domination implies weak submajorization
        assert weak_major_leq(x, y) and weak_major_leq(y, z) and weak_major_leq(x, z)
        u, v, w = rng.normal(size=(3, n))
        if weak_major_leq(u, v) and weak_major_leq(v, w):
            assert weak_major_leq(u, w)


def test_major_jensen_identity_map(rng):
    A = rand_hermitian(rng, 3)
    out = check_major_jensen(MajorizationInstance([A], [np.eye(3)], [1.0], f=AbsPower(2)))
    assert abs(out.margin) <= 1e-12 * out.details["scale"]


def test_major_jensen_scalar_example():
    s = 1 / np.sqrt(2)
    inst = MajorizationInstance([np.array([[1.0]]), np.array([[-2.0]])],
                                [np.array([[s]]), np.array([[s]])], [0.5, 0.5], f=AbsPower(2))
    out = check_major_jensen(inst)
    # lhs |(1 - 2)/2|^2 = 0.25; rhs sum 0.5 * 4 * 0.5 * a_i^2 = 5
    assert out.holds and out.margin == pytest.approx(5 - 0.25)


def test_major_jensen_routes_agree(rng):
    for _ in range(30):
        n, ell = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        alpha = rng.uniform(0.2, 2, size=ell)
        X = [rand_complex(rng, n, min(n, 2)) for _ in range(ell)]
        S = sum(a * x.conj().T @ x for a, x in zip(alpha, X))
        X = [x * np.sqrt(0.9 / np.linalg.norm(S, 2)) for x in X]
        ops = [rand_hermitian(rng, n) for _ in range(ell)]
        for f in (AbsPower(1), AbsPower(2), AbsPower(3)):
            inst = MajorizationInstance(ops, X, alpha, f=f)
            a, b = check_major_jensen(inst), block_diagonal_route(inst)
            assert a.holds and b.holds
            assert a.margin == pytest.approx(b.margin, abs=1e-9 * a.details["scale"])


def test_major_jensen_errors(rng):
    A = rand_hermitian(rng, 2)
    with pytest.raises(ConditionViolated):
        check_major_jensen(MajorizationInstance([A], [2 * np.eye(2)], [1.0], f=AbsPower(2)))
    with pytest.raises(BadParam):
        check_major_jensen(MajorizationInstance([A], [np.eye(2)], [1.0], f=Power(2)))
    with pytest.raises(BadParam):
        check_major_jensen(MajorizationInstance([A], [np.eye(2)], [1.0], f=AbsPower(0.5)))
    with pytest.raises(ShapeMismatch):
        MajorizationInstance([A], [np.eye(2), np.eye(2)], [1.0])


def test_block_route_accepts_polynomial(rng):
    inst = MajorizationInstance([rand_hermitian(rng, 2)], [0.8 * np.eye(2)], [1.0],
                                f=Polynomial([0, 0, 1]))
    assert block_diagonal_route(inst).holds


def test_eigen_bohr_examples(rng):
    A = rand_hermitian(rng, 3)
    out = check_eigen_bohr(MajorizationInstance([A], [np.eye(3)], [1.0], r=2.0))
    assert abs(out.margin) <= 1e-12 * out.details["scale"]
    A1, A2 = rand_hermitian(rng, 3), rand_hermitian(rng, 3)
    p, r = np.array([1.0, 2.0]), 2.0
    w = p ** (1 / (1 - r))
    X1, X2 = rand_complex(rng, 3), rand_complex(rng, 3)
    S = w[0] * X1.conj().T @ X1 + w[1] * X2.conj().T @ X2
    c = np.sqrt(0.8 * w.sum() / np.linalg.norm(S, 2))
    out = check_eigen_bohr(MajorizationInstance([A1, A2], [c * X1, c * X2], p, r=r))
    assert out.holds and len(out.details["gaps"]) == 3
    with pytest.raises(ConditionViolated):
        check_eigen_bohr(MajorizationInstance([A1, A2], [3 * c * X1, 3 * c * X2], p, r=r))
    with pytest.raises(BadParam):
        check_eigen_bohr(MajorizationInstance([A1], [np.eye(3)], [1.0], r=1.0))


def test_eigen_bohr_trace_consistency(rng):
    A1, A2 = rand_hermitian(rng, 4), rand_hermitian(rng, 4)
    X = [np.eye(4) / np.sqrt(2), np.eye(4) / np.sqrt(2)]
    inst = MajorizationInstance([A1, A2], X, [1.0, 1.0], r=3.0)
    out = check_eigen_bohr(inst)
    lhs, rhs = eigen_bohr_sides(inst)
    assert out.details["gaps"][-1] == pytest.approx(np.trace(rhs - lhs).real, rel=1e-10)


def test_abs_power_agrees_with_power_on_psd(rng):
    P = rand_psd(rng, 4)
    for r in (1.5, 2.0, 3.0):
        a = np.linalg.eigvalsh(func_calculus(abs_op(P), Power(r)))
        b = np.linalg.eigvalsh(func_calculus(P, Power(r)))
        assert np.allclose(a, b, rtol=1e-10, atol=1e-10 * b.max())


def test_scalar_eigen_bohr_equals_vasic_keckic(rng):
    for _ in range(200):
        n = int(rng.integers(1, 6))
        r = float(rng.choice([1.5, 2.0, 3.0]))
        p = np.exp(rng.uniform(np.log(0.2), np.log(5), size=n))
        z = rng.normal(size=n)
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=n))
        inst = MajorizationInstance([np.array([[x]]) for x in z],
                                    [np.array([[u]]) for u in phases], p, r=r)
        eb = check_eigen_bohr(inst)
        vk = check_vasic_keckic_scalar(z, p, r)
        assert eb.margin == pytest.approx(vk.margin, abs=1e-10 * max(1, vk.details["scale"]))
