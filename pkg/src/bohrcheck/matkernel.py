"""
Dense complex matrix kernel.

Hermitian eigendecomposition, spectral calculus and the operator absolute
value ``|C| = (C^* C)^{1/2}``. Matrices are plain ``numpy.ndarray`` objects of
dtype ``complex128``; :func:`as_matrix` validates and converts user input.

Two eigensolvers are provided. :func:`herm_eig` uses LAPACK (``eigh``) by
default and :func:`jacobi_eigh` is a self-contained cyclic complex Jacobi
solver, selectable with ``method="jacobi"``. Both return eigenvalues sorted in
descending order with ties kept in their original order.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DomainError, NoConvergence, NonSquare, NotHermitian, ShapeMismatch

__all__ = [
    "Tolerance", "DEFAULT_TOL", "HermitianEig", "AbsPower", "Power", "Polynomial",
    "ScalarFunction", "as_matrix", "adjoint", "hermitian_part", "norm2", "herm_eig",
    "jacobi_eigh", "eigvalsh_desc", "lambda_min", "func_calculus", "abs_op", "abs_sq",
    "singular_values", "ky_fan", "spectral_bounds", "arith",
]


# =========
# Tolerance
# =========

@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative tolerance pair.

    Every numerical threshold in the package is ``atol + rtol * scale`` for a
    scale appropriate to the quantity being compared.
    """
    atol: float = 1e-10
    rtol: float = 1e-8

    def __post_init__(self):
        if not (self.atol > 0 and self.rtol > 0):
            raise ValueError("tolerances must be positive")
        if not (np.isfinite(self.atol) and np.isfinite(self.rtol)):
            raise ValueError("tolerances must be finite")

    def bound(self, scale: float = 1.0) -> float:
        return self.atol + self.rtol * float(scale)

    def tau(self, M: np.ndarray) -> float:
        """PSD threshold for ``M``: ``atol + rtol * ||M||_2``."""
        return self.bound(norm2(M))

    @classmethod
    def from_env(cls, environ=None) -> "Tolerance":
        environ = os.environ if environ is None else environ
        atol = float(environ.get("BOHR_TOL_ATOL", cls.atol))
        rtol = float(environ.get("BOHR_TOL_RTOL", cls.rtol))
        return cls(atol, rtol)

    def to_dict(self) -> dict:
        return {"atol": self.atol, "rtol": self.rtol}


DEFAULT_TOL = Tolerance()


# ================
# Scalar functions
# ================

@dataclass(frozen=True)
class AbsPower:
    """``t -> |t|**r``."""
    r: float

    def __call__(self, t):
        return np.abs(t) ** self.r

    def to_dict(self):
        return {"kind": "abs_power", "r": self.r}


@dataclass(frozen=True)
class Power:
    """``t -> t**r`` on the nonnegative (or, for ``r < 0``, positive) half-line.

    Integer exponents are evaluated on the whole real line.
    """
    r: float

    @property
    def is_integer(self) -> bool:
        return float(self.r).is_integer() and self.r >= 0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.is_integer:
            return t ** int(self.r)
        return t ** self.r

    def to_dict(self):
        return {"kind": "power", "r": self.r}


@dataclass(frozen=True)
class Polynomial:
    """``t -> sum(coeffs[k] * t**k)``, coefficients in increasing degree."""
    coeffs: tuple

    def __init__(self, coeffs: Sequence[float]):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in coeffs))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c in reversed(self.coeffs):
            out = out * t + c
        return out

    def to_dict(self):
        return {"kind": "polynomial", "coeffs": list(self.coeffs)}


ScalarFunction = Union[AbsPower, Power, Polynomial]


def scalar_function_from_dict(d: dict) -> ScalarFunction:
    kind = d.get("kind")
    if kind == "abs_power":
        return AbsPower(float(d["r"]))
    if kind == "power":
        return Power(float(d["r"]))
    if kind == "polynomial":
        return Polynomial(d["coeffs"])
    raise ValueError(f"unknown scalar function kind {kind!r}")


# =====================
# Basic matrix plumbing
# =====================

def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Return ``M`` as a finite, non-empty 2-D complex array (a copy)."""
    A = np.array(M, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-dimensional, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ShapeMismatch(f"{name} must be non-empty")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def adjoint(A: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(A))


def hermitian_part(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + adjoint(A))


def norm2(A: np.ndarray) -> float:
    """Spectral norm (largest singular value)."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    if A.ndim < 2:
        return float(np.max(np.abs(A)))
    return float(np.linalg.norm(A, 2))


def _check_hermitian(M: np.ndarray, tol: Tolerance) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {M.shape}")
    asym = float(np.max(np.abs(M - adjoint(M)))) if M.size else 0.0
    if asym > tol.bound(norm2(M)):
        raise NotHermitian(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
    return hermitian_part(M)


# ==============
# Eigensolvers
# ==============

@dataclass(frozen=True)
class HermitianEig:
    eigenvalues: np.ndarray  # descending
    vectors: np.ndarray      # columns are eigenvectors

    def reconstruct(self) -> np.ndarray:
        U = self.vectors
        return (U * self.eigenvalues) @ adjoint(U)


def _sort_desc(w: np.ndarray, U: np.ndarray):
    order = np.argsort(-w, kind="stable")
    return w[order], U[:, order]


def jacobi_eigh(M: np.ndarray, max_sweeps: int = 50, rel_tol: float = 1e-13):
    """Cyclic complex Jacobi eigensolver for a Hermitian matrix.

    Returns ``(w, U)`` in the order the rotations leave them (unsorted).
    Raises :class:`NoConvergence` when the off-diagonal Frobenius norm is
    still above ``rel_tol * ||M||_F`` after ``max_sweeps`` sweeps.
    """
    A = np.array(M, dtype=complex)
    n = A.shape[0]
    U = np.eye(n, dtype=complex)
    target = rel_tol * np.linalg.norm(A)

    def off(B):
        return np.linalg.norm(B - np.diag(np.diag(B)))

    for _ in range(max_sweeps):
        if off(A) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = A[p, q]
                mag = abs(g)
                if mag == 0.0:
                    continue
                phase = g / mag
                app, aqq = A[p, p].real, A[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                # phase fix on column q, then a real Givens rotation
                R = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)
                idx = [p, q]
                A[:, idx] = A[:, idx] @ R
                A[idx, :] = adjoint(R) @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                U[:, idx] = U[:, idx] @ R
    else:
        if off(A) > target:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    return np.real(np.diag(A)).copy(), U


def herm_eig(M, tol: Tolerance = DEFAULT_TOL, method: str = "lapack") -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    The input is symmetrised as ``(M + M^*)/2`` after checking that its
    asymmetry is within tolerance.
    """
    H = _check_hermitian(M, tol)
    if method == "lapack":
        w, U = np.linalg.eigh(H)
    elif method == "jacobi":
        w, U = jacobi_eigh(H)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    w, U = _sort_desc(np.asarray(w, dtype=float), np.asarray(U, dtype=complex))
    return HermitianEig(w, U)


def eigvalsh_desc(M, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    H = _check_hermitian(M, tol)
    return np.linalg.eigvalsh(H)[::-1].copy()


def lambda_min(M, tol: Tolerance = DEFAULT_TOL) -> float:
    return float(eigvalsh_desc(M, tol)[-1])


def spectral_bounds(M, tol: Tolerance = DEFAULT_TOL) -> tuple:
    """``(lambda_min, lambda_max)`` of a Hermitian matrix."""
    w = eigvalsh_desc(M, tol)
    return float(w[-1]), float(w[0])


# =================
# Spectral calculus
# =================

def _apply_scalar(w: np.ndarray, f: ScalarFunction, scale: float, tol: Tolerance) -> np.ndarray:
    if isinstance(f, Power) and not f.is_integer:
        tau = tol.bound(scale)
        if f.r < 0:
            if w.min() < tol.atol:
                raise DomainError(
                    f"negative power {f.r} needs a strictly positive spectrum "
                    f"(lambda_min = {w.min():.3e})")
        else:
            if w.min() < -tau:
                raise DomainError(
                    f"fractional power {f.r} of a matrix with eigenvalue {w.min():.3e}")
            w = np.where(w < 0, 0.0, w)
    return np.asarray(f(w), dtype=float)


def func_calculus(M, f: ScalarFunction, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``U diag(f(lambda)) U^*`` for Hermitian ``M``."""
    eig = herm_eig(M, tol)
    fw = _apply_scalar(eig.eigenvalues, f, float(np.max(np.abs(eig.eigenvalues))), tol)
    U = eig.vectors
    return hermitian_part((U * fw) @ adjoint(U))


def abs_sq(C) -> np.ndarray:
    """``|C|^2 = C^* C``."""
    C = np.asarray(C)
    return adjoint(C) @ C


def abs_op(C, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Operator absolute value ``(C^* C)^{1/2}`` (``cols x cols``)."""
    return func_calculus(hermitian_part(abs_sq(C)), Power(0.5), tol)


def singular_values(C, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Singular values of ``C`` in descending order (the spectrum of ``|C|``)."""
    s = np.linalg.svd(np.asarray(C, dtype=complex), compute_uv=False)
    return np.maximum(np.sort(s)[::-1], 0.0)


def ky_fan(C, k: Optional[int] = None) -> np.ndarray:
    """Ky Fan norms: partial sums of singular values; all ``k`` when ``k`` is None."""
    s = np.cumsum(singular_values(C))
    return s if k is None else s[k - 1]


# ==========
# Arithmetic
# ==========

def arith(A, B=None, kind: str = "add", alpha: complex = 1.0) -> np.ndarray:
    """Elementary operations: ``add``, ``sub``, ``mul``, ``scale``, ``adjoint``."""
    A = np.asarray(A, dtype=complex)
    if kind == "adjoint":
        return adjoint(A)
    if kind == "scale":
        return alpha * A
    B = np.asarray(B, dtype=complex)
    if kind in ("add", "sub"):
        if A.shape != B.shape:
            raise ShapeMismatch(f"cannot {kind} shapes {A.shape} and {B.shape}")
        return A + B if kind == "add" else A - B
    if kind == "mul":
        if A.shape[1] != B.shape[0]:
            raise ShapeMismatch(f"cannot multiply shapes {A.shape} and {B.shape}")
        return A @ B
    raise ValueError(f"unknown operation {kind!r}")
