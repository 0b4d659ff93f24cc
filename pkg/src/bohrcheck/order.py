"""
Coefficient matrices and PSD certificates for quadratic operator inequalities.

A :class:`QuadraticCertificateProblem` describes the operator expression

    E(A_1, ..., A_n) = sum_i d_i |A_i|^2 - sum_k s_k |sum_i u_ki A_i|^2

with signs ``s_k`` in {+1, -1}. Writing ``E = Phi(M)`` for the positive linear
map ``Phi(X) = sum_ij X_ij A_i^* A_j``, positive semidefiniteness of the real
coefficient matrix ``M = D(d) - sum_k s_k Lambda(u_k)`` implies ``E >= 0`` for
every operator tuple. Conversely, when ``M`` has a negative eigenvalue with
unit eigenvector ``v``, the scalar tuple ``A_i = v_i`` gives ``E = v^T M v < 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .errors import NotSymmetric, ShapeMismatch, TooLarge
from .matkernel import DEFAULT_TOL, Tolerance, abs_sq, herm_eig, norm2, hermitian_part

__all__ = [
    "gram", "diag_of", "QuadraticCertificateProblem", "PsdResult", "CertificateResult",
    "coefficient_matrix", "psd_check", "principal_minors_nonneg", "loewner_leq",
    "certify", "scalar_witness_value", "operator_expression", "normalize_sign",
]


def _vec(x, name="vector") -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.size < 1:
        raise ShapeMismatch(f"{name} must be non-empty")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def gram(x) -> np.ndarray:
    """Rank-one Gram matrix ``Lambda(x) = (x_i x_j)``."""
    x = _vec(x)
    return np.outer(x, x)


def diag_of(x) -> np.ndarray:
    return np.diag(_vec(x))


@dataclass(frozen=True)
class QuadraticCertificateProblem:
    """Signed Gram terms plus diagonal weights.

    ``terms`` is a tuple of ``(sign, coeffs)`` pairs and ``diag`` the vector of
    weights on ``|A_i|^2``. The problem asks whether
    ``sum_i diag_i |A_i|^2 - sum_k sign_k |sum_i coeffs_ki A_i|^2 >= 0``
    holds for every tuple of operators.
    """
    diag: np.ndarray
    terms: tuple = ()
    label: str = field(default="", compare=False)

    def __post_init__(self):
        d = _vec(self.diag, "diag")
        object.__setattr__(self, "diag", d)
        terms = []
        for sign, coeffs in self.terms:
            if sign not in (1, -1):
                raise ValueError(f"term sign must be +1 or -1, got {sign!r}")
            u = _vec(coeffs, "term coefficients")
            if u.size != d.size:
                raise ShapeMismatch(
                    f"term of length {u.size} does not match n = {d.size}")
            terms.append((int(sign), u))
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def n(self) -> int:
        return self.diag.size

    def __eq__(self, other):
        if not isinstance(other, QuadraticCertificateProblem):
            return NotImplemented
        return (np.array_equal(self.diag, other.diag)
                and len(self.terms) == len(other.terms)
                and all(s == t and np.array_equal(u, w)
                        for (s, u), (t, w) in zip(self.terms, other.terms)))

    def __hash__(self):
        return hash((self.diag.tobytes(), tuple((s, u.tobytes()) for s, u in self.terms)))

    def to_dict(self) -> dict:
        return {
            "type": "certificate",
            "diag": [float(x) for x in self.diag],
            "terms": [{"sign": s, "coeffs": [float(x) for x in u]} for s, u in self.terms],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QuadraticCertificateProblem":
        terms = tuple((int(t["sign"]), t["coeffs"]) for t in d.get("terms", []))
        return cls(np.asarray(d["diag"], dtype=float), terms)


def coefficient_matrix(p: QuadraticCertificateProblem) -> np.ndarray:
    """``M = D(diag) - sum_k sign_k Lambda(coeffs_k)``."""
    M = diag_of(p.diag)
    for sign, u in p.terms:
        M = M - sign * gram(u)
    return M


def normalize_sign(v: np.ndarray) -> np.ndarray:
    """Fix the sign of a real vector so its first largest-magnitude entry is positive."""
    v = np.asarray(v, dtype=float)
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


@dataclass(frozen=True)
class PsdResult:
    psd: bool
    lambda_min: float
    vector: Optional[np.ndarray] = None   # set when not psd

    def __bool__(self):
        return self.psd


def _real_symmetric(M, tol: Tolerance) -> np.ndarray:
    M = np.asarray(M)
    if np.iscomplexobj(M):
        if np.max(np.abs(M.imag), initial=0.0) > tol.bound(norm2(M)):
            raise NotSymmetric("coefficient matrix must be real")
        M = M.real
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {M.shape}")
    if np.max(np.abs(M - M.T), initial=0.0) > tol.bound(norm2(M)):
        raise NotSymmetric("matrix is not symmetric")
    return 0.5 * (M + M.T)


def psd_check(M, tol: Tolerance = DEFAULT_TOL) -> PsdResult:
    """PSD test ``lambda_min(M) >= -tau(M)``; carries the minimizing eigenvector otherwise."""
    M = _real_symmetric(M, tol)
    w, U = np.linalg.eigh(M)
    # eigh sorts ascending; the first column minimizes the Rayleigh quotient
    lam = float(w[0])
    if lam >= -tol.tau(M):
        return PsdResult(True, lam)
    return PsdResult(False, lam, normalize_sign(U[:, 0]))


def principal_minors_nonneg(M, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Sylvester-type test: every principal minor is nonnegative.

    ``M`` is first equilibrated by the congruence ``S = D M D`` with
    ``D_ii = diag(M)_ii^{-1/2}`` wherever that diagonal exceeds ``tau(M)``
    (congruence preserves semidefiniteness, and unit diagonals keep the
    minors well scaled). The ``k x k`` minors of ``S`` are then compared
    against ``-tau(S) * k * ||S||_2**(k-1)``, the first-order change of a
    ``k x k`` determinant under an entry perturbation of size ``tau(S)``.
    Enumerates all ``2**n - 1`` minors, so ``n`` is capped at 20.
    """
    M = _real_symmetric(M, tol)
    n = M.shape[0]
    if n > 20:
        raise TooLarge(f"principal minor enumeration needs n <= 20, got {n}")
    d = np.diag(M)
    big = d > tol.tau(M)
    scale = np.where(big, 1.0 / np.sqrt(np.where(big, d, 1.0)), 1.0)
    S = M * np.outer(scale, scale)
    tau = tol.tau(S)
    nrm = norm2(S)
    for k in range(1, n + 1):
        floor = -tau * k * max(nrm, 1.0) ** (k - 1)
        for idx in combinations(range(n), k):
            if np.linalg.det(S[np.ix_(idx, idx)]) < floor:
                return False
    return True


def loewner_leq(A, B, tol: Tolerance = DEFAULT_TOL) -> bool:
    """``A <= B`` in the Loewner order."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape:
        raise ShapeMismatch(f"shapes {A.shape} and {B.shape} differ")
    D = B - A
    lam = herm_eig(D, tol).eigenvalues[-1]
    return bool(lam >= -tol.tau(D))


@dataclass(frozen=True)
class CertificateResult:
    certified: bool
    coeff_matrix: np.ndarray
    lambda_min: float
    witness: Optional[np.ndarray] = None

    @property
    def status(self) -> str:
        return "certified" if self.certified else "refuted"

    def to_dict(self) -> dict:
        d = {
            "status": self.status,
            "coeff_matrix": [[float(x) for x in row] for row in self.coeff_matrix],
            "lambda_min": float(self.lambda_min),
        }
        if self.witness is not None:
            d["witness"] = [float(x) for x in self.witness]
        return d


def certify(p: QuadraticCertificateProblem, tol: Tolerance = DEFAULT_TOL) -> CertificateResult:
    M = coefficient_matrix(p)
    res = psd_check(M, tol)
    return CertificateResult(res.psd, M, res.lambda_min, res.vector)


def scalar_witness_value(p: QuadraticCertificateProblem, v) -> float:
    """Value of the expression at the 1x1 tuple ``A_i = v_i``; equals ``v^T M v``."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != p.n:
        raise ShapeMismatch(f"witness has length {v.size}, expected {p.n}")
    val = float(np.dot(p.diag, v * v))
    for sign, u in p.terms:
        val -= sign * float(np.dot(u, v)) ** 2
    return val


def operator_expression(p: QuadraticCertificateProblem, operators: Sequence[np.ndarray],
                        split: bool = False):
    """Evaluate ``sum_i d_i |A_i|^2 - sum_k s_k |sum_i u_ki A_i|^2``.

    With ``split=True`` returns ``(lhs, rhs)`` where the expression equals
    ``rhs - lhs`` and both parts are PSD sums.
    """
    ops = [np.asarray(A, dtype=complex) for A in operators]
    if len(ops) != p.n:
        raise ShapeMismatch(f"expected {p.n} operators, got {len(ops)}")
    shape = ops[0].shape
    if any(A.shape != shape for A in ops):
        raise ShapeMismatch("operators must share one shape")
    m = shape[1]
    lhs = np.zeros((m, m), dtype=complex)
    rhs = np.zeros((m, m), dtype=complex)
    for d, A in zip(p.diag, ops):
        if d >= 0:
            rhs += d * abs_sq(A)
        else:
            lhs += -d * abs_sq(A)
    for sign, u in p.terms:
        S = sum(c * A for c, A in zip(u, ops))
        if sign > 0:
            lhs += abs_sq(S)
        else:
            rhs += abs_sq(S)
    lhs, rhs = hermitian_part(lhs), hermitian_part(rhs)
    if split:
        return lhs, rhs
    return rhs - lhs
