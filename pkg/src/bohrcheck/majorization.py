"""
Eigenvalue partial sums and weak-majorization extensions of Bohr's inequality.

All checks here compare the descending spectra of two Hermitian matrices
through every prefix sum ``sum_{j<=k} lambda_j``; the margin is the smallest
gap ``prefix_k(RHS) - prefix_k(LHS)`` over ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .catalog import CheckOutcome
from .errors import BadParam, ConditionViolated, ShapeMismatch
from .jensen import Congruence, PositiveLinearMap, apply_map
from .matkernel import (DEFAULT_TOL, AbsPower, Polynomial, Power, ScalarFunction, Tolerance,
                        abs_op, adjoint, eigvalsh_desc, func_calculus, hermitian_part)

__all__ = [
    "partial_sums", "weak_major_leq", "MajorizationInstance", "check_major_jensen",
    "major_jensen_theorem", "block_diagonal_route", "check_eigen_bohr", "compare_spectra",
]


def partial_sums(s) -> np.ndarray:
    s = np.sort(np.asarray(s, dtype=float).reshape(-1))[::-1]
    return np.cumsum(s)


def weak_major_leq(x, y, tol: Tolerance = DEFAULT_TOL) -> bool:
    """``x`` is weakly submajorized by ``y``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.size != y.size:
        raise ShapeMismatch(f"lengths {x.size} and {y.size} differ")
    px, py = partial_sums(x), partial_sums(y)
    scale = max(np.sum(np.abs(x)), np.sum(np.abs(y)), 1.0)
    return bool(np.all(px <= py + tol.bound(scale)))


def compare_spectra(lhs, rhs, tol: Tolerance = DEFAULT_TOL, **details) -> CheckOutcome:
    """Score ``sum_{j<=k} lambda_j(lhs) <= sum_{j<=k} lambda_j(rhs)`` for all ``k``."""
    wl = eigvalsh_desc(hermitian_part(np.asarray(lhs)), tol)
    wr = eigvalsh_desc(hermitian_part(np.asarray(rhs)), tol)
    if wl.size != wr.size:
        raise ShapeMismatch("spectra of different lengths")
    gaps = np.cumsum(wr) - np.cumsum(wl)
    k = int(np.argmin(gaps))
    scale = max(np.sum(np.abs(wl)), np.sum(np.abs(wr)), 1.0)
    margin = float(gaps[k])
    return CheckOutcome(margin >= -tol.bound(scale), margin,
                        details={"scale": float(scale), "worst_k": k + 1,
                                 "gaps": [float(g) for g in gaps], **details})


@dataclass
class MajorizationInstance:
    """Operators ``A_i``, congruence factors ``X_i`` and positive weights.

    ``weights`` are the ``alpha_i`` of the weak-majorization Jensen check or
    the ``p_i`` of the eigenvalue Bohr check; ``r`` is used only by the
    latter and ``f`` only by the former.
    """
    operators: List[np.ndarray]
    maps: List[np.ndarray]
    weights: np.ndarray
    r: Optional[float] = None
    f: Optional[ScalarFunction] = None

    def __post_init__(self):
        self.operators = [hermitian_part(np.asarray(A, dtype=complex)) for A in self.operators]
        self.maps = [np.asarray(X, dtype=complex) for X in self.maps]
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if not (len(self.operators) == len(self.maps) == self.weights.size) or not self.maps:
            raise ShapeMismatch("operators, maps and weights must have equal, non-zero length")
        if np.any(self.weights <= 0):
            raise BadParam("weights must be positive")
        for A, X in zip(self.operators, self.maps):
            if A.shape[0] != X.shape[0] or X.shape[1] != self.maps[0].shape[1]:
                raise ShapeMismatch("X_i must be n_i x m with n_i the size of A_i")

    def __eq__(self, other):
        if not isinstance(other, MajorizationInstance):
            return NotImplemented
        return (self.r == other.r and self.f == other.f
                and np.array_equal(self.weights, other.weights)
                and len(self.operators) == len(other.operators)
                and all(np.array_equal(A, B) for A, B in zip(self.operators, other.operators))
                and all(np.array_equal(A, B) for A, B in zip(self.maps, other.maps)))


def _admissible(f: ScalarFunction, spectra_lo: float, submultiplicative: bool) -> bool:
    # convex, f(0) <= 0, and defined on a convex set holding 0 and all spectra
    if isinstance(f, AbsPower):
        return f.r >= 1
    if submultiplicative:
        return False
    if isinstance(f, Power):
        return f.r >= 1 and spectra_lo >= 0
    if isinstance(f, Polynomial):
        c = f.coeffs + (0.0,) * max(0, 3 - len(f.coeffs))
        return len(f.coeffs) <= 3 and c[0] <= 0 and c[2] >= 0
    return False


def _check_contraction(S, tol: Tolerance, upper: float, label: str):
    w = eigvalsh_desc(S, tol)
    if w[-1] < tol.atol:
        raise ConditionViolated(f"{label} is not strictly positive (lambda_min = {w[-1]:.3e})")
    if w[0] > upper + tol.bound(max(upper, 1.0)):
        raise ConditionViolated(f"{label} exceeds its bound (lambda_max = {w[0]:.6g} > {upper:.6g})")


def major_jensen_theorem(A, maps: Sequence[PositiveLinearMap], alphas, f: ScalarFunction,
                         tol: Tolerance = DEFAULT_TOL) -> CheckOutcome:
    """Partial sums of ``f(sum alpha_i Phi_i(A))`` versus ``sum alpha_i Phi_i(f(A))``.

    Needs ``0 < sum alpha_i Phi_i(I) <= I`` and ``f`` convex with
    ``f(0) <= 0`` on an interval containing 0 and the spectrum of ``A``.
    """
    A = hermitian_part(np.asarray(A, dtype=complex))
    alphas = np.asarray(alphas, dtype=float).reshape(-1)
    if alphas.size != len(maps):
        raise ShapeMismatch("one weight per map")
    if np.any(alphas < 0):
        raise BadParam("weights must be nonnegative")
    lo = float(eigvalsh_desc(A, tol)[-1])
    if not _admissible(f, lo, submultiplicative=False):
        raise BadParam(f"{f!r} is not an admissible convex function with f(0) <= 0")
    eye = np.eye(A.shape[0])
    _check_contraction(sum(c * apply_map(phi, eye) for c, phi in zip(alphas, maps)),
                       tol, 1.0, "sum alpha_i Phi_i(I)")
    inner = hermitian_part(sum(c * apply_map(phi, A) for c, phi in zip(alphas, maps)))
    fA = func_calculus(A, f, tol)
    rhs = sum(c * apply_map(phi, fA) for c, phi in zip(alphas, maps))
    return compare_spectra(func_calculus(inner, f, tol), rhs, tol)


def check_major_jensen(inst: MajorizationInstance, tol: Tolerance = DEFAULT_TOL) -> CheckOutcome:
    """Congruence form: partial sums of ``f(sum X_i^* A_i X_i)`` against
    ``sum alpha_i f(1/alpha_i) X_i^* f(A_i) X_i``, for ``0 < sum alpha_i X_i^* X_i <= I``
    and convex, submultiplicative ``f`` with ``f(0) <= 0``."""
    f = inst.f
    if f is None or not _admissible(f, 0.0, submultiplicative=True):
        raise BadParam(f"{f!r} is not admissible (convex, f(0) <= 0, f(uv) <= f(u)f(v))")
    alpha = inst.weights
    S = sum(a * adjoint(X) @ X for a, X in zip(alpha, inst.maps))
    _check_contraction(S, tol, 1.0, "sum alpha_i X_i^* X_i")
    inner = sum(adjoint(X) @ A @ X for A, X in zip(inst.operators, inst.maps))
    lhs = func_calculus(hermitian_part(inner), f, tol)
    rhs = sum(a * float(f(1.0 / a)) * adjoint(X) @ func_calculus(A, f, tol) @ X
              for a, A, X in zip(alpha, inst.operators, inst.maps))
    return compare_spectra(lhs, rhs, tol)


def block_diagonal_route(inst: MajorizationInstance, tol: Tolerance = DEFAULT_TOL) -> CheckOutcome:
    """The congruence form evaluated through :func:`major_jensen_theorem`.

    Builds ``A = diag(A_1/alpha_1, ..., A_l/alpha_l)`` and the block maps
    ``Phi_i(A) = X_i^* A_ii X_i``.
    """
    alpha = inst.weights
    sizes = [A.shape[0] for A in inst.operators]
    N = sum(sizes)
    big = np.zeros((N, N), dtype=complex)
    maps = []
    offset = 0
    for a, A, X in zip(alpha, inst.operators, inst.maps):
        n = A.shape[0]
        big[offset:offset + n, offset:offset + n] = A / a
        E = np.zeros((N, X.shape[1]), dtype=complex)
        E[offset:offset + n, :] = X
        maps.append(Congruence(E))
        offset += n
    return major_jensen_theorem(big, maps, alpha, inst.f, tol)


def eigen_bohr_sides(inst: MajorizationInstance, tol: Tolerance = DEFAULT_TOL):
    r = inst.r
    w = inst.weights ** (1.0 / (1.0 - r))
    inner = hermitian_part(sum(adjoint(X) @ A @ X for A, X in zip(inst.operators, inst.maps)))
    lhs = func_calculus(abs_op(inner, tol), Power(r), tol)
    rhs = np.sum(w) ** (r - 1) * sum(
        p * adjoint(X) @ func_calculus(abs_op(A, tol), Power(r), tol) @ X
        for p, A, X in zip(inst.weights, inst.operators, inst.maps))
    return lhs, hermitian_part(rhs)


def check_eigen_bohr(inst: MajorizationInstance, tol: Tolerance = DEFAULT_TOL) -> CheckOutcome:
    """Eigenvalue Bohr inequality: for ``r > 1`` and
    ``0 < sum p_i^{1/(1-r)} X_i^* X_i <= (sum p_i^{1/(1-r)}) I``,

        sum_{j<=k} lambda_j(|sum X_i^* A_i X_i|^r)
            <= (sum p_i^{1/(1-r)})^{r-1} sum_{j<=k} lambda_j(sum p_i X_i^* |A_i|^r X_i).
    """
    r = inst.r
    if r is None or not r > 1:
        raise BadParam(f"eigenvalue Bohr needs r > 1, got {r}")
    w = inst.weights ** (1.0 / (1.0 - r))
    S = sum(wi * adjoint(X) @ X for wi, X in zip(w, inst.maps))
    _check_contraction(S, tol, float(np.sum(w)), "sum p_i^{1/(1-r)} X_i^* X_i")
    lhs, rhs = eigen_bohr_sides(inst, tol)
    return compare_spectra(lhs, rhs, tol)
