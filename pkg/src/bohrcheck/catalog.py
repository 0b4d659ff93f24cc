"""
Evaluators for the concrete Bohr-type inequalities and identities.

Operator inequalities ``LHS <= RHS`` are scored by the margin
``lambda_min(RHS - LHS)``; they hold when the margin is at least
``-(atol + rtol * scale)`` with ``scale = max(||LHS||_2, ||RHS||_2, 1)``.
Identities are scored by the residual ``||LHS - RHS||_2``. Norm inequalities
for every unitarily invariant norm reduce to Ky Fan dominance, i.e. one
comparison per partial sum of singular values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import BadParam, ShapeMismatch
from .matkernel import (DEFAULT_TOL, AbsPower, Polynomial, Power, ScalarFunction, Tolerance,
                        abs_sq, eigvalsh_desc, hermitian_part, ky_fan, norm2)
from .order import (QuadraticCertificateProblem, gram, loewner_leq, operator_expression)

INEQUALITY_IDS = (
    "classical_bohr", "hirzallah11", "hirzallah_norm", "zhang_identity", "zhang_convex",
    "parallelogram", "thm22", "cor2x2", "chansangiam", "vasic_keckic_scalar",
    "rassias_pecaric", "jensen_squares",
)

TEMPLATE_IDS = ("thm22", "hirzallah11", "cor2x2", "chansangiam", "zhang_convex",
                "jensen_squares")

CONJUGATE_TOL = 1e-12


@dataclass
class CheckOutcome:
    holds: bool
    margin: float
    residual: Optional[float] = None
    hypothesis_failed: bool = False
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return bool(self.holds)

    def to_dict(self) -> dict:
        d = {"holds": bool(self.holds), "margin": float(self.margin)}
        if self.residual is not None:
            d["residual"] = float(self.residual)
        if self.hypothesis_failed:
            d["hypothesis_failed"] = True
        if self.details:
            d["details"] = self.details
        return d


def compare_operators(lhs, rhs, tol: Tolerance = DEFAULT_TOL, **details) -> CheckOutcome:
    """Score ``lhs <= rhs`` by ``lambda_min(rhs - lhs)``."""
    scale = max(norm2(lhs), norm2(rhs), 1.0)
    margin = float(eigvalsh_desc(hermitian_part(np.asarray(rhs) - np.asarray(lhs)), tol)[-1])
    return CheckOutcome(margin >= -tol.bound(scale), margin, details={"scale": scale, **details})


def compare_scalars(lhs: float, rhs: float, tol: Tolerance = DEFAULT_TOL, **details) -> CheckOutcome:
    scale = max(abs(lhs), abs(rhs), 1.0)
    margin = float(rhs - lhs)
    return CheckOutcome(margin >= -tol.bound(scale), margin, details={"scale": scale, **details})


def compare_identity(lhs, rhs, tol: Tolerance = DEFAULT_TOL, **details) -> CheckOutcome:
    scale = max(norm2(lhs), norm2(rhs), 1.0)
    residual = norm2(np.asarray(lhs) - np.asarray(rhs))
    return CheckOutcome(residual <= tol.bound(scale), -residual, residual,
                        details={"scale": scale, **details})


def check_conjugate(p: float, q: float) -> None:
    if not (p > 0 and q > 0):
        raise BadParam(f"conjugate exponents must be positive, got p={p}, q={q}")
    if abs(1.0 / p + 1.0 / q - 1.0) > CONJUGATE_TOL:
        raise BadParam("1/p+1/q != 1")


def _pair(A, B):
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if B.ndim == 0:
        B = B.reshape(1, 1)
    if A.shape != B.shape:
        raise ShapeMismatch(f"A and B must share a shape, got {A.shape} and {B.shape}")
    return A, B


# ==========
# Identities
# ==========

def residual_identity(kind: str, A, B, param, tol: Tolerance = DEFAULT_TOL) -> CheckOutcome:
    """Residual of the Zhang identity (``param = (p, q)``) or the generalized
    parallelogram law (``param = t``)."""
    A, B = _pair(A, B)
    if kind == "zhang_identity":
        p, q = param
        check_conjugate(p, q)
        lhs = abs_sq(A - B) + abs_sq(math.sqrt(p / q) * A + math.sqrt(q / p) * B)
        rhs = p * abs_sq(A) + q * abs_sq(B)
    elif kind == "parallelogram":
        t = float(param)
        if abs(t) < 1e-9:
            raise BadParam("parallelogram law needs t != 0")
        lhs = abs_sq(A - B) + abs_sq(t * A + B) / t
        rhs = (1 + t) * abs_sq(A) + (1 + 1 / t) * abs_sq(B)
    else:
        raise BadParam(f"{kind!r} is not an identity")
    return compare_identity(lhs, rhs, tol)


# ====================
# Hirzallah and Bohr
# ====================

def check_hirzallah(A, B, p: float, q: float, X=None, gamma: Optional[float] = None,
                    tol: Tolerance = DEFAULT_TOL) -> CheckOutcome:
    """Hirzallah's inequality ``|A-B|^2 + |(p-1)A+B|^2 <= p|A|^2 + q|B|^2``.

    With ``X`` and ``gamma`` the norm version
    ``gamma |||A-B|^2||| <= |||p|A|^2 X + q X|B|^2|||`` is checked for every
    Ky Fan norm, which covers all unitarily invariant norms.
    """
    A, B = _pair(A, B)
    check_conjugate(p, q)
    if not q >= p > 1:
        raise BadParam(f"need q >= p > 1, got p={p}, q={q}")
    if X is None:
        lhs = abs_sq(A - B) + abs_sq((p - 1) * A + B)
        rhs = p * abs_sq(A) + q * abs_sq(B)
        return compare_operators(lhs, rhs, tol)

    X = np.asarray(X, dtype=complex)
    if X.shape != (A.shape[1], A.shape[1]):
        raise ShapeMismatch(f"X must be {A.shape[1]}x{A.shape[1]}")
    if gamma is None or not gamma > 0:
        raise BadParam("the norm version needs gamma > 0")
    herm_floor = float(eigvalsh_desc(hermitian_part(X), tol)[-1])
    if herm_floor < gamma - tol.bound(max(abs(gamma), 1.0)):
        raise BadParam(f"X is not >= gamma I (lambda_min of Hermitian part {herm_floor:.6g})")
    small = gamma * ky_fan(abs_sq(A - B))
    big = ky_fan(p * abs_sq(A) @ X + q * X @ abs_sq(B))
    gaps = big - small
    k = int(np.argmin(gaps))
    scale = max(float(big[-1]), float(small[-1]), 1.0)
    margin = float(gaps[k])
    return CheckOutcome(margin >= -tol.bound(scale), margin,
                        details={"scale": scale, "worst_k": k + 1})


def check_classical_bohr(a: complex, b: complex, p: float, q: float,
                         tol: Tolerance = DEFAULT_TOL) -> CheckOutcome:
    """``|a+b|^2 <= p|a|^2 + q|b|^2`` for scalars, with equality detection.

    ``details["equality"]`` reports numeric equality and
    ``details["equality_predicted"]`` whether ``(p-1)a = b``.
    """
    check_conjugate(p, q)
    lhs = abs(a + b) ** 2
    rhs = p * abs(a) ** 2 + q * abs(b) ** 2
    out = compare_scalars(lhs, rhs, tol)
    bound = tol.bound(out.details["scale"])
    out.details["equality"] = bool(abs(out.margin) <= bound)
    out.details["equality_predicted"] = bool(
        abs((p - 1) * a - b) <= tol.bound(max(abs(a), abs(b), 1.0)))
    return out


# =======================
# Certificate templates
# =======================

def _weights(x, name):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size < 1 or not np.all(np.isfinite(x)):
        raise BadParam(f"{name} must be a non-empty finite vector")
    return x


def compile_template(id: str, **params) -> QuadraticCertificateProblem:
    """Compile a named inequality to its certificate problem.

    =============== ==============================================================
    ``thm22``        ``t``, ``direction`` (standard/reverse), ``sign`` (minus_plus/plus_minus)
    ``hirzallah11``  ``p``, ``q`` with ``q >= p > 1`` conjugate
    ``cor2x2``       ``a``, ``b``, ``p`` (length-2 vectors)
    ``chansangiam``  ``alpha`` (n x m), ``p`` (length n)
    ``zhang_convex`` ``t`` positive weights summing to 1
    ``jensen_squares`` ``r`` with ``r_i >= 1`` and ``sum 1/r_i = 1``
    =============== ==============================================================
    """
    if id == "thm22":
        t = float(params["t"])
        direction = params.get("direction", "standard")
        sign = params.get("sign", "minus_plus")
        if abs(t) < 1e-12:
            raise BadParam("thm22 needs t != 0")
        if sign == "minus_plus":
            a, b = (1.0, -1.0), (t, 1.0)
        elif sign == "plus_minus":
            a, b = (1.0, 1.0), (t, -1.0)
        else:
            raise BadParam(f"unknown sign pattern {sign!r}")
        c = np.array([1 + t, 1 + 1 / t])
        if direction == "standard":
            return QuadraticCertificateProblem(c, ((1, a), (1, b)), label="thm22")
        if direction == "reverse":
            return QuadraticCertificateProblem(-c, ((-1, a), (-1, b)), label="thm22")
        raise BadParam(f"unknown direction {direction!r}")

    if id == "hirzallah11":
        p, q = float(params["p"]), float(params["q"])
        check_conjugate(p, q)
        if not q >= p > 1:
            raise BadParam(f"need q >= p > 1, got p={p}, q={q}")
        return QuadraticCertificateProblem(np.array([p, q]), ((1, (1.0, -1.0)), (1, (p - 1, 1.0))),
                                           label="hirzallah11")

    if id == "cor2x2":
        a, b, p = (_weights(params[k], k) for k in ("a", "b", "p"))
        if not (a.size == b.size == p.size == 2):
            raise BadParam("cor2x2 takes length-2 vectors a, b, p")
        return QuadraticCertificateProblem(p, ((1, a), (1, b)), label="cor2x2")

    if id == "chansangiam":
        alpha = np.asarray(params["alpha"], dtype=float)
        if alpha.ndim == 1:
            alpha = alpha.reshape(-1, 1)
        p = _weights(params["p"], "p")
        if alpha.shape[0] != p.size:
            raise BadParam(f"alpha has {alpha.shape[0]} rows but p has length {p.size}")
        terms = tuple((-1, alpha[:, k]) for k in range(alpha.shape[1]))
        return QuadraticCertificateProblem(-p, terms, label="chansangiam")

    if id == "zhang_convex":
        t = _weights(params["t"], "t")
        if np.any(t <= 0) or abs(t.sum() - 1) > CONJUGATE_TOL:
            raise BadParam("zhang_convex needs t_i > 0 with sum 1")
        return QuadraticCertificateProblem(t, ((1, t),), label="zhang_convex")

    if id == "jensen_squares":
        r = _weights(params["r"], "r")
        if np.any(r < 1) or abs(np.sum(1 / r) - 1) > CONJUGATE_TOL:
            raise BadParam("jensen_squares needs r_i >= 1 with sum 1/r_i = 1")
        return QuadraticCertificateProblem(r, ((1, np.ones_like(r)),), label="jensen_squares")

    raise BadParam(f"{id!r} has no certificate template")


def cor2x2_conditions(a, b, p) -> bool:
    """The three scalar conditions of the 2x2 corollary, checked literally."""
    (a1, a2), (b1, b2), (p1, p2) = a, b, p
    d1 = p1 - (a1 ** 2 + b1 ** 2)
    d2 = p2 - (a2 ** 2 + b2 ** 2)
    return d1 >= 0 and d2 >= 0 and d1 * d2 >= (a1 * a2 + b1 * b2) ** 2


def check_template(id: str, params: dict, operators: Sequence, tol: Tolerance = DEFAULT_TOL) -> CheckOutcome:
    """Evaluate a template inequality on a concrete operator tuple."""
    problem = compile_template(id, **params)
    lhs, rhs = operator_expression(problem, operators, split=True)
    return compare_operators(lhs, rhs, tol)


# =================
# Scalar inequalities
# =================

def vasic_keckic_rhs(z, a, r: float) -> float:
    z = np.asarray(z, dtype=complex).reshape(-1)
    a = np.asarray(a, dtype=float).reshape(-1)
    return float(np.sum(a ** (1 / (1 - r))) ** (r - 1) * np.sum(a * np.abs(z) ** r))


def check_vasic_keckic_scalar(z, a, r: float, tol: Tolerance = DEFAULT_TOL) -> CheckOutcome:
    """``|sum z_i|^r <= (sum a_i^{1/(1-r)})^{r-1} sum a_i |z_i|^r`` for ``r > 1``, ``a_i > 0``."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    a = np.asarray(a, dtype=float).reshape(-1)
    if z.size != a.size or z.size == 0:
        raise BadParam("z and a must be non-empty and of equal length")
    if not r > 1:
        raise BadParam(f"need r > 1, got {r}")
    if np.any(a <= 0):
        raise BadParam("weights a_i must be positive")
    lhs = float(abs(np.sum(z)) ** r)
    return compare_scalars(lhs, vasic_keckic_rhs(z, a, r), tol)


def _nondecreasing_convex(f: ScalarFunction) -> bool:
    if isinstance(f, (Power, AbsPower)):
        return f.r >= 1
    if isinstance(f, Polynomial):
        return all(c >= 0 for c in f.coeffs)
    return False


def check_rassias_pecaric(x, p, f: ScalarFunction, tol: Tolerance = DEFAULT_TOL) -> CheckOutcome:
    """``f(||sum p_j x_j|| / P) >= sum p_j f(||x_j||) / P`` with ``P = sum p_j``.

    Needs ``p_1 > 0``, ``p_j <= 0`` for ``j >= 2``, ``P > 0`` and ``f``
    nondecreasing convex on ``[0, inf)``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    p = np.asarray(p, dtype=float).reshape(-1)
    if x.shape[0] != p.size:
        raise BadParam(f"{x.shape[0]} vectors but {p.size} weights")
    if not (p[0] > 0 and np.all(p[1:] <= 0) and p.sum() > 0):
        raise BadParam("need p_1 > 0, p_j <= 0 (j >= 2) and sum p_j > 0")
    if not _nondecreasing_convex(f):
        raise BadParam(f"{f!r} is not an admissible nondecreasing convex function")
    P = p.sum()
    lhs = float(f(np.linalg.norm(p @ x) / P))
    rhs = float(np.sum(p * f(np.linalg.norm(x, axis=1))) / P)
    # the inequality reads lhs >= rhs
    return compare_scalars(rhs, lhs, tol)


# ==================
# Monotonicity of F
# ==================

def F(a, operators) -> np.ndarray:
    """``F(a) = |sum a_i A_i|^2``."""
    return abs_sq(sum(c * np.asarray(A, dtype=complex) for c, A in zip(a, operators)))


def monotone_3d_conditions(a, b, tol: Tolerance = DEFAULT_TOL) -> bool:
    """``|a_i| <= |b_i|`` and ``a_i b_j = a_j b_i`` for three-term vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size != 3 or b.size != 3:
        raise ShapeMismatch("the 3D criterion needs vectors of length 3")
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1.0)
    if np.any(np.abs(a) > np.abs(b) + tol.bound(scale)):
        return False
    cross = np.outer(a, b) - np.outer(b, a)
    return bool(np.max(np.abs(cross)) <= tol.bound(scale ** 2))


def check_monotonic_F(a, b, tuples, tol: Tolerance = DEFAULT_TOL, route: str = "loewner") -> CheckOutcome:
    """``Lambda(a) <= Lambda(b)`` implies ``F(a) <= F(b)``, over every tuple given.

    ``route="3d"`` replaces the Loewner hypothesis by the scalar conditions
    of :func:`monotone_3d_conditions`.
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.size != b.size:
        raise ShapeMismatch("a and b must have equal length")
    for ops in tuples:
        if len(ops) != a.size:
            raise ShapeMismatch(f"tuple of length {len(ops)} does not match n = {a.size}")
    if route == "loewner":
        hypothesis = loewner_leq(gram(a), gram(b), tol)
    elif route == "3d":
        hypothesis = monotone_3d_conditions(a, b, tol)
    else:
        raise BadParam(f"unknown route {route!r}")
    worst = None
    for ops in tuples:
        out = compare_operators(F(a, ops), F(b, ops), tol)
        if worst is None or out.margin < worst.margin:
            worst = out
    if worst is None:
        worst = CheckOutcome(True, 0.0)
    worst.details["route"] = route
    worst.hypothesis_failed = not hypothesis
    return worst
