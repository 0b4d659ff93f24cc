"""
Positive linear maps and discrete Jensen-type Bohr inequalities.

The central inequality, for ``1 < r <= 2``, weights ``a_i > 0`` and positive
maps with ``sum a_i^{1/(1-r)} phi_i(I) <= k * (sum a_i^{1/(1-r)}) I``, is

    (sum phi_i(A_i))^r <= k^{r-1} (sum a_i^{1/(1-r)})^{r-1} sum a_i phi_i(A_i^r)

for positive ``A_i``. :func:`check_spectra_jensen` evaluates the same
conclusion for ``r`` outside ``[0, 1]`` when the operator spectra are
separated from the spectrum of ``sum phi_i(A_i)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Union

import numpy as np

from .catalog import CheckOutcome, compare_operators
from .errors import (BadParam, ConditionViolated, DomainError, GenerationFailed, NotUnital,
                     ShapeMismatch)
from .matkernel import (DEFAULT_TOL, AbsPower, Polynomial, Power, ScalarFunction, Tolerance,
                        adjoint, eigvalsh_desc, func_calculus, hermitian_part, norm2,
                        spectral_bounds)

__all__ = [
    "Congruence", "VectorState", "Scale", "Pinch", "PositiveLinearMap", "apply_map",
    "map_from_dict", "scaled_map", "JensenInstance", "SpectraInstance", "WeightCondition",
    "check_weight_condition", "check_jensen_bohr", "check_operator_jensen",
    "check_spectra_jensen", "spectra_instance", "generate_spectra_instance",
]


# ======================
# Positive linear maps
# ======================

@dataclass(frozen=True, eq=False)
class Congruence:
    """``A -> X^* A X`` for an ``n x m`` matrix ``X``."""
    X: np.ndarray
    kind = "congruence"

    def __post_init__(self):
        X = np.asarray(self.X, dtype=complex)
        if X.ndim != 2:
            raise ShapeMismatch("congruence factor must be a matrix")
        object.__setattr__(self, "X", X)

    def input_dim(self, n: int) -> int:
        return self.X.shape[0]

    def output_dim(self, n: int) -> int:
        return self.X.shape[1]

    def __call__(self, A):
        return adjoint(self.X) @ A @ self.X

    def to_dict(self, encode):
        return {"kind": self.kind, "X": encode(self.X)}


@dataclass(frozen=True, eq=False)
class VectorState:
    """``A -> <A x, x>`` as a ``1 x 1`` matrix."""
    x: np.ndarray
    kind = "vector_state"

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=complex).reshape(-1))

    def input_dim(self, n: int) -> int:
        return self.x.size

    def output_dim(self, n: int) -> int:
        return 1

    def __call__(self, A):
        x = self.x
        return np.array([[np.vdot(x, A @ x)]])

    def to_dict(self, encode):
        return {"kind": self.kind, "x": [[float(z.real), float(z.imag)] for z in self.x]}


@dataclass(frozen=True, eq=False)
class Scale:
    """``A -> w A`` with ``w >= 0``."""
    w: float
    kind = "scale"

    def __post_init__(self):
        if not self.w >= 0:
            raise BadParam(f"scale map needs w >= 0, got {self.w}")
        object.__setattr__(self, "w", float(self.w))

    def input_dim(self, n: int) -> int:
        return n

    def output_dim(self, n: int) -> int:
        return n

    def __call__(self, A):
        return self.w * np.asarray(A)

    def to_dict(self, encode):
        return {"kind": self.kind, "w": self.w}


@dataclass(frozen=True, eq=False)
class Pinch:
    """Compression to the principal block on ``indices``."""
    indices: tuple
    kind = "pinch"

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx or len(set(idx)) != len(idx) or min(idx) < 0:
            raise BadParam("pinch indices must be distinct nonnegative integers")
        object.__setattr__(self, "indices", idx)

    def input_dim(self, n: int) -> int:
        if max(self.indices) >= n:
            raise ShapeMismatch(f"pinch index {max(self.indices)} out of range for dim {n}")
        return n

    def output_dim(self, n: int) -> int:
        return len(self.indices)

    def __call__(self, A):
        idx = self.indices
        return np.asarray(A)[np.ix_(idx, idx)]

    def to_dict(self, encode):
        return {"kind": self.kind, "indices": list(self.indices)}


PositiveLinearMap = Union[Congruence, VectorState, Scale, Pinch]


def _map_eq(f, g) -> bool:
    if type(f) is not type(g):
        return False
    if isinstance(f, Congruence):
        return np.array_equal(f.X, g.X)
    if isinstance(f, VectorState):
        return np.array_equal(f.x, g.x)
    if isinstance(f, Scale):
        return f.w == g.w
    return f.indices == g.indices


for _cls in (Congruence, VectorState, Scale, Pinch):
    _cls.__eq__ = _map_eq
    _cls.__hash__ = None


def map_from_dict(d: dict, decode) -> PositiveLinearMap:
    kind = d.get("kind")
    if kind == "congruence":
        return Congruence(decode(d["X"]))
    if kind == "vector_state":
        return VectorState([complex(re, im) for re, im in d["x"]])
    if kind == "scale":
        return Scale(float(d["w"]))
    if kind == "pinch":
        return Pinch(tuple(d["indices"]))
    raise BadParam(f"unknown map kind {kind!r}")


def apply_map(phi: PositiveLinearMap, A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"maps act on square matrices, got {A.shape}")
    n = A.shape[0]
    if phi.input_dim(n) != n:
        raise ShapeMismatch(f"{phi.kind} map expects dim {phi.input_dim(n)}, got {n}")
    return phi(A)


def scaled_map(phi: PositiveLinearMap, c: float) -> PositiveLinearMap:
    """The map ``c * phi`` for ``c >= 0`` (pinches cannot be rescaled)."""
    if isinstance(phi, Congruence):
        return Congruence(np.sqrt(c) * phi.X)
    if isinstance(phi, VectorState):
        return VectorState(np.sqrt(c) * phi.x)
    if isinstance(phi, Scale):
        return Scale(c * phi.w)
    raise BadParam("a pinch map has no rescaled form")


def _image_sum(maps, operators, coeffs=None):
    out = None
    for i, (phi, A) in enumerate(zip(maps, operators)):
        term = apply_map(phi, A)
        if coeffs is not None:
            term = coeffs[i] * term
        out = term if out is None else out + term
    return hermitian_part(out)


# =========
# Instances
# =========

@dataclass
class JensenInstance:
    maps: List[PositiveLinearMap]
    weights: np.ndarray
    r: float
    operators: List[np.ndarray]
    k_constant: Optional[float] = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        self.operators = [np.asarray(A, dtype=complex) for A in self.operators]
        self.maps = list(self.maps)
        if not (len(self.maps) == self.weights.size == len(self.operators)):
            raise ShapeMismatch("maps, weights and operators must have equal length")
        if self.weights.size == 0:
            raise BadParam("instance needs at least one term")
        if np.any(self.weights <= 0):
            raise BadParam("weights must be positive")
        if self.k_constant is not None and not self.k_constant > 0:
            raise BadParam("k must be positive")

    @property
    def dims(self):
        return [A.shape[0] for A in self.operators]

    def __eq__(self, other):
        if not isinstance(other, JensenInstance):
            return NotImplemented
        return (self.maps == other.maps and np.array_equal(self.weights, other.weights)
                and self.r == other.r and self.k_constant == other.k_constant
                and len(self.operators) == len(other.operators)
                and all(np.array_equal(A, B) for A, B in zip(self.operators, other.operators)))


def jensen_weights(a: np.ndarray, r: float) -> np.ndarray:
    """``a_i^{1/(1-r)}``."""
    if r == 1:
        raise BadParam("r = 1 is excluded")
    return np.asarray(a, dtype=float) ** (1.0 / (1.0 - r))


@dataclass(frozen=True)
class WeightCondition:
    satisfied: bool
    margin: float

    def __bool__(self):
        return self.satisfied


def check_weight_condition(maps: Sequence[PositiveLinearMap], a, r: float,
                           k: Optional[float] = None, dims=None,
                           tol: Tolerance = DEFAULT_TOL) -> WeightCondition:
    """``sum a_i^{1/(1-r)} phi_i(I) <= k (sum a_i^{1/(1-r)}) I``; margin is the
    least eigenvalue of the difference.

    ``dims`` gives each map's input dimension (an int applies to all); it is
    only needed for maps that do not fix their own input size.
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    if np.any(a <= 0):
        raise BadParam("weights must be positive")
    w = jensen_weights(a, r)
    k = 1.0 if k is None else float(k)
    if dims is None or isinstance(dims, (int, np.integer)):
        dims = [dims] * len(maps)
    images = []
    for phi, n in zip(maps, dims):
        if isinstance(phi, Congruence):
            n = phi.X.shape[0]
        elif isinstance(phi, VectorState):
            n = phi.x.size
        elif n is None:
            raise BadParam(f"input dimension needed for {phi.kind} map")
        images.append(np.eye(n))
    S = _image_sum(maps, images, w)
    total = float(np.sum(w))
    D = k * total * np.eye(S.shape[0]) - S
    margin = float(eigvalsh_desc(D, tol)[-1])
    return WeightCondition(margin >= -tol.bound(max(k * total, norm2(S))), margin)


def _require_psd(ops, tol, strict=False):
    for i, A in enumerate(ops):
        lo = float(eigvalsh_desc(A, tol)[-1])
        if strict and lo < tol.atol:
            raise DomainError(f"operator {i} is not strictly positive (lambda_min = {lo:.3e})")
        if lo < -tol.tau(A):
            raise DomainError(f"operator {i} is not positive semidefinite (lambda_min = {lo:.3e})")


def jensen_bohr_sides(inst: JensenInstance, tol: Tolerance = DEFAULT_TOL):
    """``(LHS, RHS)`` of the Jensen-Bohr conclusion, with the ``k^{r-1}`` factor."""
    r = inst.r
    w = jensen_weights(inst.weights, r)
    k = 1.0 if inst.k_constant is None else inst.k_constant
    A = _image_sum(inst.maps, inst.operators)
    lhs = func_calculus(A, Power(r), tol)
    powered = [func_calculus(Ai, Power(r), tol) for Ai in inst.operators]
    rhs = (k * np.sum(w)) ** (r - 1) * _image_sum(inst.maps, powered, inst.weights)
    return lhs, rhs


def check_jensen_bohr(inst: JensenInstance, tol: Tolerance = DEFAULT_TOL,
                      enforce: bool = True) -> CheckOutcome:
    """Discrete Jensen-Bohr inequality for ``1 < r <= 2``.

    With ``enforce=False`` the weight condition is only reported, never
    raised, so deliberately invalid instances can still be scored.
    """
    if not 1 < inst.r <= 2:
        raise BadParam(f"r = {inst.r} is outside (1, 2]; use check_spectra_jensen")
    _require_psd(inst.operators, tol)
    cond = check_weight_condition(inst.maps, inst.weights, inst.r, inst.k_constant,
                                  inst.dims, tol)
    if enforce and not cond:
        raise ConditionViolated(f"weight condition fails (margin {cond.margin:.6g})")
    lhs, rhs = jensen_bohr_sides(inst, tol)
    return compare_operators(lhs, rhs, tol, weight_condition=cond.satisfied,
                             weight_margin=cond.margin)


# ===============
# Operator Jensen
# ===============

def _convex_on(f: ScalarFunction, lo: float, hi: float) -> bool:
    if isinstance(f, AbsPower):
        return f.r >= 1
    if isinstance(f, Power):
        if f.r < 0:
            return lo > 0
        if f.r == 1:
            return True
        if f.r > 1:
            return lo >= 0 or (f.is_integer and int(f.r) % 2 == 0)
        return False
    if isinstance(f, Polynomial):
        c = f.coeffs
        return len(c) <= 2 or (len(c) == 3 and c[2] >= 0)
    return False


def _operator_convex(f: ScalarFunction, lo: float) -> bool:
    # t^r is operator convex on [0, inf) exactly for r in [1, 2]; t and t^2 on all of R
    if isinstance(f, (Power, AbsPower)):
        if f.r in (1, 2) and (isinstance(f, Power) or f.r == 2):
            return True
        return 1 <= f.r <= 2 and lo >= 0
    if isinstance(f, Polynomial):
        c = f.coeffs
        return len(c) <= 2 or (len(c) == 3 and c[2] >= 0)
    return False


def check_operator_jensen(maps: Sequence[PositiveLinearMap], operators, f: ScalarFunction,
                          mode: str = "operator_convex",
                          tol: Tolerance = DEFAULT_TOL) -> CheckOutcome:
    """``f(sum psi_i(A_i)) <= sum psi_i(f(A_i))`` for a unital family ``psi_i``.

    ``mode="operator_convex"`` needs ``f`` operator convex on the spectra;
    ``mode="spectra_condition"`` needs ``f`` convex and the open interval
    ``(m_A, M_A)`` disjoint from every ``[m_i, M_i]``.
    """
    ops = [hermitian_part(np.asarray(A, dtype=complex)) for A in operators]
    if len(ops) != len(maps) or not ops:
        raise ShapeMismatch("need one operator per map")
    unit = _image_sum(maps, [np.eye(A.shape[0]) for A in ops])
    defect = norm2(unit - np.eye(unit.shape[0]))
    if defect > tol.bound(1.0):
        raise NotUnital(f"sum of psi_i(I) differs from I by {defect:.3e}")
    bounds = [spectral_bounds(A, tol) for A in ops]
    lo = min(b[0] for b in bounds)
    hi = max(b[1] for b in bounds)
    A = _image_sum(maps, ops)
    mA, MA = spectral_bounds(A, tol)
    details = {"mode": mode, "m_A": mA, "M_A": MA}
    if mode == "operator_convex":
        if not _operator_convex(f, lo):
            raise BadParam(f"{f!r} is not operator convex on the given spectra")
    elif mode == "spectra_condition":
        if not _convex_on(f, lo, hi):
            raise BadParam(f"{f!r} is not convex on [{lo:.6g}, {hi:.6g}]")
        bad = _first_intersection(mA, MA, bounds, tol)
        if bad is not None:
            raise ConditionViolated(
                f"(m_A, M_A) = ({mA:.6g}, {MA:.6g}) meets [m_{bad}, M_{bad}] = "
                f"[{bounds[bad][0]:.6g}, {bounds[bad][1]:.6g}]")
    else:
        raise BadParam(f"unknown mode {mode!r}")
    lhs = func_calculus(A, f, tol)
    rhs = _image_sum(maps, [func_calculus(Ai, f, tol) for Ai in ops])
    return compare_operators(lhs, rhs, tol, **details)


def _first_intersection(mA, MA, intervals, tol: Tolerance):
    """Index of the first closed interval meeting the open interval ``(mA, MA)``."""
    slack = tol.bound(max(abs(mA), abs(MA), 1.0))
    if MA - mA <= slack:
        return None
    for i, (lo, hi) in enumerate(intervals):
        if hi > mA + slack and lo < MA - slack:
            return i
    return None


# ==========================
# Spectra-condition version
# ==========================

@dataclass
class SpectraInstance:
    base: JensenInstance
    bounds: list           # (m_i, M_i)
    A_bounds: tuple        # (m_A, M_A) of sum phi_i(A_i)
    attempts: int = field(default=1, compare=False)

    def scaled_intervals(self):
        """``[a_i^{-1/(1-r)} m_i, a_i^{-1/(1-r)} M_i]`` for each term."""
        s = np.asarray(self.base.weights) ** (-1.0 / (1.0 - self.base.r))
        return [(float(si * m), float(si * M)) for si, (m, M) in zip(s, self.bounds)]


def spectra_instance(base: JensenInstance, tol: Tolerance = DEFAULT_TOL) -> SpectraInstance:
    bounds = [spectral_bounds(A, tol) for A in base.operators]
    A = _image_sum(base.maps, base.operators)
    return SpectraInstance(base, bounds, spectral_bounds(A, tol))


SPECTRA_VARIANTS = ("stated", "corrected")


def spectra_hypotheses(inst: SpectraInstance, tol: Tolerance = DEFAULT_TOL,
                       variant: str = "stated"):
    """Return ``None`` when every hypothesis holds, otherwise a reason string.

    ``variant="stated"`` checks the hypotheses exactly as published: the
    weight condition as an inequality and the intervals
    ``a_i^{-1/(1-r)} [m_i, M_i]``. ``variant="corrected"`` demands what the
    reduction to the unital Jensen inequality actually uses: equality
    ``sum w_i phi_i(I) = W I`` and intervals ``W a_i^{-1/(1-r)} [m_i, M_i]``,
    ``W = sum w_i``. The stated form admits counterexamples (see the README).
    """
    if variant not in SPECTRA_VARIANTS:
        raise BadParam(f"unknown hypothesis variant {variant!r}")
    base = inst.base
    r = base.r
    if not (r < 0 or r > 1):
        return f"r = {r} is not in (-inf, 0) U (1, inf)"
    for i, (m, M) in enumerate(inst.bounds):
        if m < tol.atol:
            return f"operator {i} is not strictly positive (m_{i} = {m:.3e})"
    mA, MA = inst.A_bounds
    if mA < tol.atol:
        return f"sum phi_i(A_i) is not strictly positive (m_A = {mA:.3e})"
    cond = check_weight_condition(base.maps, base.weights, r, None, base.dims, tol)
    if not cond:
        return f"weight condition fails (margin {cond.margin:.6g})"
    intervals = inst.scaled_intervals()
    if variant == "corrected":
        W = float(np.sum(jensen_weights(base.weights, r)))
        S = _image_sum(base.maps, [np.eye(A.shape[0]) for A in base.operators],
                       jensen_weights(base.weights, r))
        gap = norm2(S - W * np.eye(S.shape[0]))
        if gap > tol.bound(W):
            return f"weight condition is not an equality (deviation {gap:.6g})"
        intervals = [(W * lo, W * hi) for lo, hi in intervals]
    bad = _first_intersection(mA, MA, intervals, tol)
    if bad is not None:
        lo, hi = intervals[bad]
        return (f"(m_A, M_A) = ({mA:.6g}, {MA:.6g}) meets scaled interval {bad} "
                f"[{lo:.6g}, {hi:.6g}]")
    return None


def check_spectra_jensen(inst: SpectraInstance, tol: Tolerance = DEFAULT_TOL,
                         enforce: bool = True, variant: str = "stated") -> CheckOutcome:
    """Jensen-Bohr conclusion for ``r < 0`` or ``r > 1`` under the spectra condition."""
    base = inst.base
    r = base.r
    if not (r < 0 or r > 1):
        raise BadParam(f"r = {r} is not in (-inf, 0) U (1, inf)")
    for i, (m, _) in enumerate(inst.bounds):
        if m < tol.atol:
            raise DomainError(f"operator {i} is not strictly positive (m_{i} = {m:.3e})")
    reason = spectra_hypotheses(inst, tol, variant)
    if reason is not None and enforce:
        raise ConditionViolated(reason)
    lhs, rhs = jensen_bohr_sides(replace(base, k_constant=None), tol)
    return compare_operators(lhs, rhs, tol, hypotheses=reason is None, variant=variant,
                             scaled_intervals=[list(iv) for iv in inst.scaled_intervals()],
                             A_bounds=list(inst.A_bounds))


LOW_BAND = (0.5, 1.0)
HIGH_BAND = (4.0, 5.0)


def _band_operator(rng, dim, band):
    from .search import random_unitary
    lam = rng.uniform(band[0], band[1], size=dim)
    U = random_unitary(rng, dim)
    return hermitian_part((U * lam) @ adjoint(U))


def generate_spectra_instance(dim: int, n: int, r: float, seed: int,
                              max_attempts: int = 10000,
                              tol: Tolerance = DEFAULT_TOL, unital: bool = False,
                              variant: str = "stated") -> SpectraInstance:
    """Rejection-sample an instance satisfying every spectra-condition hypothesis.

    Operator spectra come from the bands ``[0.5, 1]`` and ``[4, 5]``, weights
    are log-uniform on ``[0.5, 2]`` and maps are congruences. By default the
    congruences are rescaled so ``sum w_i phi_i(I)`` has top eigenvalue
    ``u W`` with ``u`` uniform on ``[0.5, 1]``, covering the inequality form
    of the weight condition; ``unital=True`` instead normalises them to
    ``sum w_i phi_i(I) = W I`` exactly. Hypotheses are verified with
    :func:`spectra_hypotheses` under ``variant``. Deterministic in ``seed``.
    """
    if not 1 <= dim <= 16 or not 1 <= n <= 6:
        raise BadParam("generator supports dim <= 16 and n <= 6")
    if not (r < 0 or r > 1):
        raise BadParam(f"r = {r} is not in (-inf, 0) U (1, inf)")
    rng = np.random.default_rng(seed)
    for attempt in range(1, max_attempts + 1):
        a = np.exp(rng.uniform(np.log(0.5), np.log(2.0), size=n))
        bands = [LOW_BAND if rng.random() < 0.5 else HIGH_BAND for _ in range(n)]
        ops = [_band_operator(rng, dim, b) for b in bands]
        X = [rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)) for _ in range(n)]
        w = jensen_weights(a, r)
        S = hermitian_part(sum(wi * adjoint(Xi) @ Xi for wi, Xi in zip(w, X)))
        if unital:
            lam, U = np.linalg.eigh(S)
            if lam[0] <= 1e-8 * lam[-1]:
                continue
            R = (U / np.sqrt(lam)) @ adjoint(U) * np.sqrt(np.sum(w))
            maps = [Congruence(Xi @ R) for Xi in X]
        else:
            c = rng.uniform(0.5, 1.0) * np.sum(w) / norm2(S)
            maps = [Congruence(np.sqrt(c) * Xi) for Xi in X]
        inst = spectra_instance(JensenInstance(maps, a, r, ops), tol)
        if spectra_hypotheses(inst, tol, variant) is None:
            inst.attempts = attempt
            return inst
    raise GenerationFailed(f"no valid instance after {max_attempts} attempts")
