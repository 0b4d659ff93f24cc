"""
Seeded instance generation, property fuzzing and counterexample search.

Every trial draws from its own ``numpy.random.Generator`` seeded with
``trial_seed(master, index)``, a SplitMix64 avalanche of
``master ^ (index * 0x9E3779B97F4A7C15)``. Reports therefore depend only on
the configuration, never on execution order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import jensen
from .catalog import CheckOutcome
from .errors import BadParam, ConditionViolated, GenerationFailed, UnknownCheck
from .instances import InequalityInstance, encode_matrix, evaluate, instance_to_dict
from .matkernel import (DEFAULT_TOL, AbsPower, Power, Tolerance, adjoint, eigvalsh_desc,
                        hermitian_part, norm2)
from .order import (QuadraticCertificateProblem, certify, coefficient_matrix,
                    operator_expression, scalar_witness_value)

MASK64 = (1 << 64) - 1
GOLDEN64 = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    z = (x + GOLDEN64) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(master: int, index: int) -> int:
    return splitmix64((master & MASK64) ^ ((index * GOLDEN64) & MASK64))


# =================
# Random matrices
# =================

def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-distributed unitary via QR with the diagonal phases of R removed."""
    Z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def _general(rng, rows, cols, scale=1.0):
    return scale * (rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))) / np.sqrt(2)


def _draw(rng, dim, scale, kind, bounds):
    if kind == "general":
        return _general(rng, dim, dim, scale)
    if kind == "hermitian":
        return hermitian_part(_general(rng, dim, dim, scale))
    if kind == "psd":
        G = _general(rng, dim, dim)
        P = adjoint(G) @ G
        return hermitian_part(scale * P / norm2(P))
    if kind == "unitary":
        return random_unitary(rng, dim)
    if kind == "positive_with_bounds":
        m, M = bounds
        lam = rng.uniform(m, M, size=dim)
        U = random_unitary(rng, dim)
        return hermitian_part((U * lam) @ adjoint(U))
    raise BadParam(f"unknown matrix kind {kind!r}")


def random_matrix(dim: int, seed, scale: float = 1.0, kind: str = "general",
                  bounds: Optional[tuple] = None) -> np.ndarray:
    """Deterministic random matrix of the requested kind.

    ``seed`` is an integer or a ``numpy.random.Generator``. Kinds are
    ``general``, ``hermitian``, ``psd`` (``G^*G`` normalised to norm
    ``scale``), ``unitary`` and ``positive_with_bounds`` (spectrum uniform in
    ``bounds = (m, M)``).
    """
    if dim < 1:
        raise BadParam("dim must be >= 1")
    if not scale > 0:
        raise BadParam("scale must be positive")
    if kind == "positive_with_bounds":
        if bounds is None or not 0 < bounds[0] <= bounds[1]:
            raise BadParam("positive_with_bounds needs 0 < m <= M")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return _draw(rng, dim, scale, kind, bounds)


def _conjugate_pair(rng, lo=1.0, hi=None):
    """Random conjugate exponents; ``p`` in ``(1, hi]`` when ``hi`` is given."""
    if hi is None:
        p = 1.0 + np.exp(rng.uniform(np.log(1e-2), np.log(20.0)))
    else:
        p = 1.0 + rng.uniform(1e-3, hi - 1.0)
    return float(p), float(p / (p - 1.0))


def _log_uniform(rng, lo, hi, size=None):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size=size))


# ========
# Recipes
# ========

Recipe = Callable[[np.random.Generator, int, float, dict], InequalityInstance]
RECIPES: Dict[str, Recipe] = {}


def recipe(name):
    def register(fn):
        RECIPES[name] = fn
        return fn
    return register


@recipe("classical_bohr")
def _r_classical(rng, dim, scale, params):
    p, q = _conjugate_pair(rng)
    a, b = _general(rng, 1, 2, scale)[0]
    return InequalityInstance("classical_bohr", {"a": complex(a), "b": complex(b), "p": p, "q": q})


@recipe("zhang_identity")
def _r_zhang_identity(rng, dim, scale, params):
    p, q = _conjugate_pair(rng)
    return InequalityInstance("zhang_identity", {
        "p": p, "q": q, "A": _general(rng, dim, dim, scale), "B": _general(rng, dim, dim, scale)})


@recipe("parallelogram")
def _r_parallelogram(rng, dim, scale, params):
    t = 0.0
    while abs(t) < 1e-3:
        t = float(rng.uniform(-3.0, 3.0))
    return InequalityInstance("parallelogram", {
        "t": t, "A": _general(rng, dim, dim, scale), "B": _general(rng, dim, dim, scale)})


@recipe("hirzallah11")
def _r_hirzallah(rng, dim, scale, params):
    p, q = _conjugate_pair(rng, hi=2.0)
    return InequalityInstance("hirzallah11", {
        "p": p, "q": q, "A": _general(rng, dim, dim, scale), "B": _general(rng, dim, dim, scale)})


@recipe("hirzallah_norm")
def _r_hirzallah_norm(rng, dim, scale, params):
    p, q = _conjugate_pair(rng, hi=2.0)
    gamma = float(rng.uniform(0.1, 2.0))
    X = gamma * np.eye(dim) + rng.uniform(0, 2) * _draw(rng, dim, 1.0, "psd", None)
    return InequalityInstance("hirzallah_norm", {
        "p": p, "q": q, "gamma": gamma, "A": _general(rng, dim, dim, scale),
        "B": _general(rng, dim, dim, scale), "X": hermitian_part(X)})


def _ops(rng, n, dim, scale):
    return [_general(rng, dim, dim, scale) for _ in range(n)]


@recipe("thm22")
def _r_thm22(rng, dim, scale, params):
    t = params.get("t")
    if t is None:
        t = float(rng.uniform(1e-3, 1.0))
    direction = params.get("direction", "standard")
    sign = params.get("sign") or ("minus_plus" if rng.random() < 0.5 else "plus_minus")
    return InequalityInstance("thm22", {"t": float(t), "direction": direction, "sign": sign,
                                        "operators": _ops(rng, 2, dim, scale)})


@recipe("cor2x2")
def _r_cor2x2(rng, dim, scale, params):
    a, b = rng.normal(size=2), rng.normal(size=2)
    c = a[0] * a[1] + b[0] * b[1]
    d1 = _log_uniform(rng, 0.1, 10.0) * max(abs(c), 1e-3)
    d2 = c * c / d1 * (1.0 + rng.uniform(0.0, 1.0)) + rng.uniform(0.0, 0.1)
    p = np.array([a[0] ** 2 + b[0] ** 2 + d1, a[1] ** 2 + b[1] ** 2 + d2])
    return InequalityInstance("cor2x2", {"a": a, "b": b, "p": p,
                                         "operators": _ops(rng, 2, dim, scale)})


@recipe("chansangiam")
def _r_chansangiam(rng, dim, scale, params):
    n = int(params.get("n", rng.integers(2, 6)))
    m = int(params.get("m", rng.integers(1, 4)))
    alpha = rng.normal(size=(n, m))
    floor = float(np.linalg.eigvalsh(alpha @ alpha.T)[0])
    p = floor * rng.uniform(-1.0, 1.0, size=n)
    return InequalityInstance("chansangiam", {"alpha": alpha, "p": p,
                                              "operators": _ops(rng, n, dim, scale)})


@recipe("zhang_convex")
def _r_zhang_convex(rng, dim, scale, params):
    n = int(params.get("n", rng.integers(2, 7)))
    t = rng.dirichlet(np.ones(n))
    t = t / t.sum()
    return InequalityInstance("zhang_convex", {"t": t, "operators": _ops(rng, n, dim, scale)})


@recipe("jensen_squares")
def _r_jensen_squares(rng, dim, scale, params):
    n = int(params.get("n", rng.integers(2, 7)))
    x = rng.dirichlet(np.ones(n))
    r = 1.0 / (x / x.sum())
    return InequalityInstance("jensen_squares", {"r": r, "operators": _ops(rng, n, dim, scale)})


@recipe("vasic_keckic_scalar")
def _r_vasic_keckic(rng, dim, scale, params):
    n = int(params.get("n", rng.integers(1, 7)))
    r = float(params.get("r", rng.choice([1.5, 2.0, 3.0])))
    z = _general(rng, 1, n, scale)[0]
    a = _log_uniform(rng, 0.1, 10.0, size=n)
    return InequalityInstance("vasic_keckic_scalar", {"z": z, "a": a, "r": r})


@recipe("rassias_pecaric")
def _r_rassias_pecaric(rng, dim, scale, params):
    n = int(params.get("n", rng.integers(1, 6)))
    p = np.empty(n)
    p[0] = rng.uniform(1.0, 3.0)
    p[1:] = -rng.uniform(0.0, 1.0, size=n - 1) * p[0] / n
    r = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
    f = Power(r) if rng.random() < 0.5 else AbsPower(r)
    return InequalityInstance("rassias_pecaric", {
        "x": scale * rng.normal(size=(n, dim)), "p": p, "f": f})


@recipe("monotonic_f")
def _r_monotonic(rng, dim, scale, params):
    route = params.get("route", "loewner")
    n = 3 if route == "3d" else int(params.get("n", rng.integers(2, 5)))
    b = rng.normal(size=n)
    a = b * rng.uniform(-1.0, 1.0)
    tuples = [_ops(rng, n, dim, scale) for _ in range(3)]
    return InequalityInstance("monotonic_f", {"a": a, "b": b, "tuples": tuples, "route": route})


def _map_family(rng, dim, n):
    kind = params_kind = rng.choice(["congruence", "scale", "vector_state", "pinch", "mixed"])
    if kind == "congruence":
        m = int(rng.integers(1, dim + 1))
        return [jensen.Congruence(_general(rng, dim, m)) for _ in range(n)]
    if kind == "scale":
        return [jensen.Scale(float(rng.uniform(0.1, 1.0))) for _ in range(n)]
    if kind == "vector_state":
        return [jensen.VectorState(_general(rng, 1, dim)[0]) for _ in range(n)]
    if kind == "pinch":
        k = int(rng.integers(1, dim + 1))
        return [jensen.Pinch(tuple(sorted(rng.choice(dim, size=k, replace=False))))
                for _ in range(n)]
    del params_kind
    return [jensen.Congruence(_general(rng, dim, dim)) if rng.random() < 0.5
            else jensen.Scale(float(rng.uniform(0.1, 1.0))) for _ in range(n)]


def _normalize_family(rng, maps, w, dim, factor):
    """Rescale ``maps`` so that ``sum w_i phi_i(I) <= factor * sum(w) I``."""
    S = sum(wi * jensen.apply_map(phi, np.eye(dim)) for wi, phi in zip(w, maps))
    top = norm2(S)
    target = factor * float(np.sum(w))
    if any(isinstance(phi, jensen.Pinch) for phi in maps):
        # pinch families satisfy the condition with equality; scale via the factor only
        if factor != 1.0:
            return [jensen.Congruence(np.sqrt(factor) * np.eye(dim)[:, list(phi.indices)])
                    for phi in maps]
        return maps
    u = 1.0 if rng.random() < 0.5 else float(rng.uniform(0.5, 1.0))
    c = u * target / top
    return [jensen.scaled_map(phi, c) for phi in maps]


@recipe("jensen_bohr")
def _r_jensen_bohr(rng, dim, scale, params):
    n = int(params.get("n", rng.integers(1, 5)))
    r = params.get("r")
    r = float(rng.uniform(1.0 + 1e-3, 2.0)) if r is None else float(r)
    a = _log_uniform(rng, 0.2, 5.0, size=n)
    w = jensen.jensen_weights(a, r)
    k = params.get("k")
    inflate = float(params.get("inflate", 1.0))
    maps = _normalize_family(rng, _map_family(rng, dim, n), w, dim,
                             (1.0 if k is None else float(k)) * inflate)
    ops = [_draw(rng, dim, scale * _log_uniform(rng, 0.2, 5.0), "psd", None) for _ in range(n)]
    out = {"maps": maps, "a": a, "r": r, "operators": ops}
    if k is not None:
        out["k"] = float(k)
    return InequalityInstance("jensen_bohr", out)


@recipe("operator_jensen")
def _r_operator_jensen(rng, dim, scale, params):
    n = int(params.get("n", rng.integers(1, 5)))
    if rng.random() < 0.5:
        V = np.linalg.qr(_general(rng, n * dim, dim))[0]
        maps = [jensen.Congruence(V[i * dim:(i + 1) * dim, :]) for i in range(n)]
    else:
        w = rng.dirichlet(np.ones(n))
        maps = [jensen.Scale(float(x)) for x in w / w.sum()]
    r = float(params.get("r", rng.uniform(1.0, 2.0)))
    ops = [_draw(rng, dim, scale, "psd", None) for _ in range(n)]
    return InequalityInstance("operator_jensen", {
        "maps": maps, "operators": ops, "f": Power(r), "mode": "operator_convex"})


@recipe("spectra_jensen")
def _r_spectra_jensen(rng, dim, scale, params):
    # a single congruence rarely separates spectra, so default to 2-3 terms
    n = int(params.get("n", rng.integers(2, 4)))
    r = float(params.get("r", rng.choice([3.0, -1.0])))
    variant = params.get("variant", "stated")
    seed = int(rng.integers(0, 2 ** 63))
    inst = jensen.generate_spectra_instance(min(dim, 16), n, r, seed,
                                            int(params.get("max_attempts", 10000)),
                                            unital=bool(params.get("unital", False)),
                                            variant=variant)
    b = inst.base
    out = {"maps": b.maps, "a": b.weights, "r": b.r, "operators": b.operators}
    if variant != "stated":
        out["variant"] = variant
    return InequalityInstance("spectra_jensen", out)


def _contract(rng, X, weights, upper):
    S = sum(wi * adjoint(Xi) @ Xi for wi, Xi in zip(weights, X))
    c = np.sqrt(upper * float(rng.uniform(0.5, 1.0)) / norm2(S))
    return [c * Xi for Xi in X]


@recipe("major_jensen")
def _r_major_jensen(rng, dim, scale, params):
    n = int(params.get("n", rng.integers(1, 4)))
    alpha = _log_uniform(rng, 0.2, 5.0, size=n)
    X = _contract(rng, _ops(rng, n, dim, 1.0), alpha, 1.0)
    ops = [_draw(rng, dim, scale, "hermitian", None) for _ in range(n)]
    f = AbsPower(float(params.get("f_r", rng.choice([1.0, 2.0, 3.0]))))
    return InequalityInstance("major_jensen", {"operators": ops, "X": X, "alpha": alpha, "f": f})


@recipe("eigen_bohr")
def _r_eigen_bohr(rng, dim, scale, params):
    n = int(params.get("n", rng.integers(1, 4)))
    r = float(params.get("r", rng.choice([1.5, 2.0, 3.0])))
    p = _log_uniform(rng, 0.2, 5.0, size=n)
    w = p ** (1.0 / (1.0 - r))
    X = _contract(rng, _ops(rng, n, dim, 1.0), w, float(np.sum(w)))
    ops = [_draw(rng, dim, scale, "hermitian", None) for _ in range(n)]
    return InequalityInstance("eigen_bohr", {"operators": ops, "X": X, "p": p, "r": r})


# ======
# Fuzzing
# ======

@dataclass(frozen=True)
class FuzzConfig:
    dim: int = 4
    trials: int = 100
    seed: int = 0
    scale: float = 1.0

    def __post_init__(self):
        if not 1 <= self.dim <= 16:
            raise BadParam("dim must be in 1..16")
        if self.trials < 1:
            raise BadParam("trials must be >= 1")
        if not self.scale > 0:
            raise BadParam("scale must be positive")
        if not 0 <= self.seed <= MASK64:
            raise BadParam("seed must be an unsigned 64-bit integer")

    def to_dict(self):
        return {"dim": self.dim, "trials": self.trials, "seed": self.seed, "scale": self.scale}


@dataclass
class Violation:
    instance: dict
    margin: float
    trial_index: int

    def to_dict(self):
        return {"instance": self.instance, "margin": float(self.margin),
                "trial_index": self.trial_index}


@dataclass
class FuzzReport:
    check: str
    config: FuzzConfig
    params: dict
    trials: int = 0
    worst_margin: float = float("inf")
    violations: List[Violation] = field(default_factory=list)
    generator_failures: int = 0
    hypothesis_failures: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self):
        return {
            "check": self.check, "config": self.config.to_dict(), "params": self.params,
            "trials": self.trials,
            "worst_margin": None if self.trials == self.generator_failures else float(self.worst_margin),
            "violation_count": len(self.violations),
            "violations": [v.to_dict() for v in self.violations],
            "generator_failures": self.generator_failures,
            "hypothesis_failures": self.hypothesis_failures,
        }


def fuzz(check: str, cfg: FuzzConfig, params: Optional[dict] = None,
         tol: Tolerance = DEFAULT_TOL) -> FuzzReport:
    """Run ``cfg.trials`` generated instances of ``check``.

    ``params`` tunes the recipe (e.g. ``{"t": 2.0}`` for ``thm22``); the key
    ``"enforce": False`` evaluates conclusions even when a hypothesis fails.
    """
    if check not in RECIPES:
        raise UnknownCheck(f"unknown check {check!r}; known: {', '.join(sorted(RECIPES))}")
    params = dict(params or {})
    enforce = bool(params.get("enforce", True))
    make = RECIPES[check]
    report = FuzzReport(check, cfg, params)
    for i in range(cfg.trials):
        rng = np.random.default_rng(trial_seed(cfg.seed, i))
        report.trials += 1
        try:
            inst = make(rng, cfg.dim, cfg.scale, params)
            out: CheckOutcome = evaluate(inst, tol, enforce=enforce)
        except (ConditionViolated, GenerationFailed):
            report.generator_failures += 1
            continue
        if out.hypothesis_failed:
            report.hypothesis_failures += 1
            continue
        report.worst_margin = min(report.worst_margin, out.margin)
        if not out.holds:
            report.violations.append(Violation(instance_to_dict(inst), out.margin, i))
    return report


# ============
# Falsification
# ============

def _normalized_margin(p, ops):
    E = operator_expression(p, ops)
    mass = sum(float(np.vdot(A, A).real) for A in ops)
    return float(eigvalsh_desc(E)[-1]) / mass


def falsify(p: QuadraticCertificateProblem, dim: int = 2, iters: int = 500, seed: int = 0,
            tol: Tolerance = DEFAULT_TOL) -> Optional[Violation]:
    """Search for an operator tuple violating ``sum d_i|A_i|^2 >= sum s_k|sum u_ki A_i|^2``.

    Margins are normalised by ``sum ||A_i||_F^2``. A refuted certificate
    always yields the scalar witness ``A_i = v_i`` (margin ``lambda_min``);
    hill climbing over ``dim x dim`` tuples runs in every case and the more
    negative result is returned.
    """
    M = coefficient_matrix(p)
    threshold = -tol.tau(M)
    result = certify(p, tol)
    best = None
    if not result.certified:
        v = result.witness
        best = Violation({"problem": p.to_dict(),
                          "operators": [encode_matrix(np.array([[x]])) for x in v]},
                         scalar_witness_value(p, v), 0)

    rng = np.random.default_rng(seed)
    ops = _ops(rng, p.n, dim, 1.0)
    value = _normalized_margin(p, ops)
    step, fails = 0.5, 0
    for it in range(1, iters + 1):
        cand = [A + step * _general(rng, dim, dim) for A in ops]
        cval = _normalized_margin(p, cand)
        if cval < value:
            ops, value, fails = cand, cval, 0
        else:
            fails += 1
            if fails >= 20:
                step, fails = step / 2, 0
                if step < 1e-6:
                    break
    if value < threshold and (best is None or value < best.margin):
        mass = np.sqrt(sum(float(np.vdot(A, A).real) for A in ops))
        best = Violation({"problem": p.to_dict(),
                          "operators": [encode_matrix(A / mass) for A in ops]}, value, it)
    if best is not None and best.margin >= threshold:
        return None
    return best
