"""
Inequality instances: JSON schema, validation and evaluation dispatch.

An instance is a flat JSON object with an ``"id"`` plus the fields listed for
that id in :data:`SCHEMAS`. Complex scalars are ``[re, im]`` pairs and
matrices are ``{"rows": r, "cols": c, "entries": [[re, im], ...]}`` in
row-major order. Positive maps are tagged objects
(``{"kind": "congruence", "X": matrix}`` and so on).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

from . import catalog, jensen, majorization
from .errors import BadParam, BohrError, ParseError, ValidationError
from .matkernel import DEFAULT_TOL, Tolerance, as_matrix, scalar_function_from_dict
from .order import QuadraticCertificateProblem

# field type tags; a trailing "?" marks an optional field
SCHEMAS: Dict[str, Dict[str, str]] = {
    "classical_bohr": {"a": "complex", "b": "complex", "p": "real", "q": "real"},
    "hirzallah11": {"p": "real", "q": "real", "A": "matrix?", "B": "matrix?"},
    "hirzallah_norm": {"p": "real", "q": "real", "gamma": "real",
                       "A": "matrix", "B": "matrix", "X": "matrix"},
    "zhang_identity": {"p": "real", "q": "real", "A": "matrix", "B": "matrix"},
    "parallelogram": {"t": "real", "A": "matrix", "B": "matrix"},
    "thm22": {"t": "real", "direction": "str?", "sign": "str?", "operators": "matrices?"},
    "cor2x2": {"a": "rvec", "b": "rvec", "p": "rvec", "operators": "matrices?"},
    "chansangiam": {"alpha": "rmat", "p": "rvec", "operators": "matrices?"},
    "zhang_convex": {"t": "rvec", "operators": "matrices?"},
    "jensen_squares": {"r": "rvec", "operators": "matrices?"},
    "vasic_keckic_scalar": {"z": "cvec", "a": "rvec", "r": "real"},
    "rassias_pecaric": {"x": "rmat", "p": "rvec", "f": "function"},
    "monotonic_f": {"a": "rvec", "b": "rvec", "tuples": "matrix_tuples", "route": "str?"},
    "jensen_bohr": {"maps": "maps", "a": "rvec", "r": "real", "operators": "matrices",
                    "k": "real?"},
    "operator_jensen": {"maps": "maps", "operators": "matrices", "f": "function",
                        "mode": "str?"},
    "spectra_jensen": {"maps": "maps", "a": "rvec", "r": "real", "operators": "matrices",
                       "variant": "str?"},
    "major_jensen": {"operators": "matrices", "X": "matrices", "alpha": "rvec",
                     "f": "function"},
    "eigen_bohr": {"operators": "matrices", "X": "matrices", "p": "rvec", "r": "real"},
}

CHECK_IDS = tuple(SCHEMAS)
MAJORIZE_IDS = ("major_jensen", "eigen_bohr")


@dataclass
class InequalityInstance:
    id: str
    params: Dict[str, Any] = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, InequalityInstance):
            return NotImplemented
        return self.id == other.id and _same(self.params, other.params)


def _same(x, y) -> bool:
    if isinstance(x, dict) and isinstance(y, dict):
        return x.keys() == y.keys() and all(_same(x[k], y[k]) for k in x)
    if isinstance(x, (list, tuple)) and isinstance(y, (list, tuple)):
        return len(x) == len(y) and all(_same(a, b) for a, b in zip(x, y))
    if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
        x, y = np.asarray(x), np.asarray(y)
        return x.shape == y.shape and bool(np.array_equal(x, y))
    return x == y


# ========
# Encoding
# ========

def _num(x) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("non-finite number")
    return x


def encode_matrix(M) -> dict:
    M = np.asarray(M, dtype=complex)
    return {"rows": int(M.shape[0]), "cols": int(M.shape[1]),
            "entries": [[float(z.real), float(z.imag)] for z in M.reshape(-1)]}


def decode_matrix(d) -> np.ndarray:
    if not isinstance(d, dict) or not {"rows", "cols", "entries"} <= d.keys():
        raise ValidationError("matrix must be an object with rows, cols and entries")
    rows, cols, entries = int(d["rows"]), int(d["cols"]), d["entries"]
    if rows < 1 or cols < 1:
        raise ValidationError("matrix needs rows >= 1 and cols >= 1")
    if len(entries) != rows * cols:
        raise ValidationError(f"matrix has {len(entries)} entries, expected {rows * cols}")
    try:
        vals = [complex(_num(e[0]), _num(e[1])) for e in entries]
    except (TypeError, IndexError, ValueError) as exc:
        raise ValidationError(f"bad complex entry: {exc}") from None
    return as_matrix(np.array(vals).reshape(rows, cols))


def _encode_field(kind: str, value):
    if kind == "real":
        return float(value)
    if kind == "str":
        return str(value)
    if kind == "complex":
        z = complex(value)
        return [z.real, z.imag]
    if kind == "rvec":
        return [float(x) for x in np.asarray(value, dtype=float).reshape(-1)]
    if kind == "cvec":
        return [[float(z.real), float(z.imag)] for z in np.asarray(value, dtype=complex).reshape(-1)]
    if kind == "rmat":
        return [[float(x) for x in row] for row in np.atleast_2d(np.asarray(value, dtype=float))]
    if kind == "matrix":
        return encode_matrix(value)
    if kind == "matrices":
        return [encode_matrix(M) for M in value]
    if kind == "matrix_tuples":
        return [[encode_matrix(M) for M in ops] for ops in value]
    if kind == "maps":
        return [phi.to_dict(encode_matrix) for phi in value]
    if kind == "function":
        return value.to_dict()
    raise AssertionError(kind)


def _decode_field(kind: str, value):
    try:
        if kind == "real":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError("expected a number")
            return _num(value)
        if kind == "str":
            if not isinstance(value, str):
                raise ValidationError("expected a string")
            return value
        if kind == "complex":
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                return complex(_num(value))
            return complex(_num(value[0]), _num(value[1]))
        if kind == "rvec":
            v = np.array([_num(x) for x in value], dtype=float)
            if v.size == 0:
                raise ValidationError("empty vector")
            return v
        if kind == "cvec":
            return np.array([complex(_num(e[0]), _num(e[1])) for e in value])
        if kind == "rmat":
            rows = [[_num(x) for x in row] for row in value]
            if not rows or len({len(r) for r in rows}) != 1:
                raise ValidationError("expected a non-empty rectangular array")
            return np.array(rows, dtype=float)
        if kind == "matrix":
            return decode_matrix(value)
        if kind == "matrices":
            return [decode_matrix(M) for M in value]
        if kind == "matrix_tuples":
            return [[decode_matrix(M) for M in ops] for ops in value]
        if kind == "maps":
            return [jensen.map_from_dict(d, decode_matrix) for d in value]
        if kind == "function":
            return scalar_function_from_dict(value)
    except ValidationError:
        raise
    except (TypeError, ValueError, KeyError, IndexError, BohrError) as exc:
        raise ValidationError(f"expected {kind}: {exc}") from None
    raise AssertionError(kind)


def instance_to_dict(inst: InequalityInstance) -> dict:
    schema = SCHEMAS[inst.id]
    out = {"id": inst.id}
    for name, value in inst.params.items():
        out[name] = _encode_field(schema[name].rstrip("?"), value)
    return out


def instance_from_dict(d: dict) -> InequalityInstance:
    """Parse and validate one instance object."""
    if not isinstance(d, dict) or "id" not in d:
        raise ValidationError("instance must be an object with an 'id'")
    id = d["id"]
    if id not in SCHEMAS:
        raise ValidationError(f"unknown inequality id {id!r}")
    schema = SCHEMAS[id]
    extra = set(d) - set(schema) - {"id"}
    if extra:
        raise ValidationError(f"unexpected fields for {id}: {sorted(extra)}")
    params = {}
    for name, kind in schema.items():
        optional = kind.endswith("?")
        if name not in d:
            if optional:
                continue
            raise ValidationError(f"{id}: missing field {name!r}")
        try:
            params[name] = _decode_field(kind.rstrip("?"), d[name])
        except ValidationError as exc:
            raise ValidationError(f"{id}.{name}: {exc}") from None
    inst = InequalityInstance(id, params)
    validate(inst)
    return inst


def problem_from_dict(d: dict) -> QuadraticCertificateProblem:
    try:
        return QuadraticCertificateProblem.from_dict(d)
    except (KeyError, TypeError, ValueError, BohrError) as exc:
        raise ValidationError(f"certificate problem: {exc}") from None


# ==========
# Validation
# ==========

TEMPLATE_PARAMS = {
    "thm22": ("t", "direction", "sign"),
    "hirzallah11": ("p", "q"),
    "cor2x2": ("a", "b", "p"),
    "chansangiam": ("alpha", "p"),
    "zhang_convex": ("t",),
    "jensen_squares": ("r",),
}


def template_params(inst: InequalityInstance) -> dict:
    return {k: inst.params[k] for k in TEMPLATE_PARAMS[inst.id] if k in inst.params}


def validate(inst: InequalityInstance) -> None:
    """Enforce parameter-domain invariants; raises :class:`ValidationError`."""
    P = inst.params
    try:
        if inst.id in TEMPLATE_PARAMS:
            catalog.compile_template(inst.id, **template_params(inst))
        if "p" in P and "q" in P:
            catalog.check_conjugate(P["p"], P["q"])
            if inst.id in ("hirzallah11", "hirzallah_norm") and not P["q"] >= P["p"] > 1:
                raise BadParam("need q >= p > 1")
        if inst.id == "parallelogram" and abs(P["t"]) < 1e-9:
            raise BadParam("parallelogram law needs t != 0")
        if inst.id == "vasic_keckic_scalar":
            if not P["r"] > 1 or np.any(P["a"] <= 0) or P["a"].size != P["z"].size:
                raise BadParam("need r > 1, a_i > 0 and len(a) == len(z)")
        if inst.id in ("jensen_bohr", "spectra_jensen"):
            jensen.JensenInstance(P["maps"], P["a"], P["r"], P["operators"], P.get("k"))
        if inst.id == "spectra_jensen" and P.get("variant", "stated") not in jensen.SPECTRA_VARIANTS:
            raise BadParam(f"variant must be one of {jensen.SPECTRA_VARIANTS}")
        if inst.id in MAJORIZE_IDS:
            _majorization_instance(inst)
        if inst.id in ("thm22", "hirzallah11") and "operators" in P and len(P["operators"]) != 2:
            raise BadParam("expected two operators")
    except BadParam as exc:
        raise ValidationError(str(exc)) from None
    except BohrError as exc:
        raise ValidationError(str(exc)) from None


# ==========
# Evaluation
# ==========

def _majorization_instance(inst):
    P = inst.params
    if inst.id == "major_jensen":
        return majorization.MajorizationInstance(P["operators"], P["X"], P["alpha"], f=P["f"])
    return majorization.MajorizationInstance(P["operators"], P["X"], P["p"], r=P["r"])


def evaluate(inst: InequalityInstance, tol: Tolerance = DEFAULT_TOL,
             enforce: bool = True) -> catalog.CheckOutcome:
    """Run the evaluator named by ``inst.id`` on its parameters."""
    P = inst.params
    id = inst.id
    if id == "classical_bohr":
        return catalog.check_classical_bohr(P["a"], P["b"], P["p"], P["q"], tol)
    if id in ("zhang_identity", "parallelogram"):
        param = (P["p"], P["q"]) if id == "zhang_identity" else P["t"]
        return catalog.residual_identity(id, P["A"], P["B"], param, tol)
    if id == "hirzallah11" and "A" in P:
        return catalog.check_hirzallah(P["A"], P["B"], P["p"], P["q"], tol=tol)
    if id == "hirzallah_norm":
        return catalog.check_hirzallah(P["A"], P["B"], P["p"], P["q"], P["X"], P["gamma"], tol)
    if id in TEMPLATE_PARAMS:
        ops = P.get("operators")
        if ops is None and id == "hirzallah11":
            raise ValidationError("hirzallah11 check needs operators A and B")
        if ops is None:
            raise ValidationError(f"{id} check needs 'operators'; use certify for the template")
        return catalog.check_template(id, template_params(inst), ops, tol)
    if id == "vasic_keckic_scalar":
        return catalog.check_vasic_keckic_scalar(P["z"], P["a"], P["r"], tol)
    if id == "rassias_pecaric":
        return catalog.check_rassias_pecaric(P["x"], P["p"], P["f"], tol)
    if id == "monotonic_f":
        return catalog.check_monotonic_F(P["a"], P["b"], P["tuples"], tol,
                                         P.get("route", "loewner"))
    if id == "jensen_bohr":
        ji = jensen.JensenInstance(P["maps"], P["a"], P["r"], P["operators"], P.get("k"))
        return jensen.check_jensen_bohr(ji, tol, enforce=enforce)
    if id == "operator_jensen":
        return jensen.check_operator_jensen(P["maps"], P["operators"], P["f"],
                                            P.get("mode", "operator_convex"), tol)
    if id == "spectra_jensen":
        ji = jensen.JensenInstance(P["maps"], P["a"], P["r"], P["operators"])
        return jensen.check_spectra_jensen(jensen.spectra_instance(ji, tol), tol, enforce=enforce,
                                           variant=P.get("variant", "stated"))
    if id == "major_jensen":
        return majorization.check_major_jensen(_majorization_instance(inst), tol)
    if id == "eigen_bohr":
        return majorization.check_eigen_bohr(_majorization_instance(inst), tol)
    raise ValidationError(f"no evaluator for {id!r}")
