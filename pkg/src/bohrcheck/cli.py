"""
Command-line front end.

    bohrcheck certify  --instance PATH
    bohrcheck check    --inequality ID --instance PATH
    bohrcheck fuzz     --inequality ID [--dim N] [--trials N] [--seed U64] [--instance PARAMS]
    bohrcheck falsify  --instance PATH [--dim N] [--iters N] [--seed U64]
    bohrcheck majorize --instance PATH

Exit codes: 0 certified / holds / no violation, 2 refuted / violation found,
1 usage or input error. Reports are canonical JSON (sorted keys, shortest
round-trip floats) written to ``--out`` or standard output.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .catalog import compile_template
from .errors import BohrError, ParseError, ValidationError
from .instances import (MAJORIZE_IDS, TEMPLATE_PARAMS, InequalityInstance, evaluate,
                        instance_from_dict, problem_from_dict, template_params)
from .matkernel import Tolerance
from .order import QuadraticCertificateProblem, certify
from .search import MASK64, FuzzConfig, falsify, fuzz

EXIT_OK, EXIT_ERROR, EXIT_FOUND = 0, 1, 2


# =========
# Loading
# =========

def _parse_json(data: bytes, path: str):
    try:
        return json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 ({exc.reason} at byte {exc.start})") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None


def parse_instance(obj):
    """Turn a decoded JSON object into an instance or a certificate problem."""
    if isinstance(obj, dict) and obj.get("type") == "certificate":
        return problem_from_dict(obj)
    return instance_from_dict(obj)


def load_instance(path: str):
    """Load and validate ``path``; returns an ``InequalityInstance`` or a
    ``QuadraticCertificateProblem``."""
    return parse_instance(_parse_json(_read(path), path))


# ========
# Reports
# ========

def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def dumps(report: dict, pretty: bool = False) -> str:
    """Canonical serialization. Python's float ``repr`` is the shortest
    decimal that round-trips, so identical reports give identical bytes."""
    if pretty:
        text = json.dumps(_plain(report), sort_keys=True, indent=2, allow_nan=False)
    else:
        text = json.dumps(_plain(report), sort_keys=True, separators=(",", ":"), allow_nan=False)
    return text + "\n"


def write_report(report: dict, out: Optional[str] = None, pretty: bool = False) -> int:
    data = dumps(report, pretty).encode("utf-8")
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(out, "wb") as fh:
            fh.write(data)
    return len(data)


# ========
# Commands
# ========

def _as_problem(obj) -> QuadraticCertificateProblem:
    if isinstance(obj, QuadraticCertificateProblem):
        return obj
    if obj.id not in TEMPLATE_PARAMS:
        raise ValidationError(f"{obj.id!r} has no certificate template; "
                              f"templates: {', '.join(TEMPLATE_PARAMS)}")
    return compile_template(obj.id, **template_params(obj))


def _require_instance(obj, ids=None) -> InequalityInstance:
    if not isinstance(obj, InequalityInstance):
        raise ValidationError("expected an inequality instance, got a certificate problem")
    if ids is not None and obj.id not in ids:
        raise ValidationError(f"instance id {obj.id!r} not accepted here; expected one of {list(ids)}")
    return obj


def cmd_certify(args, tol, obj):
    res = certify(_as_problem(obj), tol)
    return res.to_dict(), EXIT_OK if res.certified else EXIT_FOUND


def _outcome(inst, tol):
    out = evaluate(inst, tol)
    if out.hypothesis_failed:
        raise ValidationError(f"{inst.id}: hypotheses of the check do not hold")
    return out.to_dict(), EXIT_OK if out.holds else EXIT_FOUND


def cmd_check(args, tol, obj):
    inst = _require_instance(obj)
    if args.inequality is not None and inst.id != args.inequality:
        raise ValidationError(f"--inequality {args.inequality} does not match instance id {inst.id}")
    return _outcome(inst, tol)


def cmd_majorize(args, tol, obj):
    return _outcome(_require_instance(obj, MAJORIZE_IDS), tol)


def cmd_fuzz(args, tol, obj):
    cfg = FuzzConfig(dim=args.dim, trials=args.trials, seed=args.seed)
    params = obj if obj is not None else {}
    if not isinstance(params, dict):
        raise ValidationError("fuzz parameters must be a JSON object")
    rep = fuzz(args.inequality, cfg, params, tol)
    return rep.to_dict(), EXIT_FOUND if rep.violations else EXIT_OK


def cmd_falsify(args, tol, obj):
    v = falsify(_as_problem(obj), dim=args.dim, iters=args.iters, seed=args.seed, tol=tol)
    if v is None:
        return {"violation": None}, EXIT_OK
    return {"violation": v.to_dict()}, EXIT_FOUND


COMMANDS = {"certify": cmd_certify, "check": cmd_check, "fuzz": cmd_fuzz,
            "falsify": cmd_falsify, "majorize": cmd_majorize}


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v <= MASK64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bohrcheck",
                                     description="Certify, check and fuzz operator Bohr inequalities.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--instance", metavar="PATH", required=name not in ("fuzz",),
                       help="instance JSON (for fuzz: optional recipe parameters)")
        p.add_argument("--inequality", metavar="ID", required=name == "fuzz")
        p.add_argument("--dim", type=int, default=2 if name == "falsify" else 4)
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--iters", type=int, default=500)
        p.add_argument("--seed", type=_u64, default=0)
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--pretty", action="store_true")
    return parser


def _echo(args) -> dict:
    keys = {"certify": ["instance"], "check": ["inequality", "instance"],
            "fuzz": ["inequality", "dim", "trials", "seed", "instance"],
            "falsify": ["instance", "dim", "iters", "seed"], "majorize": ["instance"]}
    return {"name": args.command, **{k: getattr(args, k) for k in keys[args.command]}}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        tol = Tolerance.from_env()
        digest, obj = None, None
        if args.instance is not None:
            data = _read(args.instance)
            digest = hashlib.sha256(data).hexdigest()
            raw = _parse_json(data, args.instance)
            obj = raw if args.command == "fuzz" else parse_instance(raw)
        outcome, code = COMMANDS[args.command](args, tol, obj)
        report = {"command": _echo(args), "outcome": outcome, "tolerance": tol.to_dict(),
                  "version": __version__, "input_digest": digest}
        write_report(report, args.out, args.pretty)
        return code
    except (BohrError, OSError, ValueError) as exc:
        print(f"bohrcheck: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
