"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line."""
import json
import time

import numpy as np
import pytest

from bohrcheck import jensen
from bohrcheck.catalog import (check_vasic_keckic_scalar, compile_template, residual_identity)
from bohrcheck.cli import run
from bohrcheck.errors import GenerationFailed
from bohrcheck.instances import evaluate
from bohrcheck.majorization import MajorizationInstance, check_eigen_bohr
from bohrcheck.order import (QuadraticCertificateProblem, certify, coefficient_matrix,
                             operator_expression, principal_minors_nonneg, psd_check,
                             scalar_witness_value)
from bohrcheck.search import RECIPES, FuzzConfig, falsify, fuzz, trial_seed

from conftest import rand_complex


def _norm(M):
    return np.linalg.norm(M, 2)


# 1 --------------------------------------------------------------------------

def test_c01_identity_suites(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    count = 0
    for check in ("zhang_identity", "parallelogram"):
        for i in range(1000):
            dim = 1 + i % 8
            rng = np.random.default_rng(trial_seed(101, i))
            inst = RECIPES[check](rng, dim, 1.0, {})
            out = evaluate(inst)
            worst = max(worst, out.residual / out.details["scale"])
            count += 1
    elapsed = time.perf_counter() - t0
    verdict(1, worst <= 1e-9 and elapsed < 20,
            f"{count} identity draws, worst residual/scale {worst:.2e} (<= 1e-9), {elapsed:.1f}s (< 20s)")


# 2 --------------------------------------------------------------------------

def _certified_problem(rng):
    n = int(rng.integers(1, 7))
    kind = rng.integers(0, 4)
    if kind == 0:
        return compile_template("thm22", t=float(rng.uniform(0.01, 1.0)),
                                sign=str(rng.choice(["minus_plus", "plus_minus"])))
    if kind == 1:
        x = rng.dirichlet(np.ones(n))
        return compile_template("jensen_squares", r=1 / (x / x.sum()))
    terms = tuple((int(rng.choice([-1, 1])), rng.normal(size=n)) for _ in range(rng.integers(1, 4)))
    C = sum(s * np.outer(u, u) for s, u in terms)
    if kind == 2:
        # Gershgorin: diagonal dominance makes D - C PSD
        d = np.abs(C).sum(axis=1) + rng.uniform(0, 0.5, size=n)
    else:
        # tight: shift by the least eigenvalue so D - C is singular PSD
        d = np.full(n, np.linalg.eigvalsh(-C)[0] * -1.0)
    return QuadraticCertificateProblem(d, terms)


def test_c02_certificate_soundness(verdict):
    rng = np.random.default_rng(202)
    problems = 0
    worst = np.inf
    while problems < 500:
        p = _certified_problem(rng)
        if not certify(p).certified:
            continue
        problems += 1
        for _ in range(50):
            dim = int(rng.integers(1, 7))
            ops = [rand_complex(rng, dim) for _ in range(p.n)]
            lhs, rhs = operator_expression(p, ops, split=True)
            scale = max(_norm(lhs), _norm(rhs), 1.0)
            worst = min(worst, np.linalg.eigvalsh(rhs - lhs)[0] / scale)
    verdict(2, worst >= -1e-8,
            f"{problems} certified problems x 50 tuples, worst lambda_min/scale {worst:.2e} (>= -1e-8)")


# 3 --------------------------------------------------------------------------

def test_c03_constructive_completeness(verdict):
    rng = np.random.default_rng(303)
    problems = 0
    worst_gap = 0.0
    falsified = 0
    while problems < 500:
        n = int(rng.integers(1, 7))
        terms = tuple((int(rng.choice([-1, 1])), rng.normal(size=n)) for _ in range(rng.integers(1, 4)))
        p = QuadraticCertificateProblem(rng.normal(size=n), terms)
        res = certify(p)
        if res.certified:
            continue
        problems += 1
        M = coefficient_matrix(p)
        worst_gap = max(worst_gap, abs(scalar_witness_value(p, res.witness) - res.lambda_min) / _norm(M))
        falsified += falsify(p, dim=2, iters=20, seed=problems) is not None
    verdict(3, worst_gap <= 1e-9 and falsified == problems,
            f"{problems} refuted problems, worst |witness - lambda_min|/||M|| {worst_gap:.2e}, "
            f"falsify found {falsified}/{problems}")


# 4 --------------------------------------------------------------------------

def test_c04_thm22_dichotomy(verdict):
    good = [round(0.1 * k, 10) for k in range(1, 10)] + [1.0]
    bad = [1.5, 2.0, 10.0, -0.5, -1.0]
    failures = []
    for sign in ("minus_plus", "plus_minus"):
        for t in good:
            if not certify(compile_template("thm22", t=t, sign=sign)).certified:
                failures.append(("standard", sign, t))
            # the reverse order holds exactly where the standard one fails, and at
            # the equality point t = 1 both hold
            rev = certify(compile_template("thm22", t=t, sign=sign, direction="reverse")).certified
            if rev != (t == 1.0):
                failures.append(("reverse", sign, t))
        for t in bad:
            if certify(compile_template("thm22", t=t, sign=sign)).certified:
                failures.append(("standard", sign, t))
            if not certify(compile_template("thm22", t=t, sign=sign, direction="reverse")).certified:
                failures.append(("reverse", sign, t))
    verdict(4, not failures, f"30 grid points x 2 directions, mismatches: {failures or 'none'}")


# 5 --------------------------------------------------------------------------

def test_c05_hirzallah(verdict):
    viol = fails = 0
    for dim in range(1, 9):
        rep = fuzz("hirzallah11", FuzzConfig(dim=dim, trials=125, seed=500 + dim))
        viol += len(rep.violations)
        fails += rep.generator_failures
    norm_viol = 0
    for dim in range(1, 9):
        rep = fuzz("hirzallah_norm", FuzzConfig(dim=dim, trials=25, seed=550 + dim))
        norm_viol += len(rep.violations)
        fails += rep.generator_failures
    verdict(5, viol == 0 and norm_viol == 0 and fails == 0,
            f"hirzallah11: {viol} violations in 1000 trials; norm version (all Ky Fan k): "
            f"{norm_viol} violations in 200 trials")


# 6 --------------------------------------------------------------------------

def test_c06_weight_templates(verdict):
    rng = np.random.default_rng(606)
    certified = disagreements = total = 0
    for template in ("jensen_squares", "zhang_convex"):
        for i in range(100):
            n = int(rng.integers(2, 7))
            x = rng.dirichlet(np.ones(n))
            x = x / x.sum()
            p = (compile_template("jensen_squares", r=1 / x) if template == "jensen_squares"
                 else compile_template("zhang_convex", t=x))
            total += 1
            certified += certify(p).certified
            M = coefficient_matrix(p)
            disagreements += principal_minors_nonneg(M) != psd_check(M).psd
    for n in (7, 8):
        for _ in range(10):
            x = rng.dirichlet(np.ones(n))
            M = coefficient_matrix(compile_template("jensen_squares", r=1 / (x / x.sum())))
            disagreements += principal_minors_nonneg(M) != psd_check(M).psd
    verdict(6, certified == total and disagreements == 0,
            f"{certified}/{total} certified; minor vs eigenvalue route disagreements: {disagreements}")


# 7 --------------------------------------------------------------------------

def test_c07_jensen_bohr(verdict):
    viol = fails = 0
    worst = np.inf
    for r in (1.1, 1.5, 2.0):
        for dim in range(1, 9):
            rep = fuzz("jensen_bohr", FuzzConfig(dim=dim, trials=25, seed=700 + dim), {"r": r})
            viol += len(rep.violations)
            fails += rep.generator_failures
            worst = min(worst, rep.worst_margin)
    # k-constant pairs: same instance, maps scaled by k and k carried in the bound
    ratio_err = 0.0
    paired_viol = 0
    for i in range(50):
        rng = np.random.default_rng(trial_seed(777, i))
        k = float(np.exp(rng.uniform(np.log(0.5), np.log(4.0))))
        inst = RECIPES["jensen_bohr"](rng, 1 + i % 6, 1.0, {"r": 1.5})
        P = inst.params
        base = jensen.JensenInstance(P["maps"], P["a"], P["r"], P["operators"])
        lifted = jensen.JensenInstance([jensen.scaled_map(phi, k) if not isinstance(phi, jensen.Pinch)
                                        else jensen.Congruence(np.sqrt(k) * np.eye(P["operators"][0].shape[0])
                                                               [:, list(phi.indices)])
                                        for phi in P["maps"]], P["a"], P["r"], P["operators"], k)
        o1, ok = jensen.check_jensen_bohr(base), jensen.check_jensen_bohr(lifted)
        paired_viol += (not o1.holds) + (not ok.holds)
        _, rhs_k = jensen.jensen_bohr_sides(lifted)
        _, rhs_plain = jensen.jensen_bohr_sides(jensen.JensenInstance(lifted.maps, P["a"], P["r"],
                                                                      P["operators"]))
        ratio_err = max(ratio_err, _norm(rhs_k - k ** (P["r"] - 1) * rhs_plain) / max(_norm(rhs_k), 1e-300))
    verdict(7, viol == 0 and fails == 0 and paired_viol == 0 and ratio_err <= 1e-12,
            f"{viol} violations in 600 instances (worst margin {worst:.2e}); k-variant: "
            f"{paired_viol} violations in 50 pairs, max relative deviation from k^(r-1) {ratio_err:.1e}")


# 8 --------------------------------------------------------------------------

def _spectra_run(r, **kw):
    viol = attempts = 0
    worst = 0.0
    for i in range(50):
        try:
            inst = jensen.generate_spectra_instance(1 + i % 4, 2 + i % 2, r, trial_seed(800, i), **kw)
        except GenerationFailed:
            attempts += 10000
            continue
        attempts += inst.attempts
        out = jensen.check_spectra_jensen(inst, variant=kw.get("variant", "stated"))
        if not out.holds:
            viol += 1
            worst = min(worst, out.margin)
    return viol, 50 / attempts, worst


def test_c08_spectra_jensen(verdict, capsys):
    lines = []
    ok = True
    for r in (3.0, -1.0):
        viol, rate, worst = _spectra_run(r)
        ok &= viol == 0
        lines.append(f"r={r:g}: {viol}/50 violations (worst {worst:.3g}), acceptance rate {rate:.3f}")
    # informational: unital maps with corrected intervals (not the stated criterion)
    with capsys.disabled():
        for r in (3.0, -1.0):
            viol, rate, _ = _spectra_run(r, unital=True, variant="corrected")
            print(f"\n[INFO] criterion 8, corrected hypotheses (unital maps, intervals scaled by "
                  f"sum a_i^(1/(1-r))): r={r:g}: {viol}/50 violations, acceptance rate {rate:.3f}")
    verdict(8, ok, "; ".join(lines))


# 9 --------------------------------------------------------------------------

def test_c09_eigen_bohr(verdict):
    viol = fails = 0
    for r in (1.5, 2.0, 3.0):
        for dim in range(1, 7):
            rep = fuzz("eigen_bohr", FuzzConfig(dim=dim, trials=34 if dim <= 2 else 33, seed=900 + dim),
                       {"r": r})
            viol += len(rep.violations)
            fails += rep.generator_failures
    rng = np.random.default_rng(909)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        r = float(rng.choice([1.5, 2.0, 3.0]))
        p = np.exp(rng.uniform(np.log(0.2), np.log(5.0), size=n))
        z = rng.normal(size=n) * np.exp(rng.uniform(-2, 2))
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=n))
        inst = MajorizationInstance([np.array([[x]]) for x in z], [np.array([[u]]) for u in phases],
                                    p, r=r)
        a = check_eigen_bohr(inst).margin
        b = check_vasic_keckic_scalar(z, p, r).margin
        worst = max(worst, abs(a - b) / max(1.0, abs(b)))
    verdict(9, viol == 0 and fails == 0 and worst <= 1e-10,
            f"{viol} violations in 600 instances; scalar vs Vasic-Keckic max relative gap {worst:.1e} (<= 1e-10)")


# 10 -------------------------------------------------------------------------

def holder_bound(z, a, r):
    """Independent oracle: Hoelder with exponents p = r/(r-1), q = r applied to
    u_i = a_i^{-1/q}, w_i = z_i / u_i, raised to the power r."""
    p, q = r / (r - 1), r
    u = a ** (-1 / q)
    w = z / u
    return np.sum(np.abs(u) ** p) ** (r / p) * np.sum(np.abs(w) ** q) ** (r / q)


def test_c10_vasic_keckic_vs_holder(verdict):
    rng = np.random.default_rng(1010)
    disagree = 0
    worst = 0.0
    for i in range(10000):
        r = (1.5, 2.0, 3.0)[i % 3]
        n = int(rng.integers(1, 9))
        z = rng.normal(size=n) + 1j * rng.normal(size=n)
        a = np.exp(rng.uniform(-3, 3, size=n))
        out = check_vasic_keckic_scalar(z, a, r)
        lhs = abs(z.sum()) ** r
        oracle = holder_bound(z, a, r)
        rel = abs((lhs + out.margin) - oracle) / max(1.0, oracle)
        worst = max(worst, rel)
        disagree += (rel > 1e-12) or (out.holds != (oracle - lhs >= -1e-10 * max(1.0, oracle)))
    verdict(10, disagree == 0, f"10000 tuples, {disagree} disagreements, max relative RHS gap {worst:.1e}")


# 11 -------------------------------------------------------------------------

def test_c11_byte_identical_reports(verdict, tmp_path):
    inst = tmp_path / "thm22.json"
    inst.write_text(json.dumps({"id": "thm22", "t": 2, "direction": "standard", "sign": "minus_plus"}))
    commands = [["fuzz", "--inequality", "jensen_bohr", "--trials", "20", "--seed", "11"],
                ["fuzz", "--inequality", "eigen_bohr", "--trials", "20", "--seed", "12"],
                ["certify", "--instance", str(inst)],
                ["falsify", "--instance", str(inst), "--iters", "100", "--seed", "3"]]
    same = 0
    for j, cmd in enumerate(commands):
        blobs = []
        for k in range(2):
            out = tmp_path / f"r{j}_{k}.json"
            run(cmd + ["--out", str(out)])
            blobs.append(out.read_bytes())
        same += blobs[0] == blobs[1]
    verdict(11, same == len(commands), f"{same}/{len(commands)} commands byte-identical across two runs")


# 12 -------------------------------------------------------------------------

@pytest.mark.run_last
def test_c12_suite_runtime(verdict, session_elapsed):
    elapsed = session_elapsed()
    verdict(12, elapsed <= 120, f"session runtime up to this point {elapsed:.1f}s (<= 120s)")
