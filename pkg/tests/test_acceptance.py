"""Acceptance criteria 1 to 9, each with its runtime budget.

Run under pytest (one test per criterion, summary printed at the end) or as a
script: ``python3 tests/test_acceptance.py`` prints one PASS/FAIL line per
criterion and exits non-zero when any fails.
"""

from __future__ import annotations

import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from helpers import ACCEPTANCE, check_cbf  # noqa: E402

from expcone.bench.formats import emit_cbf, emit_json, parse_json  # noqa: E402
from expcone.bench.generators import (InstanceSpec, gen_covering, gen_packing,  # noqa: E402
                                      gen_slr_with_layout, synthetic_slr)
from expcone.bench.oracle import brute_force_oracle, brute_force_solve, slr_support_oracle  # noqa: E402
from expcone.cli import bench_instances  # noqa: E402
from expcone.exp_schemes import ExpSchemeSpec, exp_approx_value, soc_block_exp, sos_coefficients  # noqa: E402
from expcone.lift import (SchemeSpec, best_scale, certified_scheme, cone_ratios, reformulate,  # noqa: E402
                          verify_sandwich)
from expcone.log_schemes import (GenFnSpec, log_approx_value, phi3_cover, points_needed_log,  # noqa: E402
                                 rho_L, soc_block_log, quadrature_error_bound)
from expcone.outer import chord_gap, dH_lower, outer_polyhedron  # noqa: E402
from expcone.quadrature import gauss_legendre  # noqa: E402
from expcone.solve.bnb import relative_gap  # noqa: E402
from expcone.solve.driver import branch_and_cut, cutting_plane, solve_miecp  # noqa: E402

BUDGETS = {1: 5.0, 2: 10.0, 3: 5.0, 4: 30.0, 5: 10.0, 6: 120.0, 7: 60.0, 8: 60.0, 9: 10.0}
TITLES = {1: "SOS recursion exactness", 2: "quadrature accuracy", 3: "shift/scale advantage",
          4: "sandwich certification", 5: "outer approximation", 6: "end-to-end MIECP correctness",
          7: "Best Scale efficacy", 8: "SLR construction", 9: "format fidelity"}


class Checks:
    """Collects named sub-checks so a failing criterion reports every part."""

    def __init__(self) -> None:
        self.items: list[tuple[str, bool]] = []

    def __call__(self, name: str, ok: bool) -> None:
        self.items.append((name, bool(ok)))

    def finish(self, summary: str = "") -> str:
        bad = [name for name, ok in self.items if not ok]
        head = f"{len(self.items) - len(bad)}/{len(self.items)} checks"
        text = f"{head}; {summary}" if summary else head
        if bad:
            raise AssertionError(f"{text}; failed: " + "; ".join(bad))
        return text


def _matches_table(value: float, shown: str) -> bool:
    """True when ``value`` rounds to ``shown`` at the precision it is shown with."""
    if "e" in shown:
        mantissa = shown.split("e")[0]
        decimals = len(mantissa.split(".")[1]) if "." in mantissa else 0
        return float(f"{value:.{decimals}e}") == float(shown)
    decimals = len(shown.split(".")[1]) if "." in shown else 0
    return float(f"{value:.{decimals}f}") == float(shown)


def criterion_1() -> str:
    chk = Checks()
    d1, d2 = sos_coefficients(1), sos_coefficients(2)
    chk("psi_2 = 1/2 + (1/2)(y+1)^2 exactly",
        d1.exact and d1.alpha == (Fraction(1, 2), Fraction(1)) and d1.beta[1] == 1)
    chk("psi_4 = 19/72 + (1/4)(y+5/3)^2 + (1/24)(y+1)^4 exactly",
        d2.exact and d2.alpha == (Fraction(19, 72), Fraction(1, 2), Fraction(1))
        and d2.beta[1:] == (Fraction(5, 3), Fraction(1)))
    d40 = sos_coefficients(40)
    got = {"alpha_0": float(d40.alpha[0]), "beta_0": float(d40.beta[0]), "beta_7": float(d40.beta[7]),
           "alpha_39": float(d40.alpha[39]), "beta_39": float(d40.beta[39])}
    table = {"alpha_0": "-1.90e-2", "beta_0": "37.11", "beta_7": "59.20", "alpha_39": "5.00e-1",
             "beta_39": "1.67"}
    for key, shown in table.items():
        chk(f"s=40 {key}: table {shown}, computed {got[key]:.4g}", _matches_table(got[key], shown))
    negative = [s for s in range(1, 41) if sos_coefficients(s).min_alpha() < 0.0]
    first = negative[0] if negative else None
    chk(f"first negative alpha at s = 34 (computed: {first})", first == 34)
    return chk.finish(f"min alpha over s<=40 is {min(sos_coefficients(s).min_alpha() for s in range(1, 41)):.3g}")


def criterion_2() -> str:
    chk = Checks()
    M, eps = 4.0, 1e-4
    xs = np.linspace(1.0 / M, M, 2000)
    xh, delta = phi3_cover(M)
    parts = []
    for kind in ("phi1", "phi2", "phi3"):
        N = points_needed_log(kind, M, eps, delta=delta if kind == "phi3" else None)
        spec = {"phi1": GenFnSpec.phi1(1.0), "phi2": GenFnSpec.phi2(N), "phi3": GenFnSpec.phi3(xh)}[kind]
        rule = gauss_legendre(N)
        dev = max(abs(log_approx_value(spec, rule, float(x)) - math.log(x)) for x in xs)
        rho, L = rho_L(kind, M, N, delta=delta if kind == "phi3" else None)
        bound = quadrature_error_bound(rho, L, N)
        chk(f"{kind} N={N}: deviation {dev:.3g} <= eps", dev <= eps)
        chk(f"{kind} N={N}: deviation {dev:.3g} <= bound {bound:.3g}", dev <= bound)
        parts.append(f"{kind} N={N} dev={dev:.2g}")
    return chk.finish(", ".join(parts))


def _max_err(f, g, lo: float, hi: float) -> float:
    return max(abs(f(float(x)) - g(float(x))) for x in np.linspace(lo, hi, 2000))


def criterion_3() -> str:
    """Every scheme gets a budget of exactly two Lorentz rows."""
    chk = Checks()
    log_cfg = {"phi3(2)": (GenFnSpec.phi3(2.0), 2), "phi3(1)": (GenFnSpec.phi3(1.0), 2),
               "phi1": (GenFnSpec.phi1(1.0), 2), "phi2": (GenFnSpec.phi2(1), 1)}
    log_err = {}
    for name, (spec, N) in log_cfg.items():
        rule = gauss_legendre(N)
        chk(f"{name} uses two cone rows", len(soc_block_log(spec, rule).lorentz_rows) == 2)
        log_err[name] = _max_err(lambda x, s=spec, r=rule: log_approx_value(s, r, x), math.log, 0.6, 6.0)
    for other in ("phi3(1)", "phi1", "phi2"):
        chk(f"anchored phi3 {log_err['phi3(2)']:.3g} < {other} {log_err[other]:.3g}",
            log_err["phi3(2)"] < log_err[other])
    exp_cfg = {"limit": ExpSchemeSpec("limit", 2), "limit_shift": ExpSchemeSpec("limit_shift", 2, anchor=1.0),
               "taylor": ExpSchemeSpec("taylor", 1, s=1),
               "taylor_shift": ExpSchemeSpec("taylor_shift", 1, s=1, anchor=1.0)}
    exp_err = {}
    for name, spec in exp_cfg.items():
        chk(f"{name} uses two cone rows", len(soc_block_exp(spec).lorentz_rows) == 2)
        exp_err[name] = _max_err(lambda x, s=spec: exp_approx_value(s, x), math.exp, 0.3, 3.0)
    for base in ("limit", "taylor"):
        chk(f"{base}_shift {exp_err[base + '_shift']:.3g} < {base} {exp_err[base]:.3g}",
            exp_err[base + "_shift"] < exp_err[base])
    return chk.finish(", ".join(f"{k}={v:.2g}" for k, v in {**log_err, **exp_err}.items()))


def criterion_4() -> str:
    chk = Checks()
    M, eps = 4.0, 1e-4
    parts = []
    for kind in ("phi1", "phi2", "phi3", "limit", "taylor", "limit_shift", "taylor_shift"):
        scheme = certified_scheme(kind, M, eps)
        rep = verify_sandwich(scheme, M)
        chk(f"{kind} N={scheme.N}: max(eps+, eps-) = {max(rep.eps_plus, rep.eps_minus):.3g} <= {eps:g}",
            max(rep.eps_plus, rep.eps_minus) <= eps)
        if kind in ("limit", "limit_shift"):
            chk(f"{kind}: eps+ = {rep.eps_plus:g} is zero", rep.eps_plus == 0.0)
        parts.append(f"{kind} N={scheme.N}")
    return chk.finish(", ".join(parts))


def criterion_5() -> str:
    chk = Checks()
    M = 4.0
    for eps in (1e-2, 1e-3):
        poly = outer_polyhedron(M, eps)
        dev = poly.deviation(np.geomspace(1.0 / M, M, 20001))
        size = math.ceil(2.0 * math.log(M) / math.log(1.0 + math.sqrt(8.0 * eps))) + 1
        chk(f"eps={eps:g}: deviation in [{dev.min():.2g}, {dev.max():.3g}] within [0, eps]",
            dev.min() >= -1e-12 and dev.max() <= eps)
        chk(f"eps={eps:g}: grid size {len(poly.grid)} == {size}", len(poly.grid) == size)
    ts = np.linspace(1.0, 10.0, 2001)[1:]
    chain = all((t - 1) ** 2 / 1e4 <= dH_lower(float(t), 1e-2) <= chord_gap(float(t)) <= (t - 1) ** 2 / 8
                for t in ts)
    chk("chord-gap chain on (1, 10]", chain)
    return chk.finish()


def criterion_6() -> str:
    chk = Checks()
    worst, count = 0.0, 0
    for spec in bench_instances(quick=False):
        model = gen_packing(spec) if spec.family == "packing" else gen_covering(spec)
        ref = brute_force_oracle(model)
        for name, fn in (("cutting_plane", cutting_plane), ("branch_and_cut", branch_and_cut)):
            res = fn(model)
            gap = relative_gap(ref, res.objective)
            worst = max(worst, gap)
            tag = f"{spec.family} seed {spec.seed} {name}"
            chk(f"{tag}: gap {gap:.2g} <= 1e-4", gap <= 1e-4)
            chk(f"{tag}: bound {res.bound:.10g} <= oracle {ref:.10g}",
                res.bound <= ref + 1e-9 * max(1.0, abs(ref)))
            count += 1
    return chk.finish(f"{count} solves, worst gap {worst:.2g}")


def _phi3_certified_N(true_ratios, anchors, eps: float = 1e-4):
    delta = max(abs(u / a - 1.0) for u, a in zip(true_ratios, anchors))
    return points_needed_log("phi3", 4.0, eps, delta=delta) if delta < 1.0 else math.inf


def criterion_7() -> str:
    chk = Checks()
    parts = []
    for seed in range(100, 105):
        model = gen_packing(InstanceSpec("packing", 15, 10, 3, seed=seed))
        true = cone_ratios(model, brute_force_solve(model).assignment)
        default = _phi3_certified_N(true, [2.0 ** -4] * len(true))
        tuned = _phi3_certified_N(true, best_scale(model).anchors)
        chk(f"seed {seed}: best_scale N {tuned} < default N {default}", tuned < default)
        parts.append(f"{default}->{tuned}")
    return chk.finish("certified N default->best_scale: " + ", ".join(map(str, parts)))


def criterion_8() -> str:
    chk = Checks()
    X, y = synthetic_slr(6, 3, seed=0)
    lam, k = 0.1, 1
    model, layout = gen_slr_with_layout(X, y, lam, k)
    chk(f"M_theta = {layout.big_m!r} equals n log 2 / lambda", layout.big_m == 6 * math.log(2.0) / lam)
    res = solve_miecp(model, "branch_and_cut")
    ref = slr_support_oracle(X, y, lam, k, big_m=layout.big_m)
    rel = abs(res.objective - ref.objective) / abs(ref.objective)
    chk(f"objective {res.objective:.8g} vs oracle {ref.objective:.8g} (rel {rel:.2g})", rel <= 1e-3)
    return chk.finish(f"rel diff {rel:.2g}")


def criterion_9() -> str:
    chk = Checks()
    rng = np.random.default_rng(2024)
    exact, cbf_ok = 0, 0
    for i in range(100):
        fam = "packing" if i % 2 == 0 else "covering"
        n = int(rng.integers(1, 16))
        spec = InstanceSpec(fam, n, int(rng.integers(0, 11)), int(rng.integers(1, 4)),
                            t=int(rng.integers(0, n + 1)), seed=int(rng.integers(0, 2 ** 63)))
        model = gen_packing(spec) if fam == "packing" else gen_covering(spec)
        text = emit_json(model)
        back = parse_json(text)
        exact += int(back == model and emit_json(back) == text)
        try:
            check_cbf(emit_cbf(model))
            cbf_ok += 1
        except AssertionError:
            pass
    chk(f"JSON round trip byte-exact on {exact}/100", exact == 100)
    chk(f"CBF grammar accepted {cbf_ok}/100", cbf_ok == 100)
    ref = reformulate(gen_packing(InstanceSpec("packing", 6, 3, 2, seed=1)), SchemeSpec("phi3", 3, anchor=1.0))
    try:
        check_cbf(emit_cbf(ref))
        chk("CBF of a reformulated model accepted", True)
    except AssertionError as exc:
        chk(f"CBF of a reformulated model accepted ({exc})", False)
    return chk.finish()


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 10)}


def run_criterion(k: int) -> tuple[bool, float, str]:
    start = time.perf_counter()
    try:
        detail = CRITERIA[k]()
        ok = True
    except AssertionError as exc:
        detail, ok = str(exc), False
    secs = time.perf_counter() - start
    if secs > BUDGETS[k]:
        ok = False
        detail += f"; runtime {secs:.1f}s exceeds {BUDGETS[k]:g}s"
    ACCEPTANCE[k] = (ok, secs, detail)
    return ok, secs, detail


def format_line(k: int) -> str:
    ok, secs, detail = ACCEPTANCE[k]
    return (f"criterion {k} [{'PASS' if ok else 'FAIL'}] {TITLES[k]}: {secs:.2f}s "
            f"(budget {BUDGETS[k]:g}s) {detail}")


@pytest.mark.parametrize("k", list(CRITERIA))
def test_criterion(k):
    ok, _, detail = run_criterion(k)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for k in CRITERIA:
        ok, _, _ = run_criterion(k)
        failed += not ok
        print(format_line(k), flush=True)
    sys.exit(1 if failed else 0)
