"""Independent oracles shared by the tests: a cvxpy evaluator for SOC blocks and a CBF checker."""

from __future__ import annotations

import math
import re

import cvxpy as cp
import numpy as np

from expcone.model import Sense


def _affine(expr, x):
    out = expr.constant
    for k, c in expr.terms:
        out = out + c * x[k]
    return out


def block_extreme(block, fixed: dict, target: str, maximize: bool) -> float:
    """Optimize one local variable of a block with cvxpy, the named ones fixed."""
    x = cp.Variable(block.n_local)
    cons = []
    for (lo, hi), i in zip(block.local_bounds(), range(block.n_local)):
        if math.isfinite(lo):
            cons.append(x[i] >= lo)
        if math.isfinite(hi):
            cons.append(x[i] <= hi)
    for name, val in fixed.items():
        cons.append(x[block.index(name)] == val)
    for row in block.linear_rows:
        lhs = _affine(row.expr, x) - row.rhs
        cons.append({Sense.LE: lhs <= 0, Sense.GE: lhs >= 0, Sense.EQ: lhs == 0}[row.sense])
    for lrow in block.lorentz_rows:
        y1, y2, y3 = (_affine(e, x) for e in lrow.exprs())
        cons.append(cp.SOC(y3, cp.hstack([y1, y2])))
    t = x[block.index(target)]
    prob = cp.Problem(cp.Maximize(t) if maximize else cp.Minimize(t), cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"cvxpy status {prob.status}")
    return float(t.value)


# ---------------------------------------------------------------------------
# CBF v3 grammar checker, written from the format description only.

_KNOWN_CONES = {"F": None, "L+": None, "L-": None, "L=": None, "Q": 2, "QR": 3, "EXP": 3, "EXP*": 3}
_ORDER = ["VER", "OBJSENSE", "VAR", "INT", "PSDCON", "CON", "PSDVAR", "OBJFCOORD", "OBJACOORD",
          "OBJBCOORD", "FCOORD", "ACOORD", "BCOORD", "HCOORD", "DCOORD"]
_NUM = re.compile(r"^[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$")


def _blocks(lines, total, where):
    out, count = [], 0
    for line in lines:
        parts = line.split()
        if len(parts) != 2 or parts[0] not in _KNOWN_CONES or not parts[1].isdigit():
            raise AssertionError(f"{where}: bad cone line {line!r}")
        size = int(parts[1])
        need = _KNOWN_CONES[parts[0]]
        if need is not None and size < need:
            raise AssertionError(f"{where}: {parts[0]} block of size {size}")
        if parts[0] in ("EXP", "EXP*") and size != 3:
            raise AssertionError(f"{where}: EXP blocks have size 3")
        out.append((parts[0], size))
        count += size
    if count != total:
        raise AssertionError(f"{where}: block sizes sum to {count}, header says {total}")
    return out


def check_cbf(text: str) -> dict:
    """Parse a CBF file strictly; return section data or raise AssertionError."""
    raw = [ln.rstrip("\n") for ln in text.split("\n")]
    lines = [ln.strip() for ln in raw if not ln.lstrip().startswith("#")]
    i, seen, info = 0, [], {"n": 0, "m": 0}
    while i < len(lines):
        key = lines[i]
        i += 1
        if key == "":
            continue
        if key not in _ORDER:
            raise AssertionError(f"unknown keyword {key!r}")
        if seen and _ORDER.index(key) <= _ORDER.index(seen[-1]):
            raise AssertionError(f"keyword {key} out of order after {seen[-1]}")
        seen.append(key)

        def take():
            nonlocal i
            if i >= len(lines) or lines[i] == "":
                raise AssertionError(f"{key}: missing data line")
            i += 1
            return lines[i - 1]

        if key == "VER":
            if take() not in ("1", "2", "3"):
                raise AssertionError("bad version")
        elif key == "OBJSENSE":
            if take() not in ("MIN", "MAX"):
                raise AssertionError("bad OBJSENSE")
        elif key in ("VAR", "CON"):
            head = take().split()
            total, nblk = int(head[0]), int(head[1])
            body = [take() for _ in range(nblk)]
            blks = _blocks(body, total, key)
            if key == "VAR":
                info["n"], info["var_blocks"] = total, blks
            else:
                info["m"], info["con_blocks"] = total, blks
        elif key == "INT":
            cnt = int(take())
            ids = [int(take()) for _ in range(cnt)]
            if any(not 0 <= j < info["n"] for j in ids) or len(set(ids)) != cnt:
                raise AssertionError("bad INT indices")
            info["int"] = ids
        elif key == "OBJACOORD":
            cnt = int(take())
            for _ in range(cnt):
                j, v = take().split()
                if not 0 <= int(j) < info["n"] or not _NUM.match(v):
                    raise AssertionError(f"bad OBJACOORD entry {j} {v}")
                info.setdefault("obja", []).append((int(j), float(v)))
        elif key == "OBJBCOORD":
            v = take()
            if not _NUM.match(v):
                raise AssertionError("bad OBJBCOORD")
            info["objb"] = float(v)
        elif key == "ACOORD":
            cnt = int(take())
            for _ in range(cnt):
                r, j, v = take().split()
                if not (0 <= int(r) < info["m"] and 0 <= int(j) < info["n"] and _NUM.match(v)):
                    raise AssertionError(f"bad ACOORD entry {r} {j} {v}")
                info.setdefault("a", []).append((int(r), int(j), float(v)))
            info["nnz"] = cnt
        elif key == "BCOORD":
            cnt = int(take())
            for _ in range(cnt):
                r, v = take().split()
                if not (0 <= int(r) < info["m"] and _NUM.match(v)):
                    raise AssertionError(f"bad BCOORD entry {r} {v}")
                info.setdefault("b", []).append((int(r), float(v)))
        else:
            raise AssertionError(f"section {key} not expected in these files")
    if not seen or seen[0] != "VER":
        raise AssertionError("file must start with VER")
    if "OBJSENSE" not in seen or "VAR" not in seen:
        raise AssertionError("OBJSENSE and VAR are mandatory")
    info["sections"] = seen
    return info


def cbf_relaxation(text: str) -> float:
    """Continuous relaxation of a CBF file, built only from the file and solved with cvxpy."""
    info = check_cbf(text)
    n, m = info["n"], info["m"]
    x = cp.Variable(n)
    A = np.zeros((m, n))
    b = np.zeros(m)
    for r, j, v in info.get("a", []):
        A[r, j] += v
    for r, v in info.get("b", []):
        b[r] += v
    cons, start = [], 0
    for cone, size in info.get("con_blocks", []):
        rows = A[start:start + size] @ x + b[start:start + size]
        if cone == "L+":
            cons.append(rows >= 0)
        elif cone == "L-":
            cons.append(rows <= 0)
        elif cone == "L=":
            cons.append(rows == 0)
        elif cone == "Q":
            cons.append(cp.SOC(rows[0], rows[1:]))
        elif cone == "EXP":
            # CBF: rows[0] >= rows[1] exp(rows[2] / rows[1]); cvxpy: y exp(x / y) <= z.
            cons.append(cp.constraints.ExpCone(rows[2], rows[1], rows[0]))
        else:
            raise AssertionError(f"unexpected cone {cone}")
        start += size
    c = np.zeros(n)
    for j, v in info.get("obja", []):
        c[j] += v
    prob = cp.Problem(cp.Minimize(c @ x + info.get("objb", 0.0)), cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"cvxpy status {prob.status}")
    return float(prob.value)


def ir_relaxation(model) -> float:
    """Continuous relaxation of a model, built directly from its rows and cones with cvxpy."""
    x = cp.Variable(model.n_vars)
    cons = []
    for v in model.variables:
        if math.isfinite(v.lower):
            cons.append(x[v.id] >= v.lower)
        if math.isfinite(v.upper):
            cons.append(x[v.id] <= v.upper)
    for row in model.linear_rows:
        lhs = _affine(row.expr, x) - row.rhs
        cons.append({Sense.LE: lhs <= 0, Sense.GE: lhs >= 0, Sense.EQ: lhs == 0}[row.sense])
    for cone in model.cones:
        x1, x2, x3 = (_affine(e, x) for e in cone.exprs())
        cons.append(cp.constraints.ExpCone(x3, x2, x1))
    for lrow in model.lorentz_rows:
        y1, y2, y3 = (_affine(e, x) for e in lrow.exprs())
        cons.append(cp.SOC(y3, cp.hstack([y1, y2])))
    prob = cp.Problem(cp.Minimize(_affine(model.objective, x)), cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"cvxpy status {prob.status}")
    return float(prob.value)


def random_lp(rng: np.random.Generator, m: int, n: int):
    """Random LP with mixed senses and a mix of finite and infinite bounds."""
    from expcone.solve.lp import LpModel

    A = rng.integers(-5, 6, size=(m, n)).astype(float)
    senses = rng.choice([-1.0, 0.0, 1.0], size=m, p=[0.5, 0.2, 0.3])
    x0 = rng.uniform(-2, 2, size=n)
    b = A @ x0 + np.where(senses < 0, 1.0, np.where(senses > 0, -1.0, 0.0)) * rng.uniform(0, 2, size=m)
    if rng.random() < 0.2:
        b = b + rng.normal(0, 5, size=m)  # sometimes infeasible
    lower = np.where(rng.random(n) < 0.8, -3.0, -math.inf)
    upper = np.where(rng.random(n) < 0.8, 3.0, math.inf)
    c = rng.integers(-4, 5, size=n).astype(float)
    return LpModel(c, A, senses, b, lower, upper, minimize=bool(rng.random() < 0.7))


# Acceptance results by criterion number: (passed, seconds, detail).
ACCEPTANCE: dict[int, tuple[bool, float, str]] = {}
