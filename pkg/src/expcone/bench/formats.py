"""Model files: JSON (exact round trip), CBF v3 and CPLEX LP.

JSON layout, with a fixed key order so equal models give equal bytes::

    {"variables": [{"id", "lb", "ub", "kind"}, ...],
     "rows": [{"expr": {"coef": {"id": value}, "const"}, "sense", "rhs"}, ...],
     "cones": [{"e1", "e2", "e3"}, ...],
     "objective": {"coef", "const"},
     "M": value,
     "lorentz": [{"y1", "y2", "y3"}, ...]}   (only when present)

``null`` stands for an infinite bound.  Floats are written in Python's
shortest round-trip form, so parsing restores every value bit for bit.

CBF writes every variable as free, bounds and linear rows as L+ / L= blocks,
exponential cones as EXP blocks in the model's own order (x1 >= x2 exp(x3/x2))
and Lorentz rows as Q blocks with the radius first.
"""

from __future__ import annotations

import io
import json
import math
from pathlib import Path
from typing import Any, Optional, Sequence

from ..errors import EmissionError, IngestionError
from ..model import (AffineExpr, ExpConeConstraint, Integrality, LinearRow, LorentzRow, ModelIR,
                     Sense, Variable)

FORMATS = ("json", "cbf", "lp")


# ---------------------------------------------------------------------------
# JSON


def _num(v: float) -> Optional[float]:
    return None if math.isinf(v) else float(v)


def _expr_json(e: AffineExpr) -> dict[str, Any]:
    return {"coef": {str(k): float(v) for k, v in e.terms}, "const": float(e.constant)}


def model_to_dict(model: ModelIR) -> dict[str, Any]:
    out: dict[str, Any] = {
        "variables": [{"id": v.id, "lb": _num(v.lower), "ub": _num(v.upper), "kind": v.integrality.value}
                      for v in model.variables],
        "rows": [{"expr": _expr_json(r.expr), "sense": r.sense.value, "rhs": float(r.rhs)}
                 for r in model.linear_rows],
        "cones": [{"e1": _expr_json(c.e1), "e2": _expr_json(c.e2), "e3": _expr_json(c.e3)}
                  for c in model.cones],
        "objective": _expr_json(model.objective),
        "M": float(model.domain_M),
    }
    if model.lorentz_rows:
        out["lorentz"] = [{"y1": _expr_json(r.y1), "y2": _expr_json(r.y2), "y3": _expr_json(r.y3)}
                          for r in model.lorentz_rows]
    return out


def emit_json(model: ModelIR) -> str:
    return json.dumps(model_to_dict(model), separators=(",", ":"), allow_nan=False) + "\n"


def _expr_from(obj: Any, where: str) -> AffineExpr:
    try:
        coef = obj["coef"]
        terms = tuple(sorted((int(k), float(v)) for k, v in coef.items()))
        return AffineExpr(tuple((k, v) for k, v in terms if v != 0.0), float(obj["const"]))
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise IngestionError(f"{where}: malformed expression ({exc})") from None


def _bound(v: Any, default: float, where: str) -> float:
    if v is None:
        return default
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise IngestionError(f"{where}: bound must be a number or null")
    return float(v)


def model_from_dict(data: dict[str, Any]) -> ModelIR:
    try:
        variables = tuple(Variable(int(v["id"]), _bound(v["lb"], -math.inf, f"variable {i}"),
                                   _bound(v["ub"], math.inf, f"variable {i}"), Integrality(v["kind"]))
                          for i, v in enumerate(data["variables"]))
        rows = tuple(LinearRow(_expr_from(r["expr"], f"row {i}"), Sense.parse(r["sense"]), float(r["rhs"]))
                     for i, r in enumerate(data["rows"]))
        cones = tuple(ExpConeConstraint(*(_expr_from(c[k], f"cone {i}") for k in ("e1", "e2", "e3")))
                      for i, c in enumerate(data["cones"]))
        lorentz = tuple(LorentzRow(*(_expr_from(r[k], f"lorentz {i}") for k in ("y1", "y2", "y3")))
                        for i, r in enumerate(data.get("lorentz", [])))
        objective = _expr_from(data["objective"], "objective")
        M = float(data["M"])
    except (KeyError, TypeError, ValueError) as exc:
        raise IngestionError(f"malformed model JSON: {exc}") from None
    return ModelIR(variables, rows, cones, objective, M, lorentz)


def parse_json(text: str) -> ModelIR:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IngestionError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise IngestionError("model JSON must be an object")
    return model_from_dict(data)


# ---------------------------------------------------------------------------
# CBF


def _fmt(v: float) -> str:
    return "%.17g" % v


class _CbfRows:
    """Accumulates affine rows ``a.x + b`` grouped into cone blocks."""

    def __init__(self) -> None:
        self.blocks: list[tuple[str, int]] = []
        self.a: list[tuple[int, int, float]] = []
        self.b: list[tuple[int, float]] = []
        self.count = 0

    def add(self, cone: str, exprs: Sequence[AffineExpr]) -> None:
        if self.blocks and self.blocks[-1][0] == cone and cone in ("L+", "L-", "L="):
            self.blocks[-1] = (cone, self.blocks[-1][1] + len(exprs))
        else:
            self.blocks.append((cone, len(exprs)))
        for e in exprs:
            for k, v in e.terms:
                self.a.append((self.count, k, v))
            if e.constant != 0.0:
                self.b.append((self.count, e.constant))
            self.count += 1


def emit_cbf(model: ModelIR) -> str:
    rows = _CbfRows()
    for v in model.variables:
        if math.isfinite(v.lower):
            rows.add("L+", [AffineExpr.var(v.id) - v.lower])
        if math.isfinite(v.upper):
            rows.add("L+", [v.upper - AffineExpr.var(v.id)])
    for r in model.linear_rows:
        e = r.expr - r.rhs
        if r.sense is Sense.LE:
            rows.add("L+", [-e])
        elif r.sense is Sense.GE:
            rows.add("L+", [e])
        else:
            rows.add("L=", [e])
    for c in model.cones:
        rows.add("EXP", [c.e1, c.e2, c.e3])
    for lr in model.lorentz_rows:
        rows.add("Q", [lr.y3, lr.y1, lr.y2])
    ints = [v.id for v in model.variables if v.integrality is not Integrality.CONTINUOUS]
    out = io.StringIO()
    w = out.write
    w("VER\n3\n\n")
    w("OBJSENSE\nMIN\n\n")
    n = model.n_vars
    w(f"VAR\n{n} {1 if n else 0}\n")
    if n:
        w(f"F {n}\n")
    w("\n")
    if ints:
        w(f"INT\n{len(ints)}\n" + "".join(f"{j}\n" for j in ints) + "\n")
    if rows.count:
        w(f"CON\n{rows.count} {len(rows.blocks)}\n")
        w("".join(f"{cone} {size}\n" for cone, size in rows.blocks) + "\n")
    obj = model.objective
    if obj.terms:
        w(f"OBJACOORD\n{len(obj.terms)}\n" + "".join(f"{k} {_fmt(v)}\n" for k, v in obj.terms) + "\n")
    if obj.constant != 0.0:
        w(f"OBJBCOORD\n{_fmt(obj.constant)}\n\n")
    if rows.a:
        w(f"ACOORD\n{len(rows.a)}\n" + "".join(f"{i} {j} {_fmt(v)}\n" for i, j, v in rows.a) + "\n")
    if rows.b:
        w(f"BCOORD\n{len(rows.b)}\n" + "".join(f"{i} {_fmt(v)}\n" for i, v in rows.b) + "\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# CPLEX LP


def _lp_expr(e: AffineExpr, with_const: bool) -> str:
    parts = [f"{'-' if v < 0 else '+'} {_fmt(abs(v))} x{k}" for k, v in e.terms]
    if with_const and e.constant != 0.0:
        parts.append(f"{'-' if e.constant < 0 else '+'} {_fmt(abs(e.constant))}")
    text = " ".join(parts) if parts else "0 x0"
    return text[2:] if text.startswith("+ ") else text


def emit_lp(model: ModelIR) -> str:
    """CPLEX LP text of a model without cones (for example a polyhedral outer approximation)."""
    if model.cones:
        raise EmissionError("LP format cannot express exponential cone constraints")
    if model.lorentz_rows:
        raise EmissionError("LP format cannot express Lorentz (second-order cone) rows")
    if model.n_vars == 0:
        raise EmissionError("LP format needs at least one variable")
    out = io.StringIO()
    w = out.write
    w("\\ written by expcone\nMinimize\n")
    w(f" obj: {_lp_expr(model.objective, True)}\n")
    w("Subject To\n")
    op = {Sense.LE: "<=", Sense.GE: ">=", Sense.EQ: "="}
    for i, r in enumerate(model.linear_rows):
        w(f" r{i}: {_lp_expr(r.expr, False)} {op[r.sense]} {_fmt(r.rhs - r.expr.constant)}\n")
    w("Bounds\n")
    for v in model.variables:
        lo, hi = v.lower, v.upper
        if math.isinf(lo) and math.isinf(hi):
            w(f" x{v.id} free\n")
        else:
            lo_s = "-inf" if math.isinf(lo) else _fmt(lo)
            hi_s = "+inf" if math.isinf(hi) else _fmt(hi)
            w(f" {lo_s} <= x{v.id} <= {hi_s}\n")
    gen = [v.id for v in model.variables if v.integrality is Integrality.INTEGER]
    binr = [v.id for v in model.variables if v.integrality is Integrality.BINARY]
    if gen:
        w("General\n" + "".join(f" x{j}\n" for j in gen))
    if binr:
        w("Binary\n" + "".join(f" x{j}\n" for j in binr))
    w("End\n")
    return out.getvalue()


def emit(model: ModelIR, fmt: str) -> str:
    if fmt == "json":
        return emit_json(model)
    if fmt == "cbf":
        return emit_cbf(model)
    if fmt == "lp":
        return emit_lp(model)
    raise EmissionError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def write_model(model: ModelIR, path: str | Path, fmt: str = "cbf") -> Path:
    path = Path(path)
    path.write_text(emit(model, fmt))
    return path


def read_json(path: str | Path) -> ModelIR:
    return parse_json(Path(path).read_text())
