"""Intermediate representation of mixed-integer exponential conic programs.

A model minimizes a linear objective over variables with bounds and
integrality marks, subject to linear rows and constraints of the form
``(e1, e2, e3) in K_exp(0)`` where each ``e`` is an affine expression and

    K_exp(alpha) = {x : x2 * log(x1 / x2) >= x3 - alpha * x2}.

Reformulated models may additionally carry three-dimensional Lorentz rows
``(y1, y2, y3)`` with ``y3 >= hypot(y1, y2)`` (radius last).

All value types are frozen dataclasses holding tuples, so they can be shared
freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import DomainError

DEFAULT_M = 16.0


class Integrality(str, Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"
    INTEGER = "integer"


class Sense(str, Enum):
    LE = "<="
    EQ = "=="
    GE = ">="

    @classmethod
    def parse(cls, token: "str | Sense") -> "Sense":
        if isinstance(token, Sense):
            return token
        aliases = {"<=": cls.LE, "=<": cls.LE, "L": cls.LE, "==": cls.EQ, "=": cls.EQ,
                   "E": cls.EQ, ">=": cls.GE, "=>": cls.GE, "G": cls.GE}
        try:
            return aliases[token]
        except KeyError:
            raise ValueError(f"unknown row sense {token!r}") from None


@dataclass(frozen=True)
class Variable:
    id: int
    lower: float = 0.0
    upper: float = math.inf
    integrality: Integrality = Integrality.CONTINUOUS

    @property
    def is_integer(self) -> bool:
        return self.integrality is not Integrality.CONTINUOUS


@dataclass(frozen=True)
class AffineExpr:
    """Sparse affine function ``sum_i c_i * x_i + constant``.

    ``terms`` is sorted by variable id and never contains zero coefficients,
    which makes structural equality coincide with mathematical equality.
    """

    terms: tuple[tuple[int, float], ...] = ()
    constant: float = 0.0

    @classmethod
    def build(cls, coefficients: Mapping[int, float] | Iterable[tuple[int, float]] = (),
              constant: float = 0.0) -> "AffineExpr":
        acc: dict[int, float] = {}
        items = coefficients.items() if isinstance(coefficients, Mapping) else coefficients
        for var, coef in items:
            acc[int(var)] = acc.get(int(var), 0.0) + float(coef)
        terms = tuple((k, v) for k, v in sorted(acc.items()) if v != 0.0)
        return cls(terms, float(constant))

    @classmethod
    def var(cls, index: int, coef: float = 1.0) -> "AffineExpr":
        return cls.build({index: coef})

    @classmethod
    def const(cls, value: float) -> "AffineExpr":
        return cls((), float(value))

    @property
    def coefficients(self) -> dict[int, float]:
        return dict(self.terms)

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.terms)

    @property
    def is_constant(self) -> bool:
        return not self.terms

    def coef(self, index: int) -> float:
        for k, v in self.terms:
            if k == index:
                return v
        return 0.0

    def evaluate(self, x: Sequence[float]) -> float:
        return self.constant + math.fsum(c * x[k] for k, c in self.terms)

    def substitute(self, mapping: Mapping[int, "AffineExpr"]) -> "AffineExpr":
        """Replace every variable ``k`` by ``mapping[k]``."""
        out = AffineExpr.const(self.constant)
        for k, c in self.terms:
            out = out + mapping[k] * c
        return out

    def __add__(self, other: "AffineExpr | float") -> "AffineExpr":
        if not isinstance(other, AffineExpr):
            return AffineExpr(self.terms, self.constant + float(other))
        return AffineExpr.build(list(self.terms) + list(other.terms),
                                self.constant + other.constant)

    __radd__ = __add__

    def __neg__(self) -> "AffineExpr":
        return self * -1.0

    def __sub__(self, other: "AffineExpr | float") -> "AffineExpr":
        return self + (-other)

    def __rsub__(self, other: float) -> "AffineExpr":
        return (-self) + other

    def __mul__(self, scalar: float) -> "AffineExpr":
        scalar = float(scalar)
        if scalar == 0.0:
            return AffineExpr.const(0.0)
        return AffineExpr(tuple((k, v * scalar) for k, v in self.terms), self.constant * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class LinearRow:
    expr: AffineExpr
    sense: Sense
    rhs: float = 0.0

    def residual(self, x: Sequence[float]) -> float:
        """Signed violation; non-positive means satisfied."""
        lhs = self.expr.evaluate(x) - self.rhs
        if self.sense is Sense.LE:
            return lhs
        if self.sense is Sense.GE:
            return -lhs
        return abs(lhs)


@dataclass(frozen=True)
class ExpConeConstraint:
    e1: AffineExpr
    e2: AffineExpr
    e3: AffineExpr

    def exprs(self) -> tuple[AffineExpr, AffineExpr, AffineExpr]:
        return (self.e1, self.e2, self.e3)


@dataclass(frozen=True)
class LorentzRow:
    """``(y1, y2, y3)`` with ``y3 >= sqrt(y1**2 + y2**2)``."""

    y1: AffineExpr
    y2: AffineExpr
    y3: AffineExpr

    def exprs(self) -> tuple[AffineExpr, AffineExpr, AffineExpr]:
        return (self.y1, self.y2, self.y3)

    def residual(self, x: Sequence[float]) -> float:
        a, b, c = (e.evaluate(x) for e in self.exprs())
        return math.hypot(a, b) - c


@dataclass(frozen=True)
class ModelIR:
    variables: tuple[Variable, ...]
    linear_rows: tuple[LinearRow, ...] = ()
    cones: tuple[ExpConeConstraint, ...] = ()
    objective: AffineExpr = field(default_factory=AffineExpr)
    domain_M: float = DEFAULT_M
    lorentz_rows: tuple[LorentzRow, ...] = ()

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def bounds(self) -> list[tuple[float, float]]:
        return [(v.lower, v.upper) for v in self.variables]

    def integer_indices(self) -> list[int]:
        return [v.id for v in self.variables if v.is_integer]


class ModelBuilder:
    """Mutable helper that assembles a :class:`ModelIR` incrementally."""

    def __init__(self, domain_M: float = DEFAULT_M):
        self.domain_M = float(domain_M)
        self._vars: list[Variable] = []
        self._rows: list[LinearRow] = []
        self._cones: list[ExpConeConstraint] = []
        self._lorentz: list[LorentzRow] = []
        self.objective = AffineExpr()

    @classmethod
    def from_model(cls, model: ModelIR) -> "ModelBuilder":
        b = cls(model.domain_M)
        b._vars = list(model.variables)
        b._rows = list(model.linear_rows)
        b._cones = list(model.cones)
        b._lorentz = list(model.lorentz_rows)
        b.objective = model.objective
        return b

    @property
    def n_vars(self) -> int:
        return len(self._vars)

    def add_var(self, lower: float = 0.0, upper: float = math.inf,
                integrality: Integrality = Integrality.CONTINUOUS) -> int:
        idx = len(self._vars)
        self._vars.append(Variable(idx, float(lower), float(upper), Integrality(integrality)))
        return idx

    def add_row(self, expr: AffineExpr, sense: Sense | str, rhs: float = 0.0) -> None:
        self._rows.append(LinearRow(expr, Sense.parse(sense), float(rhs)))

    def add_cone(self, e1: AffineExpr, e2: AffineExpr, e3: AffineExpr) -> None:
        self._cones.append(ExpConeConstraint(e1, e2, e3))

    def add_lorentz(self, y1: AffineExpr, y2: AffineExpr, y3: AffineExpr) -> None:
        self._lorentz.append(LorentzRow(y1, y2, y3))

    def build(self) -> ModelIR:
        return ModelIR(tuple(self._vars), tuple(self._rows), tuple(self._cones),
                       self.objective, self.domain_M, tuple(self._lorentz))


def cone_violation(x1: float, x2: float, x3: float) -> float:
    """Smallest alpha with ``(x1, x2, x3)`` in ``K_exp(alpha)``.

    The point lies in the exact cone iff the result is ``<= 0``.  The test
    is carried out in logarithmic form so that large ``x3 / x2`` never
    overflows.
    """
    if not (x1 > 0.0 and x2 > 0.0):
        raise DomainError(f"cone_violation needs x1 > 0 and x2 > 0, got ({x1}, {x2})")
    return x3 / x2 - (math.log(x1) - math.log(x2))


def expr_bounds(expr: AffineExpr, bounds: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Interval enclosure of ``expr`` over a box."""
    lo = hi = expr.constant
    for k, c in expr.terms:
        a, b = bounds[k]
        if c > 0:
            lo += c * a
            hi += c * b
        else:
            lo += c * b
            hi += c * a
    return (lo if not math.isnan(lo) else -math.inf, hi if not math.isnan(hi) else math.inf)


def _all_exprs(model: ModelIR) -> Iterator[tuple[str, AffineExpr]]:
    yield "objective", model.objective
    for i, row in enumerate(model.linear_rows):
        yield f"row {i}", row.expr
    for i, cone in enumerate(model.cones):
        for j, e in enumerate(cone.exprs(), start=1):
            yield f"cone {i} e{j}", e
    for i, lrow in enumerate(model.lorentz_rows):
        for j, e in enumerate(lrow.exprs(), start=1):
            yield f"lorentz {i} y{j}", e


def validate(model: ModelIR, strict_domain: bool = False) -> list[str]:
    """Return a list of human-readable invariant violations (empty if valid).

    With ``strict_domain`` every cone's ``e2`` must provably stay inside
    ``[1/M, M]`` over the variable box; otherwise only constant ``e2`` values
    are checked, because perspective terms such as ``c.x`` legitimately reach
    zero under the closure convention.
    """
    findings: list[str] = []
    M = model.domain_M
    if not (isinstance(M, (int, float)) and math.isfinite(M) and M > 1.0):
        findings.append(f"domain_M must be a finite number > 1, got {M!r}")
    for pos, v in enumerate(model.variables):
        if v.id != pos:
            findings.append(f"variable at position {pos} has id {v.id}; ids must be 0..n-1")
        if math.isnan(v.lower) or math.isnan(v.upper) or v.lower > v.upper:
            findings.append(f"variable {v.id}: lower {v.lower} > upper {v.upper}")
        if v.integrality is Integrality.BINARY and (v.lower < 0.0 or v.upper > 1.0):
            findings.append(f"variable {v.id}: binary bounds [{v.lower}, {v.upper}] exceed [0, 1]")
    n = len(model.variables)
    for where, expr in _all_exprs(model):
        for k, c in expr.terms:
            if not 0 <= k < n:
                findings.append(f"{where} references missing variable {k}")
            if not math.isfinite(c):
                findings.append(f"{where} has non-finite coefficient on variable {k}")
        if not math.isfinite(expr.constant):
            findings.append(f"{where} has non-finite constant")
    for i, row in enumerate(model.linear_rows):
        if not math.isfinite(row.rhs):
            findings.append(f"row {i} has non-finite rhs")
    if findings or not (math.isfinite(M) and M > 1.0):
        return findings
    bounds = model.bounds()
    for i, cone in enumerate(model.cones):
        lo, hi = expr_bounds(cone.e2, bounds)
        if cone.e2.is_constant or strict_domain:
            if lo < 1.0 / M - 1e-12 or hi > M + 1e-12:
                findings.append(f"cone {i}: x2 range [{lo}, {hi}] leaves [1/M, M] with M={M}")
    return findings
