"""Second-order-cone blocks: auxiliary variables, linear rows and L3 rows.

A block lives in its own local variable space.  Local ids ``0..len(interface)-1``
are the interface variables (for example ``x`` and ``nu`` of a hypograph, or
``x1, x2, x3`` of a lifted cone) and the auxiliary variables follow.  Callers
wire a block into a model by substituting affine expressions for the
interface ids and fresh model columns for the auxiliaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .model import AffineExpr, LinearRow, LorentzRow, Sense


@dataclass(frozen=True)
class AuxVar:
    name: str
    lower: float = -math.inf
    upper: float = math.inf


@dataclass(frozen=True)
class SocBlock:
    interface: tuple[str, ...]
    aux_vars: tuple[AuxVar, ...]
    linear_rows: tuple[LinearRow, ...]
    lorentz_rows: tuple[LorentzRow, ...]
    # Named affine expressions of the defining sets (r_1k, r_2k, gamma_1k, ...),
    # kept for inspection and constructive checks.
    named_exprs: tuple[tuple[str, AffineExpr], ...] = ()
    # Free-form scheme metadata (scheme kind, N, certified domain, ...).
    meta: tuple[tuple[str, object], ...] = field(default=())

    @property
    def n_local(self) -> int:
        return len(self.interface) + len(self.aux_vars)

    @property
    def n_aux(self) -> int:
        return len(self.aux_vars)

    def index(self, name: str) -> int:
        if name in self.interface:
            return self.interface.index(name)
        for i, a in enumerate(self.aux_vars):
            if a.name == name:
                return len(self.interface) + i
        raise KeyError(name)

    def expr(self, name: str) -> AffineExpr:
        for key, e in self.named_exprs:
            if key == name:
                return e
        return AffineExpr.var(self.index(name))

    def info(self) -> dict[str, object]:
        return dict(self.meta)

    def local_bounds(self) -> list[tuple[float, float]]:
        return ([(-math.inf, math.inf)] * len(self.interface)
                + [(a.lower, a.upper) for a in self.aux_vars])

    def max_violation(self, values: Sequence[float]) -> float:
        """Largest violation of any bound, row or L3 row at a local point."""
        worst = 0.0
        for (lo, hi), v in zip(self.local_bounds(), values):
            worst = max(worst, lo - v, v - hi)
        for row in self.linear_rows:
            worst = max(worst, row.residual(values))
        for lrow in self.lorentz_rows:
            worst = max(worst, lrow.residual(values))
        return worst

    def assignment(self, interface_values: Mapping[str, float],
                   aux_values: Mapping[str, float]) -> list[float]:
        vals = [float(interface_values[n]) for n in self.interface]
        vals += [float(aux_values[a.name]) for a in self.aux_vars]
        return vals


class BlockBuilder:
    """Accumulates a :class:`SocBlock`."""

    def __init__(self, interface: Sequence[str]):
        self.interface = tuple(interface)
        self._aux: list[AuxVar] = []
        self._rows: list[LinearRow] = []
        self._lorentz: list[LorentzRow] = []
        self._named: list[tuple[str, AffineExpr]] = []

    def iface(self, name: str) -> AffineExpr:
        return AffineExpr.var(self.interface.index(name))

    def aux(self, name: str, lower: float = -math.inf, upper: float = math.inf) -> AffineExpr:
        self._aux.append(AuxVar(name, lower, upper))
        return AffineExpr.var(len(self.interface) + len(self._aux) - 1)

    def name(self, key: str, expr: AffineExpr) -> AffineExpr:
        self._named.append((key, expr))
        return expr

    def row(self, expr: AffineExpr, sense: Sense | str, rhs: float = 0.0) -> None:
        self._rows.append(LinearRow(expr - rhs, Sense.parse(sense), 0.0))

    def lorentz(self, y1: AffineExpr, y2: AffineExpr, y3: AffineExpr) -> None:
        self._lorentz.append(LorentzRow(y1, y2, y3))

    def build(self, **meta: object) -> SocBlock:
        return SocBlock(self.interface, tuple(self._aux), tuple(self._rows),
                        tuple(self._lorentz), tuple(self._named), tuple(sorted(meta.items())))
