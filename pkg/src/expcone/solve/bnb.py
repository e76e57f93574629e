"""Best-bound branch-and-bound with a lazy-constraint callback.

Nodes are kept in a heap keyed by (parent LP bound, creation order), so node
order is fully deterministic.  A node whose LP solution is integral is handed
to the optional oracle, which may return violated rows.  Those rows join the
global cut pool and the node is re-solved; an empty answer accepts the point
as an incumbent candidate.
"""

from __future__ import annotations

import heapq
import logging
import math
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import ParameterError, SolverError
from ..model import LinearRow, Sense
from .lp import LpBackend, LpModel, get_backend

log = logging.getLogger(__name__)

INT_TOL = 1e-6
DEFAULT_GAP = 1e-4
MAX_LAZY_ROUNDS = 10000

LazyOracle = Callable[[np.ndarray], Sequence[LinearRow]]


class Status(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NODE_LIMIT = "node_limit"
    TIME_LIMIT = "time_limit"
    ROUND_LIMIT = "round_limit"
    EXPORTED = "exported"


@dataclass(frozen=True)
class MipResult:
    status: Status
    incumbent: Optional[tuple[float, ...]]
    objective: float
    bound: float
    rel_gap: float
    nodes: int
    cuts_added: int
    elapsed: float = 0.0
    detail: str = ""

    @property
    def has_incumbent(self) -> bool:
        return self.incumbent is not None


def relative_gap(objective: float, bound: float) -> float:
    if not math.isfinite(objective):
        return math.inf
    return abs(objective - bound) / max(1e-10, abs(objective))


def rows_to_dense(rows: Sequence[LinearRow], n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    A = np.zeros((len(rows), n))
    senses = np.zeros(len(rows))
    b = np.zeros(len(rows))
    code = {Sense.LE: -1.0, Sense.EQ: 0.0, Sense.GE: 1.0}
    for i, row in enumerate(rows):
        for k, v in row.expr.terms:
            A[i, k] = v
        senses[i] = code[row.sense]
        b[i] = row.rhs - row.expr.constant
    return A, senses, b


def most_fractional(x: np.ndarray, integer: Sequence[int]) -> Optional[int]:
    """Integer column farthest from integrality (lowest index on ties), or None."""
    best, arg = INT_TOL, None
    for j in integer:
        frac = abs(x[j] - round(x[j]))
        if frac > best + 1e-12:
            best, arg = frac, j
    return arg


def _snap(x: np.ndarray, integer: Sequence[int]) -> np.ndarray:
    out = x.copy()
    out[integer] = np.round(out[integer]) + 0.0
    return out


@dataclass(order=True)
class _Node:
    bound: float
    order: int
    lower: np.ndarray
    upper: np.ndarray


def branch_and_bound(lp: LpModel, integer: Sequence[int], lazy_cut_oracle: Optional[LazyOracle] = None,
                     tol_gap: float = DEFAULT_GAP, node_limit: int = 100000,
                     time_limit: float = math.inf, backend: str | LpBackend = "simplex",
                     deadline: Optional[float] = None) -> tuple[MipResult, list[LinearRow]]:
    """Minimize ``lp`` with the listed columns integral.

    Returns the result together with every row the oracle contributed, so
    callers can carry the cut pool into later solves.
    """
    if not lp.minimize:
        raise ParameterError("branch_and_bound minimizes; negate the objective for maximization")
    integer = sorted(int(j) for j in integer)
    for j in integer:
        if not (math.isfinite(lp.lower[j]) and math.isfinite(lp.upper[j])):
            raise ParameterError(f"integer column {j} must have finite bounds")
    solve = get_backend(backend)
    start = time.perf_counter()
    stop_at = min(deadline if deadline is not None else math.inf, start + time_limit)
    n = lp.n_cols
    pool: list[LinearRow] = []
    current = lp
    lower0 = np.array(lp.lower, dtype=float)
    upper0 = np.array(lp.upper, dtype=float)
    lower0[integer] = np.ceil(lower0[integer] - INT_TOL)
    upper0[integer] = np.floor(upper0[integer] + INT_TOL)
    heap: list[_Node] = []
    if np.all(lower0 <= upper0):
        heap.append(_Node(-math.inf, 0, lower0, upper0))
    counter = 1
    nodes = 0
    incumbent: Optional[np.ndarray] = None
    inc_obj = math.inf
    pruned_bound = math.inf  # smallest bound among nodes dropped by the gap test
    status = None

    def result(st: Status, bound: float, detail: str = "") -> tuple[MipResult, list[LinearRow]]:
        bound = min(bound, inc_obj)
        gap = relative_gap(inc_obj, bound) if incumbent is not None else math.inf
        inc = tuple(float(v) for v in incumbent) if incumbent is not None else None
        res = MipResult(st, inc, inc_obj if incumbent is not None else math.nan, bound, gap, nodes,
                        len(pool), time.perf_counter() - start, detail)
        log.debug("branch_and_bound: %s obj=%.10g bound=%.10g nodes=%d cuts=%d",
                  st.value, res.objective, bound, nodes, len(pool))
        return res, pool

    def open_bound() -> float:
        b = min((node.bound for node in heap), default=math.inf)
        return min(b, pruned_bound)

    while heap:
        if nodes >= node_limit:
            status = Status.NODE_LIMIT
            break
        if time.perf_counter() > stop_at:
            status = Status.TIME_LIMIT
            break
        node = heapq.heappop(heap)
        if incumbent is not None and node.bound >= inc_obj - tol_gap * max(1e-10, abs(inc_obj)):
            pruned_bound = min(pruned_bound, node.bound)
            continue
        nodes += 1
        sol = None
        pending = False  # True when cuts were added but not yet re-solved
        for _ in range(MAX_LAZY_ROUNDS):
            pending = False
            sol = solve(current.with_bounds(node.lower, node.upper))
            if sol.status != "optimal":
                break
            frac = most_fractional(sol.x, integer)
            if frac is not None or lazy_cut_oracle is None:
                break
            cuts = list(lazy_cut_oracle(_snap(sol.x, integer)))
            if not cuts:
                break
            pool.extend(cuts)
            current = current.with_rows(*rows_to_dense(cuts, n))
            pending = True
            if time.perf_counter() > stop_at:
                break
        else:
            raise SolverError(f"lazy oracle kept cutting after {MAX_LAZY_ROUNDS} rounds at one node")
        if sol.status == "infeasible":
            continue
        if sol.status == "unbounded":
            return result(Status.UNBOUNDED, -math.inf)
        node_bound = max(node.bound, sol.objective)
        if incumbent is not None and node_bound >= inc_obj - tol_gap * max(1e-10, abs(inc_obj)):
            pruned_bound = min(pruned_bound, node_bound)
            continue
        j = most_fractional(sol.x, integer)
        if j is None:
            if pending:
                # The last cuts were not re-solved; the point is not certified.
                heapq.heappush(heap, _Node(node_bound, counter, node.lower, node.upper))
                counter += 1
                status = Status.TIME_LIMIT
                break
            x = _snap(sol.x, integer)
            obj = current.objective_value(x)
            if obj < inc_obj:
                incumbent, inc_obj = x, obj
                log.debug("node %d: incumbent %.10g", nodes, obj)
            continue
        v = sol.x[j]
        for lo_j, hi_j in ((node.lower[j], math.floor(v)), (math.ceil(v), node.upper[j])):
            if lo_j > hi_j:
                continue
            lo, hi = node.lower.copy(), node.upper.copy()
            lo[j], hi[j] = lo_j, hi_j
            heapq.heappush(heap, _Node(node_bound, counter, lo, hi))
            counter += 1
    if status is None:
        if incumbent is None:
            return result(Status.INFEASIBLE, math.inf)
        return result(Status.OPTIMAL, open_bound())
    return result(status, open_bound())
