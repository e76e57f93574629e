"""Quadrature approximations of log x and their SOC hypograph blocks.

Each generating function phi(t, x) integrates over t in [-1, 1] to log x (up to
a known constant), and each slice t -> phi(t, .) has an SOC-representable
hypograph.  Replacing the integral by an N-point Gauss-Legendre rule gives

    log x  ~  sum_k w_k phi(t_k, x) + const,

and the hypograph of the right-hand side is the block built by
:func:`soc_block_log`.

Available generating functions:

* ``phi1``  a (t+1)^(a-1) (x-1) / (2^a + (t+1)^a (x-1))
* ``phi2``  2^s (y-1) / (2 + (t+1)(y-1)) with y = x^(1/2^s)
* ``phi3``  (x/xh - 1) / (2 + (t+1)(x/xh - 1)), integrating to log x - log xh

Point counts use the Bernstein-ellipse bound 64 L rho^(-2N) / (15 (rho^2 - 1))
with the per-function (rho, L) pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .blocks import BlockBuilder, SocBlock
from .errors import DomainError, ParameterError
from .quadrature import MAX_ORDER, QuadratureRule, gauss_legendre

LOG_KINDS = ("phi1", "phi2", "phi3")


@dataclass(frozen=True)
class GenFnSpec:
    kind: str
    a: Optional[float] = None
    s: Optional[int] = None
    anchor_xhat: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in LOG_KINDS:
            raise ParameterError(f"unknown generating function {self.kind!r}")
        need = {"phi1": "a", "phi2": "s", "phi3": "anchor_xhat"}[self.kind]
        for name in ("a", "s", "anchor_xhat"):
            present = getattr(self, name) is not None
            if present != (name == need):
                raise ParameterError(f"{self.kind} requires exactly the parameter {need!r}")
        if self.kind == "phi1" and not self.a > 0:
            raise ParameterError("phi1 needs a > 0")
        if self.kind == "phi2" and (int(self.s) != self.s or self.s < 1):
            raise ParameterError("phi2 needs a positive integer s")
        if self.kind == "phi3" and not self.anchor_xhat > 0:
            raise ParameterError("phi3 needs a positive anchor")

    @classmethod
    def phi1(cls, a: float = 1.0) -> "GenFnSpec":
        return cls("phi1", a=float(a))

    @classmethod
    def phi2(cls, s: int) -> "GenFnSpec":
        return cls("phi2", s=int(s))

    @classmethod
    def phi3(cls, xhat: float) -> "GenFnSpec":
        return cls("phi3", anchor_xhat=float(xhat))

    @property
    def const(self) -> float:
        return math.log(self.anchor_xhat) if self.kind == "phi3" else 0.0


def root_tower(x: float, s: int) -> float:
    """x^(1/2^s) by s successive square roots."""
    if x < 0:
        raise DomainError(f"root tower needs x >= 0, got {x}")
    y = x
    for _ in range(s):
        y = math.sqrt(y)
    return y


def _ratio(num: float, den: float, what: str) -> float:
    if not den > 0.0:
        raise DomainError(f"{what}: non-positive denominator {den}")
    return num / den


def phi1(t: float, x: float, a: float = 1.0) -> float:
    tp = t + 1.0
    den = 2.0 ** a + tp ** a * (x - 1.0)
    return _ratio(a * tp ** (a - 1.0) * (x - 1.0), den, "phi1")


def phi2(t: float, x: float, s: int) -> float:
    y = root_tower(x, s)
    return _ratio(2.0 ** s * (y - 1.0), 2.0 + (t + 1.0) * (y - 1.0), "phi2")


def phi3(t: float, x: float, xhat: float) -> float:
    z = x / xhat - 1.0
    return _ratio(z, 2.0 + (t + 1.0) * z, "phi3")


def phi(spec: GenFnSpec, t: float, x: float) -> float:
    if spec.kind == "phi1":
        return phi1(t, x, spec.a)
    if spec.kind == "phi2":
        return phi2(t, x, spec.s)
    return phi3(t, x, spec.anchor_xhat)


def log_approx_value(spec: GenFnSpec, rule: QuadratureRule, x: float) -> float:
    """sum_k w_k phi(t_k, x) + const."""
    return math.fsum(w * phi(spec, t, x) for t, w in rule) + spec.const


def soc_block_log(spec: GenFnSpec, rule: QuadratureRule) -> SocBlock:
    """Hypograph block over interface ``(x, nu)``.

    Every (x, nu) with ``nu <= log_approx_value(spec, rule, x)`` extends to a
    feasible point of the block, and no other (x, nu) does.
    """
    if rule.order < 1:
        raise ParameterError("quadrature rule must have at least one node")
    b = BlockBuilder(("x", "nu"))
    x, nu = b.iface("x"), b.iface("nu")
    vs = []
    if spec.kind == "phi2":
        s = spec.s
        r = [b.aux(f"r{i}", lower=0.0) for i in range(1, s + 1)]
        b.lorentz(2.0 * r[0], x - 1.0, x + 1.0)
        for i in range(s - 1):
            b.lorentz(2.0 * r[i + 1], r[i] - 1.0, r[i] + 1.0)
    for k, (t, _) in enumerate(rule, start=1):
        v = b.aux(f"v{k}")
        vs.append(v)
        tp = t + 1.0
        if spec.kind == "phi1":
            a = spec.a
            r1 = b.name(f"r1_{k}", a - tp * v)
            r2 = b.name(f"r2_{k}", a * tp ** (a - 1.0) * (x - 1.0) - 2.0 ** a * v)
            scale = math.sqrt(2.0 ** (a + 2.0) * tp)
        elif spec.kind == "phi2":
            r1 = b.name(f"gamma1_{k}", 2.0 ** s - tp * v)
            r2 = b.name(f"gamma2_{k}", r[-1] - 1.0 - 2.0 ** (1 - s) * v)
            scale = math.sqrt(2.0 ** (3 - s) * tp)
        else:
            r1 = b.name(f"r1_{k}", 1.0 - tp * v)
            r2 = b.name(f"r2_{k}", x * (1.0 / spec.anchor_xhat) - 1.0 - 2.0 * v)
            scale = math.sqrt(8.0 * tp)
        b.row(r1, ">=")
        b.row(r2, ">=")
        b.lorentz(scale * v, r1 - r2, r1 + r2)
    agg = vs[0] * rule.weights[0]
    for w, v in zip(rule.weights[1:], vs[1:]):
        agg = agg + v * w
    b.row(agg - nu + spec.const, ">=")
    return b.build(form="log", scheme=spec.kind, N=rule.order)


def constructive_aux(spec: GenFnSpec, rule: QuadratureRule, x: float) -> dict[str, float]:
    """Auxiliary values attaining the block's supremum of nu at ``x``."""
    aux = {}
    if spec.kind == "phi2":
        y = x
        for i in range(1, spec.s + 1):
            y = math.sqrt(y)
            aux[f"r{i}"] = y
    for k, (t, _) in enumerate(rule, start=1):
        aux[f"v{k}"] = phi(spec, t, x)
    return aux


# ---------------------------------------------------------------------------
# Point counts


def quadrature_error_bound(rho: float, L: float, N: int) -> float:
    """64 L rho^(-2N) / (15 (rho^2 - 1)), evaluated in log space."""
    if not (rho > 1.0 and L > 0.0):
        raise ParameterError(f"bound needs rho > 1 and L > 0, got rho={rho}, L={L}")
    return math.exp(math.log(64.0 * L / 15.0) - 2.0 * N * math.log(rho) - math.log(rho * rho - 1.0))


def rho_L(kind: str, M: float, N: int | None = None, delta: float | None = None) -> tuple[float, float]:
    """The (rho, L) pair certifying ``kind`` on [1/M, M] (phi3: on xh[1-delta, 1+delta])."""
    kind = kind.kind if isinstance(kind, GenFnSpec) else kind
    if kind == "phi1":
        if not M > 1.0:
            raise ParameterError("phi1 bound needs M > 1")
        T = (M + 1.0) / (M - 1.0)
        rho = T + 2.0 / math.sqrt(M)
        gap = T - rho / 2.0 - 1.0 / (2.0 * rho)
    elif kind == "phi2":
        if N is None or N < 1:
            raise ParameterError("phi2 bound needs N = s >= 1")
        if not M > 1.0:
            raise ParameterError("phi2 bound needs M > 1")
        Y = root_tower(M, N)
        if not Y > 1.0:
            raise ParameterError(f"M^(1/2^{N}) rounds to 1; s={N} is too large for M={M}")
        rho = (Y + 1.0) / (Y - 1.0)
        gap = (rho - 1.0 / rho) / 2.0  # T - rho/2 - 1/(2 rho) with T = rho
        return rho, 2.0 ** N / gap
    elif kind == "phi3":
        if delta is None or not 0.0 < delta < 1.0:
            raise ParameterError("phi3 bound needs delta in (0, 1)")
        rho = (2.0 - delta) / delta
        gap = rho - rho / 2.0 - 1.0 / (2.0 * rho)
    else:
        raise ParameterError(f"unknown log scheme {kind!r}")
    if not (rho > 1.0 and gap > 0.0):
        raise ParameterError(f"(rho, L) outside validity for {kind} with M={M}, delta={delta}")
    return rho, 1.0 / gap


def log_error_bound(kind: str | GenFnSpec, M: float, N: int, delta: float | None = None) -> float:
    """Closed-form worst-case |approximation - log x| for N points."""
    if isinstance(kind, GenFnSpec):
        if kind.kind == "phi1" and kind.a != 1.0:
            raise ParameterError("closed-form (rho, L) only known for phi1 with a = 1")
        kind = kind.kind
    rho, L = rho_L(kind, M, N=N, delta=delta)
    return quadrature_error_bound(rho, L, N)


def points_needed_log(kind: str | GenFnSpec, M: float, eps: float, delta: float | None = None) -> int:
    """Smallest N whose closed-form bound is <= eps (phi2 searches s = N jointly)."""
    if not eps > 0:
        raise ParameterError("eps must be positive")
    if isinstance(kind, GenFnSpec) and kind.kind == "phi1" and kind.a != 1.0:
        raise ParameterError("closed-form (rho, L) only known for phi1 with a = 1")
    name = kind.kind if isinstance(kind, GenFnSpec) else kind
    if name != "phi2":
        log_bound = lambda N: math.log(log_error_bound(name, M, N, delta))  # noqa: E731
        rho, _ = rho_L(name, M, delta=delta)
        # The bound is geometric in N: solve directly, then settle by scanning.
        N = max(1, math.ceil((log_bound(0) - math.log(eps)) / (2.0 * math.log(rho))) - 1)
        while log_bound(N) > math.log(eps):
            N += 1
        while N > 1 and log_bound(N - 1) <= math.log(eps):
            N -= 1
        return N
    for N in range(1, MAX_ORDER + 1):
        try:
            if log_error_bound("phi2", M, N) <= eps:
                return N
        except ParameterError:
            break
    raise ParameterError(f"no phi2 point count certifies eps={eps} for M={M}")


def phi3_cover(M: float) -> tuple[float, float]:
    """Anchor and delta with [1/M, M] = xh [1 - delta, 1 + delta]."""
    if not M > 1.0:
        raise ParameterError("M must exceed 1")
    xhat = (M + 1.0 / M) / 2.0
    delta = (M * M - 1.0) / (M * M + 1.0)
    return xhat, delta

