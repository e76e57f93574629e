"""Exponential-form approximations and their SOC epigraph blocks.

Four scalar schemes approximate exp(x):

* ``limit``         psi_N(x) = (1 + x/2^N)^(2^N)
* ``taylor``        (T_2s(x/2^N))^(2^N), T_2s the degree-2s Taylor polynomial
* ``limit_shift``   exp(xh) psi_N(x - xh)
* ``taylor_shift``  exp(xh) (T_2s((x - xh)/2^N))^(2^N)

Powers of 2^N are always formed by repeated squaring so that scalar values
coincide with what the squaring towers of the SOC blocks enforce.

The even-degree Taylor polynomial admits the decomposition

    T_2s(y) = sum_j alpha_j / (2j)! * (beta_j + y)^(2j),

whose coefficients follow from a triangular recursion (:func:`sos_coefficients`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath

from .blocks import BlockBuilder, SocBlock
from .errors import ComputationError, DomainError, ParameterError, UnsupportedError

EXP_KINDS = ("limit", "taylor", "limit_shift", "taylor_shift")
SOS_MAX_S = 64
# Exact rational solves are used up to this order; beyond it the rationals
# grow by roughly a factor of three in bit length per order.
SOS_EXACT_MAX_S = 10
SOS_PRECISION_BITS = 128
SOC_MAX_S = 33


@dataclass(frozen=True)
class ExpSchemeSpec:
    kind: str
    N: int
    s: Optional[int] = None
    anchor: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in EXP_KINDS:
            raise ParameterError(f"unknown exponential scheme {self.kind!r}")
        if int(self.N) != self.N or self.N < 0:
            raise ParameterError("N must be a nonnegative integer")
        taylor = self.kind.startswith("taylor")
        if taylor != (self.s is not None):
            raise ParameterError(f"{self.kind}: parameter s is {'required' if taylor else 'not allowed'}")
        if taylor and (int(self.s) != self.s or self.s < 1):
            raise ParameterError("s must be a positive integer")
        shift = self.kind.endswith("shift")
        if shift != (self.anchor is not None):
            raise ParameterError(f"{self.kind}: anchor is {'required' if shift else 'not allowed'}")

    @property
    def shift(self) -> float:
        return self.anchor if self.anchor is not None else 0.0


def _power_two_pow(base: float, N: int) -> float:
    v = base
    for _ in range(N):
        v = v * v
    return v


def psi_limit(x: float, N: int) -> float:
    """(1 + 2^-N x)^(2^N) by N squarings."""
    base = 1.0 + math.ldexp(x, -N)
    if base < 0.0:
        raise DomainError(f"1 + x/2^N = {base} < 0 lies outside the representable region")
    return _power_two_pow(base, N)


def taylor_even(y: float, s: int) -> float:
    """sum_{i <= 2s} y^i / i!, evaluated by Horner's rule."""
    if s < 1:
        raise ParameterError("s must be positive")
    acc = 1.0
    for i in range(2 * s, 0, -1):
        acc = 1.0 + acc * y / i
    return acc


def psi_taylor(x: float, N: int, s: int) -> float:
    return _power_two_pow(taylor_even(math.ldexp(x, -N), s), N)


def psi_shift(x: float, N: int, anchor: float) -> float:
    return math.exp(anchor) * psi_limit(x - anchor, N)


def psi_taylor_shift(x: float, N: int, s: int, anchor: float) -> float:
    return math.exp(anchor) * psi_taylor(x - anchor, N, s)


def exp_approx_value(spec: ExpSchemeSpec, x: float) -> float:
    if spec.kind == "limit":
        return psi_limit(x, spec.N)
    if spec.kind == "taylor":
        return psi_taylor(x, spec.N, spec.s)
    if spec.kind == "limit_shift":
        return psi_shift(x, spec.N, spec.anchor)
    return psi_taylor_shift(x, spec.N, spec.s, spec.anchor)


# ---------------------------------------------------------------------------
# Sum-of-squares coefficients


@dataclass(frozen=True)
class SosDecomposition:
    s: int
    alpha: tuple
    beta: tuple
    exact: bool

    def evaluate(self, y) -> object:
        """sum_j alpha_j / (2j)! (beta_j + y)^(2j) in the coefficients' arithmetic."""
        if self.exact:
            y = Fraction(y)
            fact = math.factorial
        else:
            y = mpmath.mpf(y)
            fact = mpmath.factorial
        return sum(a / fact(2 * j) * (b + y) ** (2 * j)
                   for j, (a, b) in enumerate(zip(self.alpha, self.beta)))

    def alpha_float(self) -> list[float]:
        return [float(a) for a in self.alpha]

    def beta_float(self) -> list[float]:
        return [float(b) for b in self.beta]

    def min_alpha(self) -> float:
        return min(self.alpha_float())


def _solve_sos(s: int, one, fact):
    alpha = {s: one}
    beta = {s: one}
    for k in range(1, s + 1):
        even = sum(alpha[s - j] * beta[s - j] ** (2 * k - 2 * j) / fact(2 * k - 2 * j) for j in range(k))
        alpha[s - k] = one - even
        if alpha[s - k] == 0:
            raise ComputationError(f"zero pivot alpha_{s - k} in the triangular solve")
        odd = sum(alpha[s - j] * beta[s - j] ** (2 * k - 2 * j + 1) / fact(2 * k - 2 * j + 1) for j in range(k))
        beta[s - k] = (one - odd) / alpha[s - k]
    return tuple(alpha[j] for j in range(s + 1)), tuple(beta[j] for j in range(s + 1))


def sos_coefficients(s: int, exact: Optional[bool] = None) -> SosDecomposition:
    """Coefficients (alpha_j, beta_j) of the SOS form of T_2s.

    alpha_{s-k} comes from matching the y^(2s-2k) coefficient and beta_{s-k}
    from the y^(2s-2k+1) coefficient, for k = 1..s.  The final odd equation
    (k = s) involves only beta_0, which therefore has no effect on the
    polynomial; it is still reported for completeness.

    Rational arithmetic is used for ``s <= SOS_EXACT_MAX_S`` unless overridden,
    and 128-bit binary floating point otherwise.
    """
    if int(s) != s or not 1 <= s <= SOS_MAX_S:
        raise ParameterError(f"s must be an integer in [1, {SOS_MAX_S}]")
    s = int(s)
    if exact is None:
        exact = s <= SOS_EXACT_MAX_S
    if exact:
        alpha, beta = _solve_sos(s, Fraction(1), math.factorial)
    else:
        with mpmath.workprec(SOS_PRECISION_BITS):
            alpha, beta = _solve_sos(s, mpmath.mpf(1), mpmath.factorial)
            if not all(mpmath.isfinite(v) for v in alpha + beta):
                raise ComputationError("non-finite coefficient in the triangular solve")
    return SosDecomposition(s, alpha, beta, exact)


# ---------------------------------------------------------------------------
# SOC epigraph blocks


def soc_block_exp(spec: ExpSchemeSpec) -> SocBlock:
    """Epigraph block over interface ``(x, v)``: feasible iff v >= scheme value."""
    if spec.kind.startswith("taylor"):
        if spec.s != 1:
            raise UnsupportedError(f"no SOC representation implemented for taylor s={spec.s}; only s=1")
    elif spec.N < 1:
        raise ParameterError("limit schemes need N >= 1 for block emission")
    N = spec.N
    taylor = spec.kind.startswith("taylor")
    b = BlockBuilder(("x", "v"))
    x, v = b.iface("x"), b.iface("v")
    lead = math.sqrt(math.exp(spec.shift))
    r = []
    for k in range(1, N + 1):
        nonneg = taylor or k < N
        r.append(b.aux(f"r{k}", lower=0.0 if nonneg else -math.inf))
    base = 1.0 + (x - spec.shift) * math.ldexp(1.0, -N)
    if N >= 1:
        b.lorentz(2.0 * lead * r[0], v - 1.0, v + 1.0)
        for k in range(N - 1):
            b.lorentz(2.0 * r[k + 1], r[k] - 1.0, r[k] + 1.0)
        top = r[-1]
    else:
        # No tower: the rotated row acts on v / exp(xh) directly.
        top = v * math.exp(-spec.shift)
    if taylor:
        b.lorentz(base, top - 1.0, top)
    else:
        b.row(top - base, "==")
    return b.build(form="exp", scheme=spec.kind, N=N, s=spec.s, anchor=spec.anchor)


def constructive_aux_exp(spec: ExpSchemeSpec, x: float) -> dict[str, float]:
    """Tower values attaining the block's infimum of v at ``x``."""
    y = math.ldexp(x - spec.shift, -spec.N)
    top = taylor_even(y, 1) if spec.kind.startswith("taylor") else 1.0 + y
    vals = [top]
    for _ in range(spec.N - 1):
        vals.append(vals[-1] * vals[-1])
    vals.reverse()
    return {f"r{k}": vals[k - 1] for k in range(1, spec.N + 1)}


# ---------------------------------------------------------------------------
# Level counts


def limit_error_bound(x: float, N: int) -> float:
    """exp(x - x^2/2^(N-2)) <= psi_N(x): returns x^2 / 2^(N-2)."""
    return x * x / math.ldexp(1.0, N - 2)


def taylor_case1_bound(x: float, N: int, s: int) -> float:
    """Relative error bound of the Taylor scheme for x >= 0."""
    f = math.factorial(2 * s + 1)
    x = abs(x)
    return (x ** (2 * s + 1) / (math.ldexp(1.0, 2 * N * s) * f)
            + x ** (4 * s + 2) / (math.ldexp(1.0, N * (4 * s + 1) - 2) * f * f))


def taylor_case2_bound_uncorrected(x: float, N: int, s: int) -> float:
    """Uncorrected x <= 0 bound 3|x|^(2s-1) / (2^(N(2s-2)) (2s+1)!).

    For s = 1 this equals |x|/2 regardless of N, so it never certifies an
    accuracy; it is kept only for reference.
    """
    return 3.0 * abs(x) ** (2 * s - 1) / (math.ldexp(1.0, N * (2 * s - 2)) * math.factorial(2 * s + 1))


def taylor_case2_bound(x: float, N: int, s: int) -> float:
    """Bound for x <= 0 (with |x| <= 2^N): e |x|^(2s+1) / (2^(2Ns) (2s+1)!).

    With y = x/2^N in [-1, 0] the Lagrange remainder gives
    0 <= T_2s(y) - e^y <= |y|^(2s+1)/(2s+1)!, hence
    0 <= log T_2s(y) - y <= e |y|^(2s+1)/(2s+1)!, and raising to 2^N
    multiplies the log error by 2^N.
    """
    return math.e * abs(x) ** (2 * s + 1) / (math.ldexp(1.0, 2 * N * s) * math.factorial(2 * s + 1))


def taylor_error_bound(L_hat: float, N: int, s: int) -> float:
    """Worst of both sign cases over [-L_hat, L_hat] (requires 2^N >= L_hat)."""
    return max(taylor_case1_bound(L_hat, N, s), taylor_case2_bound(L_hat, N, s))


def _ceil(value: float) -> int:
    # Round-off such as 4 * 0.1**2 / 0.01 = 4.000000000000001 must not add a level.
    return math.ceil(value - 1e-9)


def levels_needed_exp(kind: str, radius: float, eps: float, s: int = 1) -> int:
    """Number of squaring levels N certifying accuracy eps on [-radius, radius].

    ``radius`` is L_hat for the unshifted schemes and delta for shifted ones.
    """
    if not eps > 0:
        raise ParameterError("eps must be positive")
    if not radius > 0:
        raise ParameterError("radius must be positive")
    if kind in ("limit", "limit_shift"):
        return max(1, _ceil(math.log2(4.0 * radius * radius / eps)))
    if kind not in ("taylor", "taylor_shift"):
        raise ParameterError(f"unknown exponential scheme {kind!r}")
    # Scan up from the smallest N with 2^N >= radius; the bound decays geometrically.
    N = max(0, _ceil(math.log2(radius)))
    while taylor_error_bound(radius, N, s) > eps:
        N += 1
    return N

