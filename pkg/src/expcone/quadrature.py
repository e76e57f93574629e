"""Gauss-Legendre rules on [-1, 1].

Nodes are the roots of the Legendre polynomial P_N, found by Newton's method
from the Chebyshev-type guesses cos(pi (k - 1/4) / (N + 1/2)).  Weights follow
from w_k = 2 / ((1 - t_k^2) P_N'(t_k)^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ComputationError, EvaluationError, ParameterError

MAX_ORDER = 256
NEWTON_TOL = 1e-15
NEWTON_MAX_ITER = 100


@dataclass(frozen=True)
class QuadratureRule:
    nodes: tuple[float, ...]
    weights: tuple[float, ...]

    @property
    def order(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(zip(self.nodes, self.weights))


def _legendre_and_derivative(n: int, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p_prev = np.ones_like(t)
    p = t.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * t * p - (k - 1) * p_prev) / k
    dp = n * (t * p - p_prev) / (t * t - 1.0)
    return p, dp


@lru_cache(maxsize=None)
def gauss_legendre(N: int) -> QuadratureRule:
    """Return the N-point Gauss-Legendre rule, nodes ascending."""
    if isinstance(N, bool) or int(N) != N or not 1 <= N <= MAX_ORDER:
        raise ParameterError(f"quadrature order must be an integer in [1, {MAX_ORDER}], got {N!r}")
    N = int(N)
    if N == 1:
        return QuadratureRule((0.0,), (2.0,))
    m = (N + 1) // 2
    k = np.arange(1, m + 1)
    t = np.cos(math.pi * (k - 0.25) / (N + 0.5))
    for _ in range(NEWTON_MAX_ITER):
        p, dp = _legendre_and_derivative(N, t)
        step = p / dp
        t = t - step
        if np.max(np.abs(step)) <= NEWTON_TOL:
            break
    else:
        p, _ = _legendre_and_derivative(N, t)
        if np.max(np.abs(p)) > 1e-12:
            raise ComputationError(f"Newton iteration for N={N} did not converge")
    _, dp = _legendre_and_derivative(N, t)
    w = 2.0 / ((1.0 - t * t) * dp * dp)
    # t holds the positive half in decreasing order; mirror it exactly.
    pos_t, pos_w = t[::-1], w[::-1]
    if N % 2:
        pos_t[0] = 0.0
        nodes = np.concatenate([-pos_t[:0:-1], pos_t])
        weights = np.concatenate([pos_w[:0:-1], pos_w])
    else:
        nodes = np.concatenate([-pos_t[::-1], pos_t])
        weights = np.concatenate([pos_w[::-1], pos_w])
    return QuadratureRule(tuple(float(v) for v in nodes), tuple(float(v) for v in weights))


def integrate(f: Callable[[float], float], rule: QuadratureRule) -> float:
    """Apply the rule: sum_k w_k f(t_k)."""
    values = []
    for t, w in rule:
        try:
            fx = float(f(t))
        except (ArithmeticError, ValueError) as exc:
            raise EvaluationError(f"integrand failed at node {t!r}: {exc}") from None
        if not math.isfinite(fx):
            raise EvaluationError(f"integrand is not finite at node {t!r}: {fx!r}")
        values.append(w * fx)
    return math.fsum(values)
