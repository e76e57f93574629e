"""Seeded benchmark instances: packing, covering and sparse logistic regression.

Random data come from one ``numpy.random.Generator(PCG64(seed))`` stream in a
fixed layout: the constraint matrix ``a`` (m x n, row-major) first, then the
cone coefficients ``c`` (p x n, row-major).  All entries are integers drawn
uniformly from {0, ..., 9}; the division by n happens afterwards in floating
point, so instances are identical across platforms.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..errors import IngestionError, ParameterError
from ..model import AffineExpr, Integrality, ModelBuilder, ModelIR, expr_bounds

FAMILIES = ("packing", "covering", "slr")
INT_HIGH = 9


@dataclass(frozen=True)
class InstanceSpec:
    family: str
    n: int
    m: int = 0
    p: int = 1
    t: Optional[int] = None  # number of binary columns; defaults to n
    seed: int = 0
    lam: float = 0.1
    k: int = 1

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.n < 1 or self.m < 0 or self.p < 1:
            raise ParameterError("need n >= 1, m >= 0 and p >= 1")
        if not 0 <= self.n_binary <= self.n:
            raise ParameterError("t must lie in [0, n]")
        if not 0 <= self.seed < 2 ** 64:
            raise ParameterError("seed must be a 64-bit unsigned integer")

    @property
    def n_binary(self) -> int:
        return self.n if self.t is None else self.t


def _draw(spec: InstanceSpec) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    a = rng.integers(0, INT_HIGH + 1, size=(spec.m, spec.n))
    c = rng.integers(0, INT_HIGH + 1, size=(spec.p, spec.n))
    return a, c


def _x_vars(mb: ModelBuilder, spec: InstanceSpec) -> list[int]:
    return [mb.add_var(0.0, 1.0, Integrality.BINARY if j < spec.n_binary else Integrality.CONTINUOUS)
            for j in range(spec.n)]


def _row_expr(xs: Sequence[int], coefs: Sequence[float]) -> AffineExpr:
    return AffineExpr.build(zip(xs, (float(v) for v in coefs)))


def gen_packing(spec: InstanceSpec) -> ModelIR:
    """min sum_l v_l  s.t.  (v_l, 1, c_l.x) in K_exp, a x <= b, x in {0,1}^t x [0,1]^(n-t).

    b_i = 4n for all-binary instances and 2n for mixed ones; c = -int(0,9)/n.
    """
    if spec.family != "packing":
        raise ParameterError("gen_packing needs family 'packing'")
    a, c_int = _draw(spec)
    c = -c_int / spec.n
    mb = ModelBuilder()
    xs = _x_vars(mb, spec)
    bounds = mb.build().bounds()
    rhs = float((4 if spec.n_binary == spec.n else 2) * spec.n)
    for i in range(spec.m):
        mb.add_row(_row_expr(xs, a[i]), "<=", rhs)
    widest = 0.0
    for l in range(spec.p):
        cx = _row_expr(xs, c[l])
        lo, hi = expr_bounds(cx, bounds)
        widest = max(widest, abs(lo), abs(hi))
        v = mb.add_var(math.exp(lo), math.exp(hi))
        mb.add_cone(AffineExpr.var(v), AffineExpr.const(1.0), cx)
        mb.objective = mb.objective + AffineExpr.var(v)
    mb.domain_M = max(mb.domain_M, math.exp(widest))
    return mb.build()


def _xlogx(y: float) -> float:
    return y * math.log(y) if y > 0.0 else 0.0


def gen_covering(spec: InstanceSpec) -> ModelIR:
    """min sum_l v_l  s.t.  (1, c_l.x, -v_l) in K_exp, a x >= 2n, with c = int(0,9)/n.

    The cone row says v_l >= (c_l.x) log(c_l.x), with 0 log 0 = 0.
    """
    if spec.family != "covering":
        raise ParameterError("gen_covering needs family 'covering'")
    a, c_int = _draw(spec)
    c = c_int / spec.n
    mb = ModelBuilder()
    xs = _x_vars(mb, spec)
    bounds = mb.build().bounds()
    for i in range(spec.m):
        mb.add_row(_row_expr(xs, a[i]), ">=", float(2 * spec.n))
    widest = 1.0
    for l in range(spec.p):
        cx = _row_expr(xs, c[l])
        _, hi = expr_bounds(cx, bounds)
        widest = max(widest, hi)
        v = mb.add_var(-1.0 / math.e, max(0.0, _xlogx(hi)))
        mb.add_cone(AffineExpr.const(1.0), cx, -AffineExpr.var(v))
        mb.objective = mb.objective + AffineExpr.var(v)
    mb.domain_M = max(mb.domain_M, widest)
    return mb.build()


# ---------------------------------------------------------------------------
# Sparse logistic regression


@dataclass(frozen=True)
class SlrLayout:
    """Column indices of an SLR model."""

    theta_plus: tuple[int, ...]
    theta_minus: tuple[int, ...]
    z: tuple[int, ...]
    t: tuple[int, ...]
    p1: tuple[int, ...]
    p2: tuple[int, ...]
    big_m: float

    def theta(self, x: Sequence[float]) -> np.ndarray:
        return np.array([x[i] - x[j] for i, j in zip(self.theta_plus, self.theta_minus)])


def slr_big_m(n_samples: int, lam: float) -> float:
    """n log 2 / lambda: theta = 0 costs n log 2, so no optimal |theta_j| exceeds it."""
    return n_samples * math.log(2.0) / lam


def kernel_expand(features: np.ndarray) -> np.ndarray:
    """Raw features followed by every product x_i x_j with i <= j."""
    X = np.asarray(features, dtype=float)
    d = X.shape[1]
    prods = [X[:, i] * X[:, j] for i in range(d) for j in range(i, d)]
    return np.column_stack([X] + prods) if prods else X


def _check_slr(features, labels, lam: float, k: int) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if X.ndim != 2:
        raise IngestionError(f"features must be a 2-D table, got shape {X.shape}")
    if y.ndim != 1 or len(y) != X.shape[0]:
        raise IngestionError(f"labels of shape {y.shape} do not match {X.shape[0]} samples")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise IngestionError("labels must be 0 or 1")
    if not np.all(np.isfinite(X)):
        raise IngestionError("features contain non-finite values")
    if not lam > 0.0:
        raise ParameterError("lambda must be positive")
    if not 0 <= k <= X.shape[1]:
        raise ParameterError(f"k must lie in [0, {X.shape[1]}]")
    return X, y


def gen_slr_with_layout(features, labels, lam: float, k: int,
                        kernel: bool = False) -> tuple[ModelIR, SlrLayout]:
    X, y = _check_slr(features, labels, lam, k)
    if kernel:
        X = kernel_expand(X)
    n, d = X.shape
    big_m = slr_big_m(n, lam)
    mb = ModelBuilder()
    tp = tuple(mb.add_var(0.0, big_m) for _ in range(d))
    tm = tuple(mb.add_var(0.0, big_m) for _ in range(d))
    z = tuple(mb.add_var(0.0, 1.0, Integrality.BINARY) for _ in range(d))
    t = tuple(mb.add_var(0.0, n * math.log(2.0)) for _ in range(n))
    p1, p2 = [], []
    for _ in range(n):
        p1.append(mb.add_var(0.0, 1.0))
        p2.append(mb.add_var(0.0, 1.0))
    mb.add_row(AffineExpr.build({j: 1.0 for j in z}), "==", float(k))
    for j in range(d):
        theta_j = AffineExpr.build({tp[j]: 1.0, tm[j]: -1.0})
        mb.add_row(theta_j - AffineExpr.var(z[j], big_m), "<=", 0.0)
        mb.add_row(-theta_j - AffineExpr.var(z[j], big_m), "<=", 0.0)
    for i in range(n):
        mb.add_row(AffineExpr.build({p1[i]: 1.0, p2[i]: 1.0}), "==", 1.0)
        sign = 1.0 - 2.0 * y[i]
        margin = AffineExpr.build([(tp[j], sign * X[i, j]) for j in range(d)]
                                  + [(tm[j], -sign * X[i, j]) for j in range(d)])
        mb.add_cone(AffineExpr.var(p1[i]), AffineExpr.const(1.0), margin - AffineExpr.var(t[i]))
        mb.add_cone(AffineExpr.var(p2[i]), AffineExpr.const(1.0), -AffineExpr.var(t[i]))
    mb.objective = AffineExpr.build([(ti, 1.0) for ti in t] + [(j, lam) for j in tp + tm])
    layout = SlrLayout(tp, tm, z, t, tuple(p1), tuple(p2), big_m)
    return mb.build(), layout


def gen_slr(features, labels, lam: float, k: int, kernel_expand: bool = False) -> ModelIR:
    """Best-subset logistic regression with an L1 penalty as an exponential conic MIP.

    min sum_i t_i + lam |theta|_1 subject to sum z = k, |theta_j| <= M z_j and,
    per sample, p_i1 + p_i2 = 1 with (p_i1, 1, (1 - 2 y_i) theta.x_i - t_i) and
    (p_i2, 1, -t_i) in K_exp, where M = n log 2 / lam.
    """
    return gen_slr_with_layout(features, labels, lam, k, kernel_expand)[0]


def slr_objective(features, labels, theta: Sequence[float], lam: float) -> float:
    """Logistic loss plus lam |theta|_1, evaluated stably."""
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    margin = (1.0 - 2.0 * y) * (X @ np.asarray(theta, dtype=float))
    return float(np.logaddexp(0.0, margin).sum() + lam * np.abs(theta).sum())


def load_csv(path: str | Path, label: Optional[str] = None) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Read features and 0/1 labels; the header is optional and the label column defaults to the last."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if not rows:
        raise IngestionError(f"{path}: no data")

    def numeric(row: Sequence[str]) -> bool:
        try:
            [float(v) for v in row]
        except ValueError:
            return False
        return True

    header = None if numeric(rows[0]) else [h.strip() for h in rows[0]]
    body = rows[1:] if header is not None else rows
    width = len(rows[0])
    if any(len(r) != width for r in body):
        raise IngestionError(f"{path}: ragged rows")
    try:
        data = np.array([[float(v) for v in r] for r in body], dtype=float)
    except ValueError as exc:
        raise IngestionError(f"{path}: non-numeric cell ({exc})") from None
    if label is None:
        col = width - 1
    elif header is not None and label in header:
        col = header.index(label)
    else:
        raise IngestionError(f"{path}: label column {label!r} not found")
    names = header if header is not None else [f"x{i}" for i in range(width)]
    feats = [i for i in range(width) if i != col]
    return data[:, feats], data[:, col], [names[i] for i in feats]


def generate(spec: InstanceSpec) -> ModelIR:
    if spec.family == "packing":
        return gen_packing(spec)
    if spec.family == "covering":
        return gen_covering(spec)
    raise ParameterError("slr instances are built from data with gen_slr or synthetic_slr")


def synthetic_slr(n: int, d: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Small integer-valued dataset for tests: features int(-3,3), labels from a noisy sign."""
    rng = np.random.Generator(np.random.PCG64(seed))
    X = rng.integers(-3, 4, size=(n, d)).astype(float)
    w = rng.integers(-2, 3, size=d).astype(float)
    noise = rng.integers(-2, 3, size=n).astype(float)
    y = (X @ w + noise > 0).astype(float)
    return X, y
