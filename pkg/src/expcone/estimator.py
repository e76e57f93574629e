"""scikit-learn wrapper around the sparse logistic regression MIP."""

from __future__ import annotations

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .bench.generators import gen_slr_with_layout, kernel_expand
from .errors import ParameterError, SolverError
from .solve.driver import branch_and_cut, cutting_plane


class SparseLogisticRegression(ClassifierMixin, BaseEstimator):
    """Logistic regression with at most ``k`` nonzero weights and an L1 penalty ``lam``.

    Fits min sum_i log(1 + exp(-s_i theta.x_i)) + lam |theta|_1 subject to
    |supp(theta)| <= k by solving the exponential conic MIP to the relative gap
    ``tol_gap``.  Labels may be any two classes; the second class in sorted
    order is the positive one.  There is no intercept: append a constant
    column to ``X`` to fit one (it then counts toward ``k``).
    """

    def __init__(self, lam: float = 0.1, k: int = 1, kernel: bool = False,
                 method: str = "branch_and_cut", tol_gap: float = 1e-4,
                 time_limit: float = 60.0):
        self.lam = lam
        self.k = k
        self.kernel = kernel
        self.method = method
        self.tol_gap = tol_gap
        self.time_limit = time_limit

    def _features(self, X: np.ndarray) -> np.ndarray:
        return kernel_expand(X) if self.kernel else X

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=float, reset=True)
        self.classes_, labels = np.unique(y, return_inverse=True)
        if len(self.classes_) != 2:
            raise ParameterError(f"need exactly two classes, got {len(self.classes_)}")
        solve = {"branch_and_cut": branch_and_cut, "cutting_plane": cutting_plane}.get(self.method)
        if solve is None:
            raise ParameterError(f"unknown method {self.method!r}")
        F = self._features(X)
        model, layout = gen_slr_with_layout(F, labels.astype(float), self.lam, self.k)
        res = solve(model, tol_gap=self.tol_gap, time_limit=self.time_limit)
        if res.incumbent is None:
            raise SolverError(f"no solution found (status {res.status.value})")
        theta = layout.theta(res.incumbent)
        theta[np.abs(theta) <= 1e-9 * max(1.0, layout.big_m)] = 0.0
        self.coef_ = theta.reshape(1, -1)
        self.intercept_ = np.zeros(1)
        self.support_ = np.flatnonzero(theta)
        self.objective_ = res.objective
        self.bound_ = res.bound
        self.status_ = res.status.value
        self.big_m_ = layout.big_m
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self)
        X = validate_data(self, X, dtype=float, reset=False)
        return self._features(X) @ self.coef_[0]

    def predict_proba(self, X) -> np.ndarray:
        p = expit(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self)
        return self.classes_[(self.decision_function(X) > 0.0).astype(int)]


__all__ = ["SparseLogisticRegression"]
