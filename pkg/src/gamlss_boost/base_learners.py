"""Simple linear (intercept + slope) least-squares base-learners."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FittedBaseLearner:
    j: int
    a: float
    b: float
    h: np.ndarray
    ssr: float
    sqnorm: float


def fit_linear(u, x, j: int = 0) -> FittedBaseLearner:
    """OLS fit of ``u`` on ``x`` with intercept; a constant ``x`` gives ``b = 0``."""
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    if u.size != x.size or u.size < 2:
        raise ValueError("u and x must have the same length >= 2")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    b = float(xc @ u) / sxx if sxx > 0 else 0.0
    a = float(u.mean()) - b * float(x.mean())
    h = a + b * x
    res = u - h
    return FittedBaseLearner(j, a, b, h, float(res @ res), float(h @ h))


def fit_intercept_only(u) -> FittedBaseLearner:
    u = np.asarray(u, dtype=float)
    a = float(u.mean())
    h = np.full(u.size, a)
    res = u - h
    return FittedBaseLearner(-1, a, 0.0, h, float(res @ res), float(h @ h))


class DesignCache:
    """Column statistics of X reused across every selection in a fit."""

    def __init__(self, X):
        X = np.asarray(X, dtype=float)
        self.X = X
        self.n, self.p = X.shape
        self.means = X.mean(axis=0)
        self.Xc = X - self.means
        self.sxx = np.einsum("ij,ij->j", self.Xc, self.Xc)
        self.const = ~(self.sxx > 0)
        self.inv_sxx = np.where(self.const, 0.0, 1.0 / np.where(self.const, 1.0, self.sxx))


def select_best(u, X, cache: DesignCache | None = None) -> tuple[int, FittedBaseLearner]:
    """Fit every column and return the one with the smallest residual sum of squares.

    Ties go to the lowest column index. With ``p == 0`` an intercept-only
    learner is returned with ``j = -1``.
    """
    u = np.asarray(u, dtype=float)
    if cache is None:
        cache = DesignCache(X)
    if cache.p == 0:
        bl = fit_intercept_only(u)
        return -1, bl
    ubar = float(u.mean())
    uc = u - ubar
    sxu = cache.Xc.T @ uc
    # ssr_j = Suu - Sxu_j^2 / Sxx_j; minimising ssr maximises the explained part
    explained = sxu * sxu * cache.inv_sxx
    j = int(np.argmax(explained))
    b = float(sxu[j] * cache.inv_sxx[j])
    a = ubar - b * float(cache.means[j])
    h = a + b * cache.X[:, j]
    res = u - h
    return j, FittedBaseLearner(j, a, b, h, float(res @ res), float(h @ h))
