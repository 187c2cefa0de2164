"""Selection/balancedness metrics and survival scoring."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, FittedModel

# (numerator, denominator) parameter indices of the selected-covariates ratio
SCR_DIRECTION = {"gaussian": (0, 1), "negbin": (1, 0), "weibull": (0, 1)}


def scr_label(family: str, param_names) -> str:
    num, den = SCR_DIRECTION[family]
    return f"SCR_{param_names[num]}/{param_names[den]}"


@dataclass(frozen=True)
class SelectionMetrics:
    selected: tuple[int, ...]
    scr: float
    fp: tuple[int, ...]
    fn: tuple[int, ...]


def selected_mask(model: FittedModel) -> np.ndarray:
    """(K, p) mask of covariates with a nonzero accumulated slope."""
    return model.coef != 0.0


def selection_metrics(model: FittedModel, truth) -> SelectionMetrics:
    sel = selected_mask(model)
    if sel.shape != truth.slopes.shape:
        raise ValueError("model and truth disagree on the number of covariates")
    informative = truth.slopes != 0.0
    counts = tuple(int(c) for c in sel.sum(axis=1))
    fp = tuple(int(c) for c in (sel & ~informative).sum(axis=1))
    fn = tuple(int(c) for c in (~sel & informative).sum(axis=1))
    return SelectionMetrics(counts, scr_from_counts(model.family, counts), fp, fn)


def scr_from_counts(family: str, counts) -> float:
    num, den = SCR_DIRECTION[family]
    if counts[den] == 0:
        return math.inf
    return counts[num] / counts[den]


def coefficient_table(model: FittedModel, truth=None) -> list[dict]:
    """Long-format rows: one intercept row plus one row per covariate and parameter.

    The intercept estimate is the full link-scale intercept (offset plus
    boosted intercept).
    """
    rows = []
    for k, pname in enumerate(model.param_names):
        row = {
            "parameter": pname,
            "covariate": "(Intercept)",
            "estimate": float(model.offsets[k] + model.intercepts[k]),
        }
        if truth is not None:
            row["true_value"] = float(truth.intercepts[k])
        rows.append(row)
        for j, name in enumerate(model.names):
            row = {"parameter": pname, "covariate": name, "estimate": float(model.coef[k, j])}
            if truth is not None:
                row["true_value"] = float(truth.slopes[k, j])
            rows.append(row)
    return rows


def weibull_survival(model: FittedModel, X, t) -> np.ndarray:
    """S(t | x) = exp(-(t / lambda(x))^k(x)) for every row of ``X``."""
    if model.family != "weibull":
        raise ValueError("survival predictions need a Weibull model")
    params = model.predict(X)
    lam, k = params[:, 0], params[:, 1]
    return np.exp(-np.power(t / lam, k))


def brier_from_survival(y, surv, t: float) -> float:
    y = np.asarray(y, dtype=float)
    surv = np.broadcast_to(np.asarray(surv, dtype=float), y.shape)
    return float(np.mean(((y > t).astype(float) - surv) ** 2))


def brier_score(model: FittedModel, validation: Dataset, t: float) -> float:
    """Uncensored Brier score at time ``t``."""
    if model.family != "weibull":
        raise ValueError("Brier score is defined here for Weibull models only")
    if t < 0:
        raise ValueError("time must be >= 0")
    return brier_from_survival(validation.y, weibull_survival(model, validation.X, t), t)


def default_grid(validation: Dataset, points: int = 100) -> np.ndarray:
    return np.linspace(0.0, float(validation.y.max()), points)


def integrate_brier(grid, scores) -> float:
    grid = np.asarray(grid, dtype=float)
    scores = np.asarray(scores, dtype=float)
    if grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing with at least 2 points")
    area = float(np.sum(np.diff(grid) * (scores[1:] + scores[:-1]) / 2.0))
    return area / float(grid[-1] - grid[0])


def brier_curve(model: FittedModel, validation: Dataset, grid) -> np.ndarray:
    return np.array([brier_score(model, validation, float(t)) for t in grid])


def integrated_brier(model: FittedModel, validation: Dataset, grid=None) -> float:
    """Trapezoidal integral of the Brier curve, normalised by the grid length."""
    if grid is None:
        grid = default_grid(validation)
    elif np.isscalar(grid):
        grid = default_grid(validation, int(grid))
    return integrate_brier(grid, brier_curve(model, validation, grid))
