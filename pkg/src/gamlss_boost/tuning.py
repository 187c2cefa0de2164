"""Early stopping: choose the number of boosting iterations by k-fold CV."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, FitConfig, round_half_up
from .engine import boost_fit, eta_path
from .errors import GamlssBoostError
from .families import get_family
from .parallel import parallel_map

FIXED_MAX_M = 2000
ADAPTIVE_MAX_M = 500


def default_max_m(scheme_name: str) -> int:
    return FIXED_MAX_M if scheme_name == "F-F" else ADAPTIVE_MAX_M


def fold_assignment(n: int, folds: int, seed) -> list[np.ndarray]:
    """Seeded shuffle split into ``folds`` groups whose sizes differ by at most one."""
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if n < folds:
        raise ValueError(f"cannot split {n} rows into {folds} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(perm, folds)]


def heldout_risk_path(d_train: Dataset, d_val: Dataset, cfg: FitConfig) -> np.ndarray:
    """Mean held-out negative log-likelihood after each of ``cfg.m_stop`` iterations."""
    fam = get_family(cfg.family)
    model, trace = boost_fit(d_train, cfg)
    out = np.empty(cfg.m_stop)
    y = d_val.y
    for m, eta in enumerate(eta_path(model.offsets, trace, d_val.X)):
        out[m] = fam.neg_log_lik(eta, y) / y.size
    return out


def _fold_job(args):
    d, cfg, idx_val, fold = args
    mask = np.ones(d.n, dtype=bool)
    mask[idx_val] = False
    try:
        return heldout_risk_path(d.subset(np.flatnonzero(mask)), d.subset(idx_val), cfg)
    except GamlssBoostError as exc:
        raise type(exc)(f"fold {fold + 1}: {exc}") from exc


def kfold_cv(d: Dataset, cfg: FitConfig, folds: int, max_m: int, seed, jobs: int = 1):
    """Return ``(risk_curve, m_stop)``; ``risk_curve[m-1]`` is the CV risk after m iterations."""
    if max_m < 1:
        raise ValueError("max_m must be >= 1")
    parts = fold_assignment(d.n, folds, seed)
    run_cfg = cfg.with_mstop(max_m)
    curves = parallel_map(
        _fold_job, [(d, run_cfg, idx, f) for f, idx in enumerate(parts)], jobs
    )
    curve = np.mean(np.vstack(curves), axis=0)
    if not np.all(np.isfinite(curve)):
        raise FloatingPointError("non-finite cross-validated risk")
    return curve, int(np.argmin(curve)) + 1


def type7_quantile(values, q: float) -> float:
    """Linear-interpolation sample quantile on the sorted values."""
    v = np.sort(np.asarray(values, dtype=float))
    h = (v.size - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, v.size - 1)
    frac = h - lo
    if frac == 0.0 or v[hi] == v[lo]:
        return float(v[lo])
    return float(v[lo] + frac * (v[hi] - v[lo]))


@dataclass(frozen=True)
class RepeatedCV:
    m_stop: int
    q1: int
    q3: int
    per_repeat: tuple[int, ...]
    mean_curve: np.ndarray


def derived_seeds(seed, count: int) -> list[int]:
    ss = np.random.SeedSequence(seed)
    return [int(c.generate_state(1)[0]) for c in ss.spawn(count)]


def repeated_cv(d, cfg, folds, max_m, n_repeats, seed, jobs: int = 1) -> RepeatedCV:
    """CV over ``n_repeats`` fold draws; median and quartiles of the chosen m_stop."""
    if n_repeats < 1:
        raise ValueError("n_repeats must be >= 1")
    seeds = [seed] if n_repeats == 1 else derived_seeds(seed, n_repeats)
    curves, stops = [], []
    for s in seeds:
        curve, ms = kfold_cv(d, cfg, folds, max_m, s, jobs)
        curves.append(curve)
        stops.append(ms)
    return RepeatedCV(
        m_stop=round_half_up(type7_quantile(stops, 0.5)),
        q1=round_half_up(type7_quantile(stops, 0.25)),
        q3=round_half_up(type7_quantile(stops, 0.75)),
        per_repeat=tuple(stops),
        mean_curve=np.mean(np.vstack(curves), axis=0),
    )
