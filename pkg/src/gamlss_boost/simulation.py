"""Synthetic data settings and the multi-replicate scheme comparison study."""

from __future__ import annotations

import csv
import os
import time
from dataclasses import dataclass

import numpy as np

from .data import Dataset, FitConfig
from .engine import boost_fit
from .families import get_family
from .metrics import coefficient_table, selection_metrics
from .parallel import parallel_map
from .steps import preset
from .tuning import default_max_m, kfold_cv, type7_quantile


@dataclass(frozen=True)
class SimTruth:
    family: str
    intercepts: np.ndarray
    slopes: np.ndarray

    @property
    def informative(self) -> list[set[int]]:
        return [set(np.flatnonzero(row).tolist()) for row in self.slopes]


def _names(p):
    return [f"x{j + 1}" for j in range(p)]


def _truth(family, intercepts, slopes6, p):
    slopes = np.zeros((2, p))
    slopes[:, :6] = slopes6
    return SimTruth(family, np.asarray(intercepts, dtype=float), slopes)


GAUSSIAN_TRUTH = ((0.0, 2.0), ((1.0, 2.0, 0.5, -1.0, 0.0, 0.0), (0.0, 0.0, 0.2, 0.1, -0.1, -0.2)))
NEGBIN_TRUTH = ((-0.5, 0.0), ((-0.5, 0.3, 0.0, 0.5, -0.3, 0.0), (0.0, 0.6, -0.6, 0.0, -0.4, 0.4)))
WEIBULL_TRUTH = ((0.6, 0.0), ((0.15, -0.2, 0.4, -0.25, 0.0, 0.0), (0.0, 0.0, -0.15, 0.15, -0.1, 0.1)))


def simulate_gaussian(n: int, extra_noise: int = 0, seed=None):
    """Normal(mu, sigma) location-scale setting with six uniform covariates."""
    rng = np.random.default_rng(seed)
    p = 6 + extra_noise
    X = rng.uniform(-1.0, 1.0, (n, p))
    truth = _truth("gaussian", *GAUSSIAN_TRUTH, p)
    eta = truth.intercepts[:, None] + truth.slopes @ X.T
    y = rng.normal(eta[0], np.exp(eta[1]))
    return Dataset(y, X, _names(p)), truth


def sample_negbin(mu, alpha, rng):
    """NB2 draws through the Gamma-Poisson mixture."""
    g = rng.gamma(1.0 / alpha, alpha)
    return rng.poisson(mu * g).astype(float)


def simulate_negbin(n: int, extra_noise: int = 0, seed=None, alpha_override=None):
    """NB location-scale setting: x1..x3 uniform, x4..x6 Bernoulli(0.5).

    ``alpha_override`` replaces the overdispersion of every observation.
    """
    rng = np.random.default_rng(seed)
    p = 6 + extra_noise
    X = np.empty((n, p))
    X[:, :3] = rng.uniform(-1.0, 1.0, (n, 3))
    X[:, 3:6] = rng.binomial(1, 0.5, (n, 3))
    X[:, 6:] = rng.uniform(-1.0, 1.0, (n, extra_noise))
    truth = _truth("negbin", *NEGBIN_TRUTH, p)
    eta = truth.intercepts[:, None] + truth.slopes @ X.T
    alpha = np.exp(eta[1]) if alpha_override is None else np.full(n, float(alpha_override))
    y = sample_negbin(np.exp(eta[0]), alpha, rng)
    return Dataset(y, X, _names(p)), truth


def sample_weibull(lam, k, rng):
    """Inverse-CDF Weibull draws: lambda * (-ln U)^(1/k)."""
    u = rng.uniform(size=np.shape(lam))
    return lam * (-np.log(u)) ** (1.0 / k)


def simulate_weibull(n: int, extra_noise: int = 0, seed=None):
    """Weibull scale-shape setting with six uniform covariates."""
    rng = np.random.default_rng(seed)
    p = 6 + extra_noise
    X = rng.uniform(-1.0, 1.0, (n, p))
    truth = _truth("weibull", *WEIBULL_TRUTH, p)
    eta = truth.intercepts[:, None] + truth.slopes @ X.T
    y = sample_weibull(np.exp(eta[0]), np.exp(eta[1]), rng)
    return Dataset(y, X, _names(p)), truth


SIMULATORS = {
    "gaussian": simulate_gaussian,
    "negbin": simulate_negbin,
    "weibull": simulate_weibull,
}


def replicate_seeds(seed: int, noise: int, replicate: int) -> tuple[np.random.SeedSequence, int]:
    """Independent data stream and CV seed for one (noise level, replicate) cell."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(noise), int(replicate)))
    data_ss, cv_ss = ss.spawn(2)
    return data_ss, int(cv_ss.generate_state(1)[0])


@dataclass(frozen=True)
class StudyResult:
    setting: str
    schemes: tuple[str, ...]
    metrics: list
    coefficients: list

    @property
    def param_names(self) -> tuple[str, ...]:
        return get_family(self.setting).param_names

    def column(self, scheme, noise, key):
        return [
            r[key] for r in self.metrics if r["scheme"] == scheme and r["noise"] == noise
        ]

    def summary(self) -> list[dict]:
        """Quartiles of stopping iteration, run time and selection metrics per cell."""
        pn = self.param_names
        keys = ["m_stop", "seconds", "SCR"]
        keys += [f"FP_{p}" for p in pn] + [f"FN_{p}" for p in pn]
        keys += [f"selected_{p}" for p in pn]
        out = []
        noises = sorted({r["noise"] for r in self.metrics})
        for scheme in self.schemes:
            for noise in noises:
                rows = [
                    r for r in self.metrics if r["scheme"] == scheme and r["noise"] == noise
                ]
                if not rows:
                    continue
                for label, q in (("1st Qu.", 0.25), ("Median", 0.5), ("3rd Qu.", 0.75)):
                    rec = {"scheme": scheme, "noise": noise, "statistic": label}
                    for key in keys:
                        rec[key] = type7_quantile([r[key] for r in rows], q)
                    out.append(rec)
        return out

    def write_csv(self, out_dir, timing: bool = True) -> list[str]:
        os.makedirs(out_dir, exist_ok=True)
        paths = []
        for name, rows in (
            ("study_coefficients.csv", self.coefficients),
            ("study_metrics.csv", self.metrics),
            ("study_summary.csv", self.summary()),
        ):
            path = os.path.join(out_dir, name)
            _write_rows(path, rows, timing)
            paths.append(path)
        return paths


def _fmt(value, key, timing):
    if key == "seconds" and not timing:
        return "NA"
    if isinstance(value, float):
        return repr(value)
    return value


def _write_rows(path, rows, timing=True):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if not rows:
            return
        w = csv.writer(fh, lineterminator="\n")
        header = list(rows[0])
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r[k], k, timing) for k in header])


def _study_cell(args):
    setting, schemes, n, noise, rep, folds, seed, max_m, lambda_s = args
    data_ss, cv_seed = replicate_seeds(seed, noise, rep)
    d, truth = SIMULATORS[setting](n, noise, data_ss)
    fam = get_family(setting)
    metric_rows, coef_rows = [], []
    for scheme in schemes:
        spec = preset(scheme, fam)
        cfg = FitConfig(setting, spec, 1, lambda_s)
        mm = max_m.get(scheme) if isinstance(max_m, dict) else max_m
        mm = mm or default_max_m(scheme)
        t0 = time.perf_counter()
        _, m_stop = kfold_cv(d, cfg, folds, mm, cv_seed)
        model, _ = boost_fit(d, cfg.with_mstop(m_stop))
        seconds = time.perf_counter() - t0
        sm = selection_metrics(model, truth)
        row = {"scheme": scheme, "noise": noise, "replicate": rep, "SCR": sm.scr}
        for k, pname in enumerate(fam.param_names):
            row[f"FP_{pname}"] = sm.fp[k]
        for k, pname in enumerate(fam.param_names):
            row[f"FN_{pname}"] = sm.fn[k]
        for k, pname in enumerate(fam.param_names):
            row[f"selected_{pname}"] = sm.selected[k]
        row["m_stop"] = m_stop
        row["seconds"] = seconds
        metric_rows.append(row)
        for c in coefficient_table(model, truth):
            coef_rows.append(
                {
                    "scheme": scheme,
                    "noise": noise,
                    "replicate": rep,
                    **c,
                    "m_stop": m_stop,
                    "seconds": seconds,
                }
            )
    return metric_rows, coef_rows


def run_study(
    setting: str,
    schemes,
    B: int,
    n: int = 500,
    noise_levels=(0,),
    folds: int = 10,
    seed: int = 1,
    max_m=None,
    lambda_s: float = 0.1,
    jobs: int = 1,
) -> StudyResult:
    """Simulate, tune by CV, refit and score every (scheme, noise level, replicate).

    All schemes of one replicate see the same data and the same folds.
    ``max_m`` is an int, a per-scheme dict, or ``None`` for the defaults.
    """
    if B < 1:
        raise ValueError("need at least one replicate")
    if setting not in SIMULATORS:
        raise ValueError(f"unknown setting '{setting}'")
    schemes = tuple(schemes)
    for s in schemes:
        preset(s, setting)
    cells = [
        (setting, schemes, n, int(noise), rep, folds, seed, max_m, lambda_s)
        for noise in noise_levels
        for rep in range(1, B + 1)
    ]
    results = parallel_map(_study_cell, cells, jobs)
    metrics, coefs = [], []
    for m_rows, c_rows in results:
        metrics.extend(m_rows)
        coefs.extend(c_rows)
    order = {s: i for i, s in enumerate(schemes)}
    key = lambda r: (order[r["scheme"]], r["noise"], r["replicate"])  # noqa: E731
    metrics.sort(key=key)
    coefs.sort(key=key)
    return StudyResult(setting, schemes, metrics, coefs)
