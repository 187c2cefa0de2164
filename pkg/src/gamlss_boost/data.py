"""Core data model: datasets, fit configuration, traces and fitted models.

Everything here is immutable after construction. Arrays handed to a
:class:`Dataset` are copied and flagged read-only so the same object can
be shared between folds, replicates and worker processes.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np

from .errors import DataError, DomainError

if TYPE_CHECKING:
    from .steps import SchemeSpec


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Dataset:
    """Response vector ``y`` and covariate matrix ``X`` (n x p)."""

    y: np.ndarray
    X: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        y = _frozen(self.y)
        X = _frozen(self.X)
        if X.ndim == 1 and X.size == 0:
            X = _frozen(np.empty((y.size, 0)))
        if y.ndim != 1:
            raise DataError("response must be one-dimensional")
        if X.ndim != 2:
            raise DataError("covariate matrix must be two-dimensional")
        if X.shape[0] != y.size:
            raise DataError(f"response has {y.size} rows but X has {X.shape[0]}")
        names = tuple(str(s) for s in self.names)
        if len(names) != X.shape[1]:
            raise DataError(f"{len(names)} names given for {X.shape[1]} covariates")
        if y.size == 0:
            raise DataError("dataset has no rows")
        if not np.all(np.isfinite(y)):
            i = int(np.flatnonzero(~np.isfinite(y))[0])
            raise DataError(f"non-finite response at row {i + 1}")
        if not np.all(np.isfinite(X)):
            i, j = np.argwhere(~np.isfinite(X))[0]
            raise DataError(f"non-finite value at row {i + 1}, column {names[j]}")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(self.y[rows], self.X[rows], self.names)

    def check_family(self, family_id: str) -> None:
        """Raise :class:`DomainError` if ``y`` is outside the family's support."""
        y = self.y
        if family_id == "weibull":
            if np.any(y <= 0):
                i = int(np.flatnonzero(y <= 0)[0])
                raise DomainError(f"Weibull response must be > 0 (row {i + 1})")
        elif family_id == "negbin":
            bad = (y < 0) | (y != np.round(y))
            if np.any(bad):
                i = int(np.flatnonzero(bad)[0])
                raise DomainError(
                    f"negative binomial response must be a non-negative integer (row {i + 1})"
                )


def load_csv(path, response_column: str) -> Dataset:
    """Read a comma-separated file with a header row.

    Every column other than ``response_column`` becomes a covariate, in
    file order.
    """
    if not os.path.isfile(path):
        raise DataError(f"file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"empty file: {path}") from None
        if response_column not in header:
            raise DataError(f"response column '{response_column}' not found in header")
        rows = []
        for r, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"row {r} has {len(row)} fields, expected {len(header)}")
            values = []
            for c, cell in enumerate(row):
                cell = cell.strip()
                if cell == "":
                    raise DataError(f"missing value at row {r}, column {header[c]}")
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"non-numeric value '{cell}' at row {r}, column {header[c]}"
                    ) from None
                if not math.isfinite(v):
                    raise DataError(f"non-finite value at row {r}, column {header[c]}")
                values.append(v)
            rows.append(values)
    if not rows:
        raise DataError(f"no data rows in {path}")
    table = np.array(rows, dtype=float)
    ry = header.index(response_column)
    cols = [j for j in range(len(header)) if j != ry]
    return Dataset(table[:, ry], table[:, cols], [header[j] for j in cols])


def write_csv(d: Dataset, path, response_column: str = "y") -> None:
    """Write ``d`` with the response as the first column."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([response_column, *d.names])
        for i in range(d.n):
            w.writerow([repr(float(d.y[i])), *(repr(float(v)) for v in d.X[i])])


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_holdout(d: Dataset, fraction: float, seed) -> tuple[Dataset, Dataset]:
    """Random disjoint train/validation split with ``round(fraction * n)`` validation rows."""
    train_idx, val_idx = holdout_indices(d.n, fraction, seed)
    return d.subset(train_idx), d.subset(val_idx)


def holdout_indices(n: int, fraction: float, seed) -> tuple[np.ndarray, np.ndarray]:
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    if n < 3:
        raise ValueError("need at least 3 rows to split")
    n_val = min(max(round_half_up(fraction * n), 1), n - 1)
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


@dataclass(frozen=True)
class FitConfig:
    family: str
    scheme: "SchemeSpec"
    m_stop: int
    lambda_s: float = 0.1
    rng_seed: int = 1

    def __post_init__(self):
        if int(self.m_stop) < 1:
            raise ValueError("m_stop must be >= 1")
        if not 0.0 < self.lambda_s <= 1.0:
            raise ValueError("lambda_s must lie in (0, 1]")

    def with_mstop(self, m_stop: int) -> "FitConfig":
        return replace(self, m_stop=int(m_stop))


@dataclass(frozen=True)
class FitTrace:
    """Per-iteration record of a boosting run.

    Arrays indexed ``[m, k]`` hold one entry per iteration and distribution
    parameter; ``applied[m]`` is the parameter updated in iteration ``m``.
    ``nu_star`` is NaN where no optimal step was computed (fixed or ratio
    rules); ``nu_star_ls`` is only filled by shadow line searches.
    """

    applied: np.ndarray
    covariate: np.ndarray
    nu: np.ndarray
    nu_star: np.ndarray
    sqnorm: np.ndarray
    zeta: np.ndarray
    rho: np.ndarray
    loss: np.ndarray
    intercept: np.ndarray
    slope: np.ndarray
    boundary: np.ndarray
    fallback: np.ndarray
    nu_star_ls: np.ndarray | None = None

    @property
    def m_stop(self) -> int:
        return self.applied.size

    @property
    def K(self) -> int:
        return self.nu.shape[1]


@dataclass(frozen=True)
class FittedModel:
    """Linear GAMLSS predictors: ``eta_k = offset_k + intercept_k + X @ coef_k``."""

    family: str
    offsets: np.ndarray
    intercepts: np.ndarray
    coef: np.ndarray
    names: tuple[str, ...]
    m_stop: int
    scheme: str = ""
    lambda_s: float = 0.1
    param_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "offsets", _frozen(self.offsets))
        object.__setattr__(self, "intercepts", _frozen(self.intercepts))
        coef = _frozen(self.coef)
        if coef.ndim == 1:
            coef = _frozen(coef.reshape(len(self.offsets), -1))
        object.__setattr__(self, "coef", coef)
        object.__setattr__(self, "names", tuple(self.names))
        names = tuple(self.param_names)
        if not names:
            from .families import get_family

            names = get_family(self.family).param_names
        object.__setattr__(self, "param_names", names)

    @property
    def p(self) -> int:
        return self.coef.shape[1]

    def predict_eta(self, X) -> np.ndarray:
        """Linear predictors, shape (K, n_new)."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, self.p) if self.p else X.reshape(-1, 0)
        if X.shape[1] != self.p:
            raise ValueError(f"X has {X.shape[1]} columns, model expects {self.p}")
        base = (self.offsets + self.intercepts)[:, None]
        return base + self.coef @ X.T

    def predict(self, X) -> np.ndarray:
        """Distribution parameters on their natural scale, shape (n_new, K)."""
        from .families import get_family

        fam = get_family(self.family)
        eta = self.predict_eta(X)
        return np.column_stack([fam.link_inverse(k, eta[k]) for k in range(fam.K)])

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "scheme": self.scheme,
            "lambda_s": self.lambda_s,
            "m_stop": self.m_stop,
            "parameters": list(self.param_names),
            "covariates": list(self.names),
            "offsets": [float(v) for v in self.offsets],
            "intercepts": [float(v) for v in self.intercepts],
            "coefficients": [[float(v) for v in row] for row in self.coef],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FittedModel":
        K = len(d["offsets"])
        coef = np.array(d["coefficients"], dtype=float).reshape(K, len(d["covariates"]))
        return cls(
            family=d["family"],
            offsets=d["offsets"],
            intercepts=d["intercepts"],
            coef=coef,
            names=d["covariates"],
            m_stop=int(d["m_stop"]),
            scheme=d.get("scheme", ""),
            lambda_s=float(d.get("lambda_s", 0.1)),
            param_names=d.get("parameters", ()),
        )

    def save_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load_json(cls, path) -> "FittedModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

