"""Step-length rules for the boosting update of each distribution parameter.

Rules per parameter:

* ``Fixed(value)``      constant step, never shrunk
* ``LineSearch(lo, hi)`` shrunk numeric optimum ``lambda_s * nu*``
* ``Analytic(hi)``      shrunk closed-form (approximate) optimum
* ``BLRatio(reference)`` reference step rescaled by the ratio of squared
  base-learner norms, which makes both candidate update sizes equal
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import DegenerateBaseLearnerError, NonFiniteError, SchemeError
from .families import Family, get_family

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

# default search intervals per family and parameter
DEFAULT_INTERVALS = {
    "gaussian": ((0.0, 10.0), (0.0, 10.0)),
    "negbin": ((0.0, 20.0), (0.0, 200.0)),
    "weibull": ((0.0, 20.0), (0.0, 20.0)),
}
DEFAULT_TOL = 1e-4
ANALYTIC_PARAMS = {("gaussian", 0), ("negbin", 0), ("weibull", 0)}


@dataclass(frozen=True)
class Fixed:
    value: float = 0.1


@dataclass(frozen=True)
class LineSearch:
    lo: float = 0.0
    hi: float = 10.0
    tol: float = DEFAULT_TOL


@dataclass(frozen=True)
class Analytic:
    # interval of the seeding / fallback line search; also the clamp bound
    hi: float = 20.0
    tol: float = DEFAULT_TOL


@dataclass(frozen=True)
class BLRatio:
    reference: int


Rule = Union[Fixed, LineSearch, Analytic, BLRatio]


@dataclass(frozen=True)
class SchemeSpec:
    rules: tuple
    name: str = ""

    def validate(self, family) -> None:
        fam = get_family(family)
        if len(self.rules) != fam.K:
            raise SchemeError(f"scheme has {len(self.rules)} rules, family needs {fam.K}")
        bl = [k for k, r in enumerate(self.rules) if isinstance(r, BLRatio)]
        if len(bl) > 1:
            raise SchemeError("at most one parameter may use a base-learner ratio step")
        for k in bl:
            ref = self.rules[k].reference
            if ref == k or not 0 <= ref < fam.K:
                raise SchemeError(f"invalid reference parameter {ref}")
            if isinstance(self.rules[ref], BLRatio):
                raise SchemeError("reference parameter cannot itself use a ratio step")
        for k, r in enumerate(self.rules):
            if isinstance(r, Analytic) and (fam.id, k) not in ANALYTIC_PARAMS:
                raise SchemeError(
                    f"no analytic step length for {fam.param_names[k]} in family {fam.id}"
                )
            if isinstance(r, LineSearch) and not r.lo < r.hi:
                raise SchemeError("line-search interval must satisfy lo < hi")


PRESETS = ("F-F", "LS-LS", "A-LS", "A-BL", "BL-F", "F-BL")


def valid_presets(family) -> tuple[str, ...]:
    fam = get_family(family)
    if fam.id == "gaussian":
        return ("F-F", "LS-LS", "A-LS", "A-BL", "BL-F")
    return ("F-F", "LS-LS", "A-LS", "A-BL", "F-BL")


def preset(name: str, family, fixed: float = 0.1) -> SchemeSpec:
    """Expand a named scheme (first component: parameter 1, second: parameter 2)."""
    fam = get_family(family)
    if name not in valid_presets(fam):
        raise SchemeError(
            f"scheme '{name}' is not available for family {fam.id}; "
            f"valid presets: {', '.join(valid_presets(fam))}"
        )
    (lo0, hi0), (lo1, hi1) = DEFAULT_INTERVALS[fam.id]
    ls0, ls1 = LineSearch(lo0, hi0), LineSearch(lo1, hi1)
    an = Analytic(hi0)
    rules = {
        "F-F": (Fixed(fixed), Fixed(fixed)),
        "LS-LS": (ls0, ls1),
        "A-LS": (an, ls1),
        "A-BL": (an, BLRatio(0)),
        "BL-F": (BLRatio(1), Fixed(fixed)),
        "F-BL": (Fixed(fixed), BLRatio(0)),
    }[name]
    spec = SchemeSpec(rules, name)
    spec.validate(fam)
    return spec


class StepLengthCache:
    """Last unshrunk optimal step per (parameter, covariate) and per parameter."""

    def __init__(self):
        self.by_covariate: dict[tuple[int, int], float] = {}
        self.by_parameter: dict[int, float] = {}

    def lookup(self, k: int, j: int):
        v = self.by_covariate.get((k, j))
        if v is None:
            v = self.by_parameter.get(k)
        return v

    def store(self, k: int, j: int, value: float) -> None:
        if not (math.isfinite(value) and value > 0):
            return
        self.by_covariate[(k, j)] = value
        self.by_parameter[k] = value


class LineSearchResult(NamedTuple):
    nu: float
    at_boundary: bool


def golden_section(f, lo: float, hi: float, tol: float) -> float:
    """Minimiser of a unimodal ``f`` on [lo, hi] to a final bracket width below ``tol``."""
    a, b = float(lo), float(hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a >= tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def loss_along(family: Family, etas, k: int, h, y):
    """``nu -> loss(etas with eta_k + nu*h)``; overflow to +inf is returned as inf."""
    return get_family(family).loss_along(etas, k, h, y)


def line_search(family, etas, k, h, y, lo=0.0, hi=10.0, tol=DEFAULT_TOL) -> LineSearchResult:
    """Golden-section search for the unshrunk optimal step along ``h``."""
    family = get_family(family)
    if not lo < hi:
        raise ValueError("line search needs lo < hi")
    h = np.asarray(h, dtype=float)
    if not np.any(h != 0):
        raise DegenerateBaseLearnerError("line search along a zero base-learner")
    f = loss_along(family, etas, k, h, y)
    nu = golden_section(f, lo, hi, tol)
    if hi - nu < tol:
        return LineSearchResult(float(hi), True)
    if not math.isfinite(f(nu)):
        raise NonFiniteError("line search ended on a non-finite loss")
    return LineSearchResult(float(nu), False)


def analytic_gaussian_mu(etas, h, y) -> float:
    """Exact optimal step for the identity-link Gaussian location update."""
    h = np.asarray(h, dtype=float)
    w = np.exp(-2.0 * np.asarray(etas[1], dtype=float))
    den = float(np.sum(h * h * w))
    if not den > 0:
        raise DegenerateBaseLearnerError("zero denominator in Gaussian location step")
    return float(np.sum(h * (np.asarray(y) - etas[0]) * w)) / den


def approx_nb_mu_step(etas, h, y, nu_prev: float) -> float:
    """First-order approximation of the NB location optimum around ``nu_prev``."""
    h = np.asarray(h, dtype=float)
    if not np.any(h != 0):
        raise DegenerateBaseLearnerError("zero base-learner in NB location step")
    with np.errstate(over="ignore", invalid="ignore"):
        E = np.exp(etas[0] + nu_prev * h)
        D = 1.0 + np.exp(etas[1]) * E
        num = np.sum(h * (y - E * (1.0 - h * nu_prev)) / D)
        den = np.sum(h * h * E / D)
        return float(num / den)


def approx_weibull_lambda_step(etas, h, y, nu_prev: float) -> float:
    """First-order approximation of the Weibull scale optimum around ``nu_prev``."""
    h = np.asarray(h, dtype=float)
    if not np.any(h != 0):
        raise DegenerateBaseLearnerError("zero base-learner in Weibull scale step")
    with np.errstate(over="ignore", invalid="ignore"):
        k = np.exp(etas[1])
        # y^k * exp(eta + nu_prev*h)^(-k)
        q = np.exp(k * (np.log(y) - etas[0] - nu_prev * h))
        num = np.sum(h * k) - np.sum(h * k * q * (1.0 + k * h * nu_prev))
        den = np.sum(h * h * k * k * q)
        return float(-num / den)


_APPROX = {"negbin": approx_nb_mu_step, "weibull": approx_weibull_lambda_step}


class AnalyticResult(NamedTuple):
    nu: float
    fallback: bool
    at_boundary: bool


def _cached_analytic(family, etas, h, y, cache, j, hi, tol, k=0) -> AnalyticResult:
    fam = get_family(family)
    approx = _APPROX[fam.id]
    prev = cache.lookup(k, j)
    fallback = boundary = False
    if prev is None:
        nu, boundary = line_search(fam, etas, k, h, y, 0.0, hi, tol)
    else:
        nu = approx(etas, h, y, prev)
        if not (math.isfinite(nu) and nu > 0):
            fallback = True
            nu, boundary = line_search(fam, etas, k, h, y, 0.0, hi, tol)
        else:
            nu = min(nu, hi)
    cache.store(k, j, nu)
    return AnalyticResult(nu, fallback, boundary)


def analytic_nb_mu(etas, h, y, cache: StepLengthCache, j: int, hi=20.0, tol=DEFAULT_TOL):
    return _cached_analytic("negbin", etas, h, y, cache, j, hi, tol)


def analytic_weibull_lambda(etas, h, y, cache: StepLengthCache, j: int, hi=20.0, tol=DEFAULT_TOL):
    return _cached_analytic("weibull", etas, h, y, cache, j, hi, tol)


def bl_ratio(nu_ref: float, sqnorm_ref: float, sqnorm_other: float) -> float:
    if not sqnorm_other > 0:
        raise DegenerateBaseLearnerError("degenerate base-learner")
    return nu_ref * (sqnorm_ref / sqnorm_other)


@dataclass
class IterationSteps:
    nu: np.ndarray
    nu_star: np.ndarray
    boundary: np.ndarray
    fallback: np.ndarray
    nu_star_ls: np.ndarray


def compute_iteration_steps(
    family,
    scheme: SchemeSpec,
    learners,
    etas,
    y,
    cache: StepLengthCache,
    lambda_s: float,
    shadow_line_search: bool = False,
) -> IterationSteps:
    """Step lengths for all parameters once every best base-learner is known."""
    fam = get_family(family)
    K = fam.K
    nu = np.full(K, np.nan)
    nu_star = np.full(K, np.nan)
    boundary = np.zeros(K, dtype=bool)
    fallback = np.zeros(K, dtype=bool)
    shadow = np.full(K, np.nan)
    order = [k for k in range(K) if not isinstance(scheme.rules[k], BLRatio)]
    order += [k for k in range(K) if isinstance(scheme.rules[k], BLRatio)]
    for k in order:
        rule = scheme.rules[k]
        bl = learners[k]
        if isinstance(rule, Fixed):
            nu[k] = rule.value
        elif isinstance(rule, BLRatio):
            ref = rule.reference
            nu[k] = bl_ratio(nu[ref], learners[ref].sqnorm, bl.sqnorm)
        elif bl.sqnorm == 0.0:
            nu_star[k] = 0.0
            nu[k] = 0.0
        elif isinstance(rule, LineSearch):
            res = line_search(fam, etas, k, bl.h, y, rule.lo, rule.hi, rule.tol)
            nu_star[k], boundary[k] = res
            nu[k] = lambda_s * res.nu
        elif isinstance(rule, Analytic):
            if fam.id == "gaussian":
                nu_star[k] = analytic_gaussian_mu(etas, bl.h, y)
            else:
                res = _cached_analytic(fam, etas, bl.h, y, cache, bl.j, rule.hi, rule.tol, k)
                nu_star[k], fallback[k], boundary[k] = res
            nu[k] = lambda_s * nu_star[k]
            if shadow_line_search:
                shadow[k] = line_search(fam, etas, k, bl.h, y, 0.0, rule.hi, rule.tol).nu
        else:
            raise SchemeError(f"unknown rule {rule!r}")
    return IterationSteps(nu, nu_star, boundary, fallback, shadow)
