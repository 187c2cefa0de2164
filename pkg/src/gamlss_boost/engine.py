"""Non-cyclical component-wise boosting for linear GAMLSS.

Each iteration fits the best single-covariate learner to the negative
gradient of every distribution parameter, computes all step lengths, and
then updates only the parameter whose candidate update yields the
smallest loss.
"""

from __future__ import annotations

import numpy as np

from .base_learners import DesignCache, select_best
from .data import Dataset, FitConfig, FittedModel, FitTrace
from .errors import FitError, GamlssBoostError
from .families import get_family
from .steps import StepLengthCache, compute_iteration_steps


def _standardizer(X):
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return mean, sd


def boost_fit(
    d: Dataset,
    cfg: FitConfig,
    shadow_line_search: bool = False,
    standardize: bool = False,
) -> tuple[FittedModel, FitTrace]:
    """Run ``cfg.m_stop`` boosting iterations on ``d``.

    With ``standardize`` the covariates are centred and scaled before
    fitting; the returned model is mapped back to the raw covariate scale
    while the trace keeps the standardized base-learner coefficients.
    """
    fam = get_family(cfg.family)
    d.check_family(fam.id)
    cfg.scheme.validate(fam)
    y = d.y
    X = d.X
    if standardize and d.p:
        x_mean, x_sd = _standardizer(X)
        X = (X - x_mean) / x_sd
    n, p = X.shape
    K = fam.K
    M = int(cfg.m_stop)

    offsets = fam.init_offsets(y)
    etas = np.repeat(offsets[:, None], n, axis=1)
    design = DesignCache(X)
    cache = StepLengthCache()
    beta0 = np.zeros(K)
    coef = np.zeros((K, p))

    applied = np.empty(M, dtype=int)
    covariate = np.empty((M, K), dtype=int)
    nu_t = np.empty((M, K))
    nu_star_t = np.empty((M, K))
    sqnorm_t = np.empty((M, K))
    zeta_t = np.empty((M, K))
    rho_t = np.empty((M, K))
    loss_t = np.empty(M)
    a_t = np.empty((M, K))
    b_t = np.empty((M, K))
    boundary_t = np.zeros((M, K), dtype=bool)
    fallback_t = np.zeros((M, K), dtype=bool)
    shadow_t = np.full((M, K), np.nan) if shadow_line_search else None

    work = etas.copy()
    rho = np.empty(K)
    for m in range(M):
        try:
            learners = []
            for k in range(K):
                u = fam.negative_gradient(k, etas, y)
                learners.append(select_best(u, None, design)[1])
            st = compute_iteration_steps(
                fam, cfg.scheme, learners, etas, y, cache, cfg.lambda_s, shadow_line_search
            )
            for k in range(K):
                work[k] = etas[k] + st.nu[k] * learners[k].h
                rho[k] = fam.neg_log_lik(work, y)
                work[k] = etas[k]
        except GamlssBoostError as exc:
            raise FitError(f"iteration {m + 1}: {exc}", iteration=m + 1) from exc
        ks = int(np.argmin(rho))
        bl = learners[ks]
        step = st.nu[ks]
        etas[ks] += step * bl.h
        work[ks] = etas[ks]
        beta0[ks] += step * bl.a
        if bl.j >= 0:
            coef[ks, bl.j] += step * bl.b

        applied[m] = ks
        loss_t[m] = rho[ks]
        for k in range(K):
            lk = learners[k]
            covariate[m, k] = lk.j
            sqnorm_t[m, k] = lk.sqnorm
            a_t[m, k] = lk.a
            b_t[m, k] = lk.b
        nu_t[m] = st.nu
        nu_star_t[m] = st.nu_star
        zeta_t[m] = st.nu * sqnorm_t[m]
        rho_t[m] = rho
        boundary_t[m] = st.boundary
        fallback_t[m] = st.fallback
        if shadow_t is not None:
            shadow_t[m] = st.nu_star_ls

    if standardize and p:
        raw = coef / x_sd
        beta0 = beta0 - raw @ x_mean
        coef = raw

    model = FittedModel(
        family=fam.id,
        offsets=offsets,
        intercepts=beta0,
        coef=coef,
        names=d.names,
        m_stop=M,
        scheme=cfg.scheme.name,
        lambda_s=cfg.lambda_s,
        param_names=fam.param_names,
    )
    trace = FitTrace(
        applied=applied,
        covariate=covariate,
        nu=nu_t,
        nu_star=nu_star_t,
        sqnorm=sqnorm_t,
        zeta=zeta_t,
        rho=rho_t,
        loss=loss_t,
        intercept=a_t,
        slope=b_t,
        boundary=boundary_t,
        fallback=fallback_t,
        nu_star_ls=shadow_t,
    )
    return model, trace


def eta_path(offsets, trace: FitTrace, X, upto: int | None = None):
    """Yield the linear predictors (K, n) on ``X`` after each applied update.

    ``X`` must be on the scale the trace was fitted on.
    """
    X = np.asarray(X, dtype=float)
    eta = np.repeat(np.asarray(offsets, dtype=float)[:, None], X.shape[0], axis=1)
    M = trace.m_stop if upto is None else min(upto, trace.m_stop)
    for m in range(M):
        k = trace.applied[m]
        j = trace.covariate[m, k]
        step = trace.nu[m, k]
        a, b = trace.intercept[m, k], trace.slope[m, k]
        if j >= 0:
            eta[k] += step * (a + b * X[:, j])
        else:
            eta[k] += step * a
        yield eta


def coefficients_from_trace(trace: FitTrace, p: int, upto: int | None = None):
    """Accumulate (intercepts, coef) from the applied updates of a trace."""
    K = trace.K
    beta0 = np.zeros(K)
    coef = np.zeros((K, p))
    M = trace.m_stop if upto is None else min(upto, trace.m_stop)
    for m in range(M):
        k = trace.applied[m]
        j = trace.covariate[m, k]
        step = trace.nu[m, k]
        beta0[k] += step * trace.intercept[m, k]
        if j >= 0:
            coef[k, j] += step * trace.slope[m, k]
    return beta0, coef


def predict(model: FittedModel, X_new) -> np.ndarray:
    """Natural-scale distribution parameters, shape (n_new, K)."""
    return model.predict(X_new)
