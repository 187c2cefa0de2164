"""Response families: Gaussian location-scale, negative binomial (NB2)
location-scale and Weibull scale-shape.

Every family works on linear predictors ``etas`` of shape (K, n) with a
fixed parameter order. The boosting loss is the summed negative
log-likelihood; ``negative_gradient`` returns d loglik_i / d eta_{k,i}.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import digamma, gammaln, polygamma

from .errors import ConvergenceError, DomainError, NonFiniteError

LOG_2PI = math.log(2.0 * math.pi)
NB_ALPHA_FLOOR = 1e-4


def _check_finite(values, what):
    ok = np.isfinite(values)
    if not ok.all():
        i = int(np.flatnonzero(~ok)[0])
        raise NonFiniteError(f"non-finite {what} at observation {i}", index=i)
    return values


class Family:
    id: str = ""
    K: int = 2
    param_names: tuple[str, ...] = ()
    links: tuple[str, ...] = ()

    def link(self, k, theta):
        theta = np.asarray(theta, dtype=float)
        return theta if self.links[k] == "identity" else np.log(theta)

    def link_inverse(self, k, eta):
        eta = np.asarray(eta, dtype=float)
        return eta if self.links[k] == "identity" else np.exp(eta)

    def check_response(self, y):
        pass

    def loglik_obs(self, etas, y):
        """Per-observation log-likelihood, unchecked (may contain inf/NaN)."""
        raise NotImplementedError

    def neg_log_lik(self, etas, y) -> float:
        """Summed negative log-likelihood; raises on any non-finite term."""
        with np.errstate(all="ignore"):
            ll = self.loglik_obs(etas, y)
        total = float(np.sum(ll))
        if not math.isfinite(total):
            _check_finite(ll, "log-likelihood")
        return -total

    def loss_or_inf(self, etas, y) -> float:
        """Like :meth:`neg_log_lik` but maps overflow towards +inf to ``inf``.

        NaN or a loss diverging to -inf still raises.
        """
        with np.errstate(all="ignore"):
            ll = self.loglik_obs(etas, y)
        total = float(np.sum(ll))
        if math.isfinite(total):
            return -total
        if np.isnan(ll).any():
            i = int(np.flatnonzero(np.isnan(ll))[0])
            raise NonFiniteError(f"NaN log-likelihood at observation {i}", index=i)
        if np.any(ll == np.inf):
            i = int(np.flatnonzero(ll == np.inf)[0])
            raise NonFiniteError(f"log-likelihood diverges at observation {i}", index=i)
        return -float(np.sum(ll))

    def loss_along(self, etas, k, h, y):
        """``nu -> loss_or_inf(etas with eta_k + nu*h)``."""
        cand = np.array(etas, dtype=float, copy=True)
        base = cand[k].copy()
        h = np.asarray(h, dtype=float)

        def f(nu):
            cand[k] = base + nu * h
            return self.loss_or_inf(cand, y)

        return f

    def negative_gradient(self, k, etas, y) -> np.ndarray:
        with np.errstate(all="ignore"):
            g = self._gradient(k, etas, y)
        return _check_finite(g, f"gradient for {self.param_names[k]}")

    def _gradient(self, k, etas, y):
        raise NotImplementedError

    def init_offsets(self, y) -> np.ndarray:
        raise NotImplementedError

    def __repr__(self):
        return f"<Family {self.id}>"


class GaussianLS(Family):
    """Normal(mu, sigma); identity link for mu, log link for sigma."""

    id = "gaussian"
    param_names = ("mu", "sigma")
    links = ("identity", "log")

    def loglik_obs(self, etas, y):
        mu, eta_s = etas[0], etas[1]
        z = (y - mu) * np.exp(-eta_s)
        return -0.5 * LOG_2PI - eta_s - 0.5 * z * z

    def _gradient(self, k, etas, y):
        r = y - etas[0]
        inv_var = np.exp(-2.0 * etas[1])
        if k == 0:
            return r * inv_var
        return r * r * inv_var - 1.0

    def init_offsets(self, y):
        y = np.asarray(y, dtype=float)
        if y.size < 2:
            raise DomainError("need at least 2 observations for offsets")
        sd = float(np.std(y))
        if not sd > 0:
            raise DomainError("response has zero variance")
        return np.array([float(np.mean(y)), math.log(sd)])


# Above this ratio 1/alpha >> y the log-Gamma and digamma differences are
# evaluated by their large-argument series to avoid cancellation.
_NB_SERIES_RATIO = 1e6


def _lgamma_diff(y, r):
    """lnGamma(y + r) - lnGamma(r) - y*ln(r), elementwise."""
    big = r > _NB_SERIES_RATIO * (1.0 + y) ** 2
    if not big.any():
        return gammaln(y + r) - gammaln(r) - y * np.log(r)
    out = np.empty(big.shape)
    y_b, r_b = np.broadcast_arrays(y, r)
    if (~big).any():
        ys, rs = y_b[~big], r_b[~big]
        out[~big] = gammaln(ys + rs) - gammaln(rs) - ys * np.log(rs)
    if big.any():
        ys, rs = y_b[big], r_b[big]
        s1 = ys * (ys - 1.0) / 2.0
        s2 = ys * (ys - 1.0) * (2.0 * ys - 1.0) / 6.0
        s3 = s1 * s1
        out[big] = s1 / rs - s2 / (2.0 * rs**2) + s3 / (3.0 * rs**3)
    return out


def _digamma_diff(y, r):
    """digamma(y + r) - digamma(r), elementwise."""
    big = r > _NB_SERIES_RATIO * (1.0 + y) ** 2
    if not big.any():
        return digamma(y + r) - digamma(r)
    out = np.empty(big.shape)
    y_b, r_b = np.broadcast_arrays(y, r)
    if (~big).any():
        ys, rs = y_b[~big], r_b[~big]
        out[~big] = digamma(ys + rs) - digamma(rs)
    if big.any():
        ys, rs = y_b[big], r_b[big]
        s1 = ys * (ys - 1.0) / 2.0
        s2 = ys * (ys - 1.0) * (2.0 * ys - 1.0) / 6.0
        s3 = s1 * s1
        out[big] = ys / rs - s1 / rs**2 + s2 / rs**3 - s3 / rs**4
    return out


class NegBinLS(Family):
    """NB2 with mean mu and overdispersion alpha, Var = mu + alpha*mu^2; log links."""

    id = "negbin"
    param_names = ("mu", "alpha")
    links = ("log", "log")

    def check_response(self, y):
        y = np.asarray(y)
        if np.any(y < 0) or np.any(y != np.round(y)):
            raise DomainError("negative binomial response must be non-negative integers")

    def loglik_obs(self, etas, y):
        eta_mu, eta_a = etas[0], etas[1]
        r = np.exp(-eta_a)
        log1p_am = np.logaddexp(0.0, eta_mu + eta_a)
        # y*ln(alpha*mu) + lnGamma(y+r) - lnGamma(r) with ln(alpha) + ln(r) = 0
        return (
            y * eta_mu
            - (y + r) * log1p_am
            + _lgamma_diff(y, r)
            - gammaln(y + 1.0)
        )

    def loss_along(self, etas, k, h, y):
        # terms that do not move along the search direction are summed once
        eta_mu = np.asarray(etas[0], dtype=float)
        eta_a = np.asarray(etas[1], dtype=float)
        h = np.asarray(h, dtype=float)
        y = np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            const = -gammaln(y + 1.0)
            if k == 0:
                r = np.exp(-eta_a)
                const = const + _lgamma_diff(y, r)
            else:
                const = const + y * eta_mu
        c = float(np.sum(const))
        if not math.isfinite(c):
            return super().loss_along(etas, k, h, y)

        def f(nu):
            with np.errstate(all="ignore"):
                if k == 0:
                    em = eta_mu + nu * h
                    ll = y * em - (y + r) * np.logaddexp(0.0, em + eta_a)
                else:
                    ea = eta_a + nu * h
                    rr = np.exp(-ea)
                    ll = _lgamma_diff(y, rr) - (y + rr) * np.logaddexp(0.0, eta_mu + ea)
            total = float(np.sum(ll)) + c
            if math.isfinite(total):
                return -total
            cand = np.array(etas, dtype=float, copy=True)
            cand[k] = cand[k] + nu * h
            return self.loss_or_inf(cand, y)

        return f

    def _gradient(self, k, etas, y):
        mu = np.exp(etas[0])
        alpha = np.exp(etas[1])
        am = alpha * mu
        if k == 0:
            return (y - mu) / (1.0 + am)
        r = 1.0 / alpha
        log1p_am = np.logaddexp(0.0, etas[0] + etas[1])
        return y - mu * (alpha * y + 1.0) / (1.0 + am) + r * (log1p_am - _digamma_diff(y, r))

    def _alpha_score_and_slope(self, eta_a, mu, y):
        """Profile score in eta_alpha at fixed mu and its derivative."""
        alpha = math.exp(eta_a)
        r = 1.0 / alpha
        am = alpha * mu
        etas = np.vstack([np.full(y.size, math.log(mu)), np.full(y.size, eta_a)])
        score = float(np.sum(self._gradient(1, etas, y)))
        L = math.log1p(am)
        psi = _digamma_diff(y, np.full(y.size, r))
        tri = polygamma(1, y + r) - polygamma(1, r)
        d_a = am * (y - mu) / (1.0 + am) ** 2
        d_b = -r * (L - psi) + r * (am / (1.0 + am) + r * tri)
        slope = float(np.sum(-d_a + d_b))
        return score, slope

    def init_offsets(self, y):
        y = np.asarray(y, dtype=float)
        self.check_response(y)
        if y.size < 2:
            raise DomainError("need at least 2 observations for offsets")
        mu = float(np.mean(y))
        if not mu > 0:
            raise DomainError("negative binomial response is all zero")
        lo, hi = math.log(NB_ALPHA_FLOOR), math.log(1e4)
        s_lo, _ = self._alpha_score_and_slope(lo, mu, y)
        if s_lo <= 0:
            return np.array([math.log(mu), lo])
        s_hi, _ = self._alpha_score_and_slope(hi, mu, y)
        if s_hi >= 0:
            raise ConvergenceError("overdispersion estimate diverges")
        var = float(np.var(y))
        x = math.log(max((var - mu) / mu**2, 2 * NB_ALPHA_FLOOR))
        x = min(max(x, lo), hi)
        for _ in range(100):
            s, ds = self._alpha_score_and_slope(x, mu, y)
            if abs(s) < 1e-10 * y.size:
                return np.array([math.log(mu), x])
            if s > 0:
                lo = x
            else:
                hi = x
            step = -s / ds if ds < 0 else math.inf
            x_new = x + step
            if not lo < x_new < hi:
                x_new = 0.5 * (lo + hi)
            if abs(x_new - x) < 1e-13:
                return np.array([math.log(mu), x_new])
            x = x_new
        raise ConvergenceError("overdispersion Newton iteration did not converge in 100 steps")


class WeibullSS(Family):
    """Weibull(scale lambda, shape k); log links for both."""

    id = "weibull"
    param_names = ("lambda", "k")
    links = ("log", "log")

    def check_response(self, y):
        if np.any(np.asarray(y) <= 0):
            raise DomainError("Weibull response must be strictly positive")

    def loglik_obs(self, etas, y):
        eta_l, eta_k = etas[0], etas[1]
        k = np.exp(eta_k)
        logy = np.log(y)
        z = logy - eta_l
        return eta_k - k * eta_l + (k - 1.0) * logy - np.exp(k * z)

    def _gradient(self, k, etas, y):
        shape = np.exp(etas[1])
        z = np.log(y) - etas[0]
        t = np.exp(shape * z)
        if k == 0:
            return shape * (t - 1.0)
        return 1.0 + shape * z * (1.0 - t)

    def _score_hessian(self, a, b, logy):
        k = math.exp(b)
        z = logy - a
        t = np.exp(k * z)
        g = np.array([np.sum(k * (t - 1.0)), np.sum(1.0 + k * z * (1.0 - t))])
        h_aa = -np.sum(k * k * t)
        h_ab = np.sum(k * (t - 1.0) + k * k * z * t)
        h_bb = np.sum(k * z * (1.0 - t) - k * k * z * z * t)
        return g, np.array([[h_aa, h_ab], [h_ab, h_bb]])

    def _loglik_const(self, a, b, logy):
        k = math.exp(b)
        return float(np.sum(b - k * a + (k - 1.0) * logy - np.exp(k * (logy - a))))

    def init_offsets(self, y):
        y = np.asarray(y, dtype=float)
        self.check_response(y)
        if y.size < 2:
            raise DomainError("need at least 2 observations for offsets")
        mean, sd = float(np.mean(y)), float(np.std(y))
        if not sd > 0:
            raise DomainError("response has zero variance")
        # method of moments via the usual coefficient-of-variation approximation
        k0 = min(max((sd / mean) ** -1.086, 0.05), 50.0)
        lam0 = mean / math.gamma(1.0 + 1.0 / k0)
        x = np.array([math.log(lam0), math.log(k0)])
        logy = np.log(y)
        ll = self._loglik_const(x[0], x[1], logy)
        for _ in range(100):
            g, H = self._score_hessian(x[0], x[1], logy)
            if np.linalg.norm(g) < 1e-10:
                return x
            try:
                step = -np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                step = g
            if not np.dot(step, g) > 0:
                step = g / max(1.0, float(np.linalg.norm(g)))
            t = 1.0
            while t > 1e-12:
                cand = x + t * step
                with np.errstate(all="ignore"):
                    ll_new = self._loglik_const(cand[0], cand[1], logy)
                if np.isfinite(ll_new) and ll_new >= ll - 1e-12 * abs(ll):
                    break
                t *= 0.5
            if np.allclose(cand, x, rtol=0, atol=1e-15):
                g, _ = self._score_hessian(x[0], x[1], logy)
                if np.linalg.norm(g) < 1e-8:
                    return x
                raise ConvergenceError("Weibull offset Newton iteration stalled")
            x, ll = cand, ll_new
        raise ConvergenceError("Weibull offset Newton iteration did not converge in 100 steps")


FAMILIES = {"gaussian": GaussianLS(), "negbin": NegBinLS(), "weibull": WeibullSS()}


def get_family(family) -> Family:
    if isinstance(family, Family):
        return family
    try:
        return FAMILIES[family]
    except KeyError:
        raise ValueError(
            f"unknown family '{family}'; choose from {', '.join(FAMILIES)}"
        ) from None
