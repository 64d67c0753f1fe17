"""AR(1)-GARCH(1,1) marginal filtering with standardized skew-t innovations.

The return model is r_t = mu_t + sigma_t z_t with mu_t = mu + phi r_{t-1}
and sigma_t^2 = beta0 + beta1 z_{t-1}^2 + beta2 sigma_{t-1}^2, where z is
the standardized innovation (mean zero, unit variance). Fitting is
quasi-maximum-likelihood on an unconstrained transformed scale, driven by
the derivative-free minimizer.

Skew-t convention: two scaled Student-t halves glued at the mode with
continuity constants chosen so the density has zero mean and unit
variance for eta > 2, |lambda| < 1 (the standard GARCH-literature form).

Presample conventions (documented, deterministic): sigma_1^2 is the sample
variance of the input, and the AR term at t = 1 uses the sample mean as
the presample return.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericError
from .numerics import BoxConstraint, minimize_derivative_free, student_t_cdf, student_t_quantile

MIN_FIT_LENGTH = 250
PERSISTENCE_CAP = 0.9995   # beta1 + beta2 search ceiling
PERSISTENCE_WARN = 0.995   # warn flag threshold for near-nonstationary fits


@dataclass(frozen=True)
class ArGarchParams:
    mu: float
    phi: float
    beta0: float
    beta1: float
    beta2: float
    eta: float
    lambda_skew: float

    def __post_init__(self):
        if not self.beta0 > 0:
            raise ValueError("beta0 must be positive")
        if self.beta1 < 0 or self.beta2 < 0:
            raise ValueError("beta1 and beta2 must be nonnegative")
        if not self.beta1 + self.beta2 < 1:
            raise ValueError("stationarity requires beta1 + beta2 < 1")
        if not self.eta > 2:
            raise ValueError("eta must exceed 2")
        if not -1 < self.lambda_skew < 1:
            raise ValueError("lambda_skew must lie in (-1, 1)")


@dataclass(frozen=True)
class MarginalFit:
    params: ArGarchParams
    innovations: np.ndarray
    cond_mean: np.ndarray
    cond_sd: np.ndarray
    loglik: float
    flags: tuple = ()


# ---------------------------------------------------------------------------
# standardized skew-t distribution


def _skewt_consts(eta: float, lam: float):
    logc = (math.lgamma(0.5 * (eta + 1.0)) - math.lgamma(0.5 * eta)
            - 0.5 * math.log(math.pi * (eta - 2.0)))
    c = math.exp(logc)
    a = 4.0 * lam * c * (eta - 2.0) / (eta - 1.0)
    b = math.sqrt(1.0 + 3.0 * lam * lam - a * a)
    return a, b, c, logc


def _check_skewt(eta: float, lam: float):
    if not eta > 2:
        raise ValueError(f"eta must exceed 2, got {eta}")
    if not -1 < lam < 1:
        raise ValueError(f"lambda_skew must lie in (-1, 1), got {lam}")


def skewt_logpdf(z, eta: float, lambda_skew: float):
    """Log density of the zero-mean unit-variance skew-t. Vectorized."""
    _check_skewt(eta, lambda_skew)
    a, b, c, logc = _skewt_consts(eta, lambda_skew)
    z = np.asarray(z, dtype=float)
    scale = np.where(z < -a / b, 1.0 - lambda_skew, 1.0 + lambda_skew)
    y = (b * z + a) / scale
    out = math.log(b) + logc - 0.5 * (eta + 1.0) * np.log1p(y * y / (eta - 2.0))
    if out.ndim == 0:
        return float(out)
    return out


def skewt_cdf(z: float, eta: float, lambda_skew: float) -> float:
    """Cdf of the standardized skew-t."""
    _check_skewt(eta, lambda_skew)
    a, b, _, _ = _skewt_consts(eta, lambda_skew)
    lam = lambda_skew
    stretch = math.sqrt(eta / (eta - 2.0))
    if z < -a / b:
        return (1.0 - lam) * student_t_cdf((b * z + a) / (1.0 - lam) * stretch, eta)
    return (1.0 - lam) / 2.0 + (1.0 + lam) * (
        student_t_cdf((b * z + a) / (1.0 + lam) * stretch, eta) - 0.5)


def skewt_quantile(q: float, eta: float, lambda_skew: float) -> float:
    """Inverse cdf of the standardized skew-t."""
    _check_skewt(eta, lambda_skew)
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    a, b, _, _ = _skewt_consts(eta, lambda_skew)
    lam = lambda_skew
    shrink = math.sqrt((eta - 2.0) / eta)
    if q < (1.0 - lam) / 2.0:
        t = student_t_quantile(q / (1.0 - lam), eta)
        return ((1.0 - lam) * shrink * t - a) / b
    t = student_t_quantile(0.5 + (q - (1.0 - lam) / 2.0) / (1.0 + lam), eta)
    return ((1.0 + lam) * shrink * t - a) / b


# ---------------------------------------------------------------------------
# filtering and likelihood


def filter_returns(params: ArGarchParams, returns) -> tuple:
    """Run the deterministic AR-GARCH recursion.

    Returns (z, mu_t, sigma_t) with exact reconstruction
    r_t = mu_t + sigma_t z_t.
    """
    r = np.asarray(returns, dtype=float)
    if r.ndim != 1 or len(r) < 2:
        raise ValueError("returns must be a 1-d array with at least 2 entries")
    if not np.all(np.isfinite(r)):
        raise DataError("returns contain non-finite values")
    n = len(r)
    mu_t = np.empty(n)
    mu_t[0] = params.mu + params.phi * float(np.mean(r))
    mu_t[1:] = params.mu + params.phi * r[:-1]
    e2 = np.square(r - mu_t).tolist()

    s0 = float(np.var(r))
    if s0 <= 0.0:
        s0 = max(params.beta0 / (1.0 - params.beta2), 1e-18)
    b0, b1, b2 = params.beta0, params.beta1, params.beta2
    sig2 = [0.0] * n
    sig2[0] = s_prev = s0
    for t in range(1, n):
        # beta1 multiplies the squared *standardized* innovation
        s_prev = b0 + b1 * e2[t - 1] / s_prev + b2 * s_prev
        sig2[t] = s_prev
    sigma = np.sqrt(sig2)
    if not np.all(sigma > 0):
        raise NumericError("conditional variance recursion left the positive domain")
    z = (r - mu_t) / sigma
    return z, mu_t, sigma


def _neg_loglik(params: ArGarchParams, r: np.ndarray) -> float:
    z, _, sigma = filter_returns(params, r)
    return -float(np.sum(skewt_logpdf(z, params.eta, params.lambda_skew))
                  - np.sum(np.log(sigma)))


# transformed scale: identity for (mu, phi); log beta0; persistence and
# arch share via logistic; log(eta - 2); Fisher-z for lambda
def _to_params(x, var_scale: float) -> ArGarchParams:
    mu, phi, log_b0, logit_s, logit_w, log_eta2, z_lam = x
    s = PERSISTENCE_CAP / (1.0 + math.exp(-logit_s))
    w = 1.0 / (1.0 + math.exp(-logit_w))
    return ArGarchParams(
        mu=mu,
        phi=phi,
        beta0=math.exp(log_b0) * var_scale,
        beta1=s * w,
        beta2=s * (1.0 - w),
        eta=2.0 + math.exp(log_eta2),
        lambda_skew=math.tanh(z_lam),
    )


def fit_ar_garch(returns, *, seed: int = 0, max_evals: int = 3000) -> MarginalFit:
    """Quasi-maximum-likelihood fit of the AR(1)-GARCH(1,1) skew-t model."""
    r = np.asarray(returns, dtype=float)
    if r.ndim != 1 or len(r) < MIN_FIT_LENGTH:
        raise DataError(f"need at least {MIN_FIT_LENGTH} observations, got {r.shape}")
    if not np.all(np.isfinite(r)):
        raise DataError("returns contain non-finite values")
    var_scale = float(np.var(r))
    if var_scale <= 0:
        raise DataError("returns are constant; nothing to fit")
    mean_scale = float(np.mean(r))
    sd = math.sqrt(var_scale)

    def objective(x):
        try:
            return _neg_loglik(_to_params(x, var_scale), r)
        except (ValueError, FloatingPointError, NumericError):
            return 1e12

    box = BoxConstraint(
        lower=(mean_scale - 10.0 * sd, -0.995, math.log(1e-6), -12.0, -12.0,
               math.log(0.1), -1.8),
        upper=(mean_scale + 10.0 * sd, 0.995, math.log(10.0), 12.0, 12.0,
               math.log(60.0), 1.8),
    )
    init = (mean_scale, 0.0, math.log(0.1), math.log(0.9 / 0.1), math.log(0.1 / 0.9),
            math.log(6.0), 0.0)
    res = minimize_derivative_free(objective, box, init, seed=seed, max_evals=max_evals)
    params = _to_params(np.asarray(res.x), var_scale)
    z, mu_t, sigma = filter_returns(params, r)
    flags = []
    if params.beta1 + params.beta2 >= PERSISTENCE_WARN:
        flags.append("near_nonstationary")
    return MarginalFit(params, z, mu_t, sigma, -res.fun, tuple(flags))


def var_forecast(fit: MarginalFit, p: float, t: int) -> float:
    """Conditional VaR at probability p for time index t."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    q = skewt_quantile(p, fit.params.eta, fit.params.lambda_skew)
    return float(fit.cond_mean[t] + fit.cond_sd[t] * q)


def simulate_ar_garch(params: ArGarchParams, n: int, seed: int = 0,
                      innovations=None, burn: int = 250) -> np.ndarray:
    """Simulate a return path; innovations may be supplied (e.g. copula-linked).

    Supplied innovations must already be standardized skew-t draws of
    length n + burn, or of length n with burn = 0.
    """
    if innovations is None:
        rng = np.random.default_rng(seed)
        u = rng.random(n + burn)
        u = np.clip(u, 1e-12, 1.0 - 1e-12)
        z = np.array([skewt_quantile(x, params.eta, params.lambda_skew) for x in u])
    else:
        z = np.asarray(innovations, dtype=float)
        if len(z) == n:
            burn = 0
        elif len(z) != n + burn:
            raise ValueError(f"innovations must have length n ({n}) or n+burn ({n + burn})")
    total = len(z)
    r = np.empty(total)
    b0, b1, b2 = params.beta0, params.beta1, params.beta2
    s2_prev = (b0 + b1) / (1.0 - b2)  # stationary variance of the recursion
    r_prev = params.mu / (1.0 - params.phi) if params.phi != 1.0 else 0.0
    z_prev = 0.0
    for t in range(total):
        s2 = b0 + b1 * z_prev * z_prev + b2 * s2_prev
        mu_t = params.mu + params.phi * r_prev
        r[t] = mu_t + math.sqrt(s2) * z[t]
        z_prev = z[t]
        r_prev = r[t]
        s2_prev = s2
    return r[burn:]
