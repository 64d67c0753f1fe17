"""Minimum-distance estimation of tail models from rank data.

Regime classification from the pair of empirical tail coefficients, L1
criterion functions matching an empirical tail functional against its
parametric counterpart on a fixed midpoint grid, derivative-free fitting
over per-family boxes with deterministic multi-starts, and the plug-in
estimators for the conditional level v(q|p) and the adjustment factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import tailmodels
from .empirical import (
    A_hat,
    PseudoSample,
    TailCoefficients,
    b_hat,
    reflect2_sample,
    tail_coefficients,
)
from .errors import OptimizationError
from .numerics import BoxConstraint, minimize_derivative_free
from .tailmodels import TailModel, H_inverse, b_inf, boundary_cdf_inverse

DEFAULT_PANELS = 201  # midpoint panels for every L1 criterion
DEFAULT_TAU = 0.1     # classification threshold on the tail coefficients

# search boxes for the derivative-free fit, one per model family
_BOXES = {
    "clayton_tdf": BoxConstraint((0.05,), (20.0,)),
    "reflected_gumbel_tdf": BoxConstraint((1.01,), (15.0,)),
    "frank_boundary": BoxConstraint((-35.0,), (35.0,)),
    "reflected_ips_boundary": BoxConstraint((0.05,), (20.0,)),
    "student_t_tdf": BoxConstraint((-0.99, 1.0), (0.99, 50.0)),
}

# deterministic multi-start points
_STARTS = {
    "clayton_tdf": ((0.3,), (1.0,), (4.0,)),
    "reflected_gumbel_tdf": ((1.3,), (2.5,), (6.0,)),
    "frank_boundary": ((-8.0,), (1.5,), (8.0,)),
    "reflected_ips_boundary": ((0.3,), (1.0,), (4.0,)),
    "student_t_tdf": ((-0.4, 5.0), (0.2, 8.0), (0.6, 4.0)),
}


@dataclass(frozen=True)
class MDEFit:
    """A fitted tail model with the criterion value it achieved."""

    regime: str
    family: str
    theta_hat: tuple
    criterion_value: float
    k: int
    n: int
    flags: tuple = ()

    def model(self) -> TailModel:
        return TailModel(self.regime, self.family, self.theta_hat)


def classify_regime(tc: TailCoefficients, tau: float = DEFAULT_TAU) -> str:
    """Four-way regime call from the empirical tail coefficient pair."""
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    low, up = tc.lambda_hat > tau, tc.lambda_hat_2star > tau
    if low and up:
        return "mixed"
    if low:
        return "attraction"
    if up:
        return "repulsion"
    return "balance"


@lru_cache(maxsize=8)
def _simplex_grid(panels: int):
    t = (np.arange(panels) + 0.5) / panels
    return t, 2.0 * t, 2.0 * (1.0 - t)


def _empirical_on_simplex(s: PseudoSample, k: int, panels: int) -> np.ndarray:
    _, w1, w2 = _simplex_grid(panels)
    return np.asarray(b_hat(s, k, w1, w2))


def criterion_attraction(s: PseudoSample, k: int, family: str, theta,
                         *, panels: int = DEFAULT_PANELS, empirical=None) -> float:
    """L1 distance between the empirical and model tail dependence
    functions along the w1 + w2 = 2 simplex, midpoint rule in t.

    ``empirical`` may replace the rank-based estimate: an array of values
    on the midpoint grid, or a callable of (w1, w2).
    """
    theta = _as_params(theta)
    TailModel("attraction", family, theta)  # validates family/params
    _, w1, w2 = _simplex_grid(panels)
    if empirical is None:
        emp = _empirical_on_simplex(s, k, panels)
    elif callable(empirical):
        emp = np.asarray(empirical(w1, w2), dtype=float)
    else:
        emp = np.asarray(empirical, dtype=float)
    if emp.shape != w1.shape:
        raise ValueError("empirical values must match the midpoint grid")
    model = tailmodels._tdf_values(family, theta, w1, w2)
    return float(np.mean(np.abs(emp - model)))


def criterion_repulsion(s: PseudoSample, k: int, family: str, theta,
                        *, panels: int = DEFAULT_PANELS, empirical=None) -> float:
    """Attraction criterion computed on the 2-reflected sample."""
    return criterion_attraction(reflect2_sample(s), k, family, theta,
                                panels=panels, empirical=empirical)


def criterion_balance(s: PseudoSample, k: int, family: str, theta,
                      *, panels: int = DEFAULT_PANELS, empirical=None) -> float:
    """L1 distance between the empirical conditional cdf and A(.; theta)."""
    theta = _as_params(theta)
    TailModel("balance", family, theta)
    v, _, _ = _simplex_grid(panels)
    if empirical is None:
        emp = np.asarray(A_hat(s, k, v))
    elif callable(empirical):
        emp = np.asarray(empirical(v), dtype=float)
    else:
        emp = np.asarray(empirical, dtype=float)
    if emp.shape != v.shape:
        raise ValueError("empirical values must match the midpoint grid")
    model = tailmodels._boundary_cdf_values(family, theta, v)
    return float(np.mean(np.abs(emp - model)))


def criterion_mixed(s: PseudoSample, k: int, rho: float, nu: float,
                    *, panels: int = DEFAULT_PANELS,
                    empirical=None, empirical_2star=None) -> float:
    """Two-corner criterion: lower-left at (rho, nu) plus upper-left at
    (-rho, nu), sharing the parameter pair."""
    lower = criterion_attraction(s, k, "student_t_tdf", (rho, nu),
                                 panels=panels, empirical=empirical)
    upper = criterion_attraction(reflect2_sample(s), k, "student_t_tdf", (-rho, nu),
                                 panels=panels, empirical=empirical_2star)
    return lower + upper


def _as_params(theta) -> tuple:
    if np.isscalar(theta):
        return (float(theta),)
    return tuple(float(x) for x in np.asarray(theta, dtype=float).ravel())


def fit(s: PseudoSample, k: int, regime: str, family: str, *,
        tau: float = DEFAULT_TAU, force: bool = False, seed: int = 0,
        panels: int = DEFAULT_PANELS, max_evals: int = 2000) -> MDEFit:
    """Minimize the regime's criterion over the family's box.

    Three deterministic starts, each descended with the derivative-free
    simplex minimizer; the lowest criterion wins, ties broken by start
    index. An attraction fit refuses to run when the lower tail
    coefficient sits at or below the classification threshold, unless
    ``force`` is set.
    """
    if k > s.n:
        raise ValueError(f"k={k} exceeds the sample size n={s.n}")
    if regime not in tailmodels.REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    if family not in _BOXES:
        raise ValueError(f"unknown model family {family!r}")
    TailModel(regime, family, _STARTS[family][0])  # regime/family compatibility

    flags = []
    if regime == "attraction":
        tc = tail_coefficients(s, k)
        if tc.lambda_hat <= tau:
            if not force:
                raise ValueError(
                    f"lower tail coefficient {tc.lambda_hat:.4f} <= tau={tau}; "
                    "attraction fit refused (pass force=True to override)")
            flags.append("forced_attraction")

    if regime == "mixed":
        emp = _empirical_on_simplex(s, k, panels)
        emp2 = _empirical_on_simplex(reflect2_sample(s), k, panels)

        def objective(x):
            return criterion_mixed(s, k, x[0], x[1], panels=panels,
                                   empirical=emp, empirical_2star=emp2)
    elif regime == "balance":
        v, _, _ = _simplex_grid(panels)
        emp = np.asarray(A_hat(s, k, v))

        def objective(x):
            return criterion_balance(s, k, family, x, panels=panels, empirical=emp)
    else:
        base = s if regime == "attraction" else reflect2_sample(s)
        emp = _empirical_on_simplex(base, k, panels)

        def objective(x):
            return criterion_attraction(base, k, family, x, panels=panels, empirical=emp)

    box = _BOXES[family]
    best = None
    failures = []
    for i, start in enumerate(_STARTS[family]):
        try:
            res = minimize_derivative_free(objective, box, start,
                                           seed=seed + i, max_evals=max_evals)
        except (ValueError, ArithmeticError) as exc:
            failures.append(f"start {start}: {exc}")
            continue
        if best is None or res.fun < best[0].fun:
            best = (res, i)
    if best is None:
        raise OptimizationError("every start point failed", trace=failures)

    res = best[0]
    theta_hat = tuple(res.x)
    if res.flat:
        flags.append("flat_criterion")
    for j, (lo, hi) in enumerate(zip(box.lower, box.upper)):
        if min(theta_hat[j] - lo, hi - theta_hat[j]) < 1e-6 * (hi - lo):
            flags.append("boundary")
            break
    if family == "frank_boundary" and abs(theta_hat[0]) < tailmodels.FRANK_INDEPENDENCE_BAND:
        flags.append("independence_band")
    return MDEFit(regime, family, theta_hat, res.fun, k, s.n, tuple(flags))


# ---------------------------------------------------------------------------
# plug-in estimators

_CLAMP = 1e-12


def v_hat_flagged(f: MDEFit, q: float, p: float) -> tuple:
    """Plug-in conditional level and whether it was clamped into (0, 1)."""
    if not 0.0 < q < 1.0 or not 0.0 < p < 1.0:
        raise ValueError("q and p must lie in (0, 1)")
    m = f.model()
    if f.regime == "attraction":
        raw = H_inverse(m, q) * p
    elif f.regime == "repulsion":
        raw = 1.0 - H_inverse(m, 1.0 - q) * p
    elif f.regime == "balance":
        raw = boundary_cdf_inverse(m, q)
    else:
        qstar = b_inf(m)
        if abs(q - qstar) < 0.5 / DEFAULT_PANELS:
            raw = 0.5
        elif q < qstar:
            raw = H_inverse(m, q) * p
        else:
            rho, nu = m.params
            m2 = TailModel("mixed", "student_t_tdf", (-rho, nu))
            raw = 1.0 - H_inverse(m2, 1.0 - q) * p
    clamped = not _CLAMP <= raw <= 1.0 - _CLAMP
    return min(max(raw, _CLAMP), 1.0 - _CLAMP), clamped


def v_hat(f: MDEFit, q: float, p: float) -> float:
    """Regime-dispatched plug-in estimate of v(q|p), clamped into (0, 1)."""
    return v_hat_flagged(f, q, p)[0]


def adjustment_factor(f: MDEFit, p: float) -> float:
    """r(p) = v(p|p) / p, the multiplicative correction to the VaR level.

    Context values when reporting: the comonotone floor is r = p and the
    independence level is r = 1. The attraction plug-in respects the floor
    at every p (H lies below the comonotone bound, so H-inverse(p) >= p);
    the balance and repulsion plug-ins are small-p approximations and are
    only guaranteed to respect it asymptotically.
    """
    return v_hat(f, p, p) / p
