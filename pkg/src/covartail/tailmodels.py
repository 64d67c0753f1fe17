"""Parametric tail functionals and the deterministic limit calculators.

A :class:`TailModel` couples a tail regime with either a tail dependence
function b(w1, w2) (attraction / repulsion / mixed regimes) or a boundary
conditional cdf A(v) on (0, 1) (balance regime). The module also evaluates
the closed-form copula-adjusted levels v(q|p) and small-p asymptotes v(p)
for the six catalogued parametric rows, the rate exponents of v(p), the
delta-CoVaR limits, and the regime classification of a
:class:`~covartail.copulas.CopulaSpec` with catalogued tail orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .copulas import CopulaSpec
from .errors import OutOfRangeError, WrongRegimeError
from .numerics import (
    _bisect_monotone_rel,
    _reg_incomplete_gamma_inv_vec,
    _student_t_cdf_vec,
    reg_incomplete_gamma,
    reg_incomplete_gamma_inv,
    student_t_cdf,
)

REGIMES = ("attraction", "repulsion", "balance", "mixed")

TDF_FAMILIES = ("reflected_gumbel_tdf", "clayton_tdf", "student_t_tdf")
BOUNDARY_FAMILIES = ("reflected_ips_boundary", "frank_boundary")

_REGIME_FAMILIES = {
    "attraction": TDF_FAMILIES,
    "repulsion": TDF_FAMILIES,
    "balance": BOUNDARY_FAMILIES,
    "mixed": ("student_t_tdf",),
}

H_INVERSE_R_CAP = 1e12


@dataclass(frozen=True)
class TailModel:
    """A parametric tail functional tagged with its regime.

    Attraction/repulsion/mixed models expose b(w1, w2) and H(r) = b(1, r);
    a repulsion model describes the 2-reflected corner. Balance models
    expose a proper strictly increasing boundary cdf A on (0, 1).
    """

    regime: str
    family: str
    params: tuple

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.family not in _REGIME_FAMILIES[self.regime]:
            raise ValueError(
                f"family {self.family!r} is not valid for regime {self.regime!r}")
        p = tuple(float(x) for x in self.params)
        object.__setattr__(self, "params", p)
        if self.family == "reflected_gumbel_tdf":
            if len(p) != 1 or not p[0] >= 1.0:
                raise ValueError(f"reflected_gumbel_tdf requires delta >= 1, got {p}")
        elif self.family == "clayton_tdf":
            if len(p) != 1 or not p[0] > 0.0:
                raise ValueError(f"clayton_tdf requires theta > 0, got {p}")
        elif self.family == "student_t_tdf":
            if len(p) != 2 or not -1.0 < p[0] < 1.0 or not p[1] > 0.0:
                raise ValueError(f"student_t_tdf requires rho in (-1,1), nu > 0, got {p}")
        elif self.family == "reflected_ips_boundary":
            if len(p) != 1 or not p[0] > 0.0:
                raise ValueError(f"reflected_ips_boundary requires theta > 0, got {p}")
        elif self.family == "frank_boundary":
            if len(p) != 1 or abs(p[0]) > 35.0:
                raise ValueError(f"frank_boundary requires |theta| <= 35, got {p}")


# ---------------------------------------------------------------------------
# tail dependence functions


def _tdf_values(family: str, params: tuple, w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
    small = np.minimum(w1, w2)
    big = np.maximum(w1, w2)
    ratio = small / big
    if family == "reflected_gumbel_tdf":
        delta = params[0]
        return small - big * np.expm1(np.log1p(ratio ** delta) / delta)
    if family == "clayton_tdf":
        theta = params[0]
        return small * np.exp(-np.log1p(ratio ** theta) / theta)
    if family == "student_t_tdf":
        rho, nu = params
        k = math.sqrt((nu + 1.0) / (1.0 - rho * rho))
        t1 = _student_t_cdf_vec(k * (rho - (w2 / w1) ** (-1.0 / nu)), nu + 1.0)
        t2 = _student_t_cdf_vec(k * (rho - (w1 / w2) ** (-1.0 / nu)), nu + 1.0)
        return w1 * t1 + w2 * t2
    raise ValueError(f"{family!r} has no tail dependence function")


def tdf_eval(m: TailModel, w1, w2):
    """Tail dependence function b(w1, w2); homogeneous of degree one."""
    if m.regime == "balance":
        raise WrongRegimeError("balance models expose a boundary cdf, not b(w1, w2)")
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    if np.any(w1 <= 0) or np.any(w2 <= 0):
        raise ValueError("w1 and w2 must be positive")
    out = _tdf_values(m.family, m.params, w1, w2)
    if out.ndim == 0:
        return float(out)
    return out


def b_inf(m: TailModel) -> float:
    """sup_r b(1, r): the boundary atom size produced by the model."""
    if m.regime == "balance":
        raise WrongRegimeError("balance models have no tail dependence function")
    if m.family == "student_t_tdf":
        rho, nu = m.params
        k = math.sqrt((nu + 1.0) / (1.0 - rho * rho))
        return student_t_cdf(rho * k, nu + 1.0)
    if m.family == "reflected_gumbel_tdf" and m.params[0] == 1.0:
        return 0.0
    return 1.0


def H_eval(m: TailModel, r: float) -> float:
    """H(r) = b(1, r), a cdf-like section increasing from 0 to b_inf."""
    return float(tdf_eval(m, 1.0, r))


def H_inverse(m: TailModel, q: float) -> float:
    """Inverse of H on (0, b_inf); bracket doubles upward, capped at 1e12."""
    sup = b_inf(m)
    if not 0.0 < q < sup:
        raise OutOfRangeError(
            f"q={q} outside (0, {sup}) attainable by this model", b_inf=sup)
    lo, hi = 1e-8, 1.0
    while H_eval(m, lo) > q and lo > 1e-300:
        lo *= 0.25
    while H_eval(m, hi) <= q:
        hi *= 2.0
        if hi > H_INVERSE_R_CAP:
            raise OutOfRangeError(
                f"H_inverse bracket exceeded cap {H_INVERSE_R_CAP:g} for q={q}",
                b_inf=sup)
    return _bisect_monotone_rel(lambda r: H_eval(m, r) - q, lo, hi, rtol=1e-12)


# ---------------------------------------------------------------------------
# boundary cdfs (balance regime)


# Frank boundary parameters inside this band evaluate as the independence
# cdf A(v) = v; the formulas have a removable singularity at theta = 0.
FRANK_INDEPENDENCE_BAND = 0.01


def boundary_cdf_eval(m: TailModel, v: float) -> float:
    """Limiting conditional cdf A(v) for a balance model."""
    if m.regime != "balance":
        raise WrongRegimeError(f"{m.regime} models have no boundary cdf")
    if not 0.0 < v < 1.0:
        raise ValueError(f"v must lie in (0, 1), got {v}")
    if m.family == "reflected_ips_boundary":
        theta = m.params[0]
        return -math.expm1(-reg_incomplete_gamma_inv(theta, v))
    theta = m.params[0]
    if abs(theta) < FRANK_INDEPENDENCE_BAND:
        return v
    return math.expm1(-theta * v) / math.expm1(-theta)


def boundary_cdf_inverse(m: TailModel, q: float) -> float:
    """Closed-form inverse of the boundary cdf."""
    if m.regime != "balance":
        raise WrongRegimeError(f"{m.regime} models have no boundary cdf")
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    if m.family == "reflected_ips_boundary":
        theta = m.params[0]
        return reg_incomplete_gamma(theta, -math.log1p(-q))
    theta = m.params[0]
    if abs(theta) < FRANK_INDEPENDENCE_BAND:
        return q
    return -math.log1p(q * math.expm1(-theta)) / theta


def _boundary_cdf_values(family: str, params: tuple, v: np.ndarray) -> np.ndarray:
    """Vectorized A(v) over an array of interior levels."""
    v = np.asarray(v, dtype=float)
    if family == "reflected_ips_boundary":
        theta = params[0]
        return -np.expm1(-_reg_incomplete_gamma_inv_vec(theta, v))
    theta = params[0]
    if abs(theta) < FRANK_INDEPENDENCE_BAND:
        return v.copy()
    return np.expm1(-theta * v) / math.expm1(-theta)


# ---------------------------------------------------------------------------
# closed forms for the six catalogued parametric rows

CATALOG_FAMILIES = (
    "clayton", "gumbel_star", "ips_star", "frank", "gumbel_2star", "clayton_2star",
)


def _check_catalog(family: str, params: tuple) -> float:
    if family not in CATALOG_FAMILIES:
        raise ValueError(f"unknown catalogued family {family!r}")
    (par,) = params
    if family in ("clayton", "ips_star", "clayton_2star") and not par > 0:
        raise ValueError(f"{family} requires theta > 0")
    if family in ("gumbel_star", "gumbel_2star") and not par > 1:
        raise ValueError(f"{family} requires delta > 1")
    if family == "frank" and par == 0:
        raise ValueError("frank requires theta != 0")
    return float(par)


def catalog_v_qp(family: str, params: tuple, q: float, p: float) -> float:
    """Catalogued copula-adjusted level v(q|p) in closed form."""
    par = _check_catalog(family, params)
    if not 0.0 < q < 1.0 or not 0.0 < p < 1.0:
        raise ValueError("q and p must lie in (0, 1)")
    if family == "clayton":
        return p * (q ** (-par) - 1.0) ** (-1.0 / par)
    if family == "gumbel_star":
        model = TailModel("attraction", "reflected_gumbel_tdf", (par,))
        return H_inverse(model, q) * p
    if family == "ips_star":
        return reg_incomplete_gamma(par, -math.log1p(-q))
    if family == "frank":
        return -math.log1p(q * math.expm1(-par)) / par
    if family == "gumbel_2star":
        return -math.expm1(-((par * q) ** (1.0 / par)) * (-math.log(p)) ** (1.0 - 1.0 / par))
    # clayton_2star
    return 1.0 - ((1.0 - q) ** (-par) - 1.0) ** (-1.0 / par) * p


def catalog_vp(family: str, params: tuple, p: float) -> float:
    """Catalogued small-p asymptote of v(p), with per-side parameter branches."""
    par = _check_catalog(family, params)
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if family in ("clayton", "gumbel_star"):
        return p * p
    if family == "ips_star":
        if par == 1.0:
            raise ValueError("ips_star asymptote is branch-specific; theta=1 is the boundary")
        if par > 1.0:
            return math.gamma(par + 1.0) ** (-1.0 / par) * p ** (2.0 - 1.0 / par)
        return p ** par / math.gamma(par + 1.0)
    if family == "frank":
        return -math.expm1(-par) / par * p
    if family == "gumbel_2star":
        return (par * p) ** (1.0 / par) * (-math.log(p)) ** (1.0 - 1.0 / par)
    # clayton_2star
    if par == 1.0:
        raise ValueError("clayton_2star asymptote is branch-specific; theta=1 is the boundary")
    if par > 1.0:
        return 1.0 - par ** (-1.0 / par) * p ** (1.0 - 1.0 / par)
    return p ** (1.0 - par)


# ---------------------------------------------------------------------------
# limit calculators


@dataclass(frozen=True)
class LimitInputs:
    """Inputs to the v(p) rate and delta-CoVaR limit calculators.

    kappa: joint lower-tail order (>= 1). rho_exp: growth exponent of the
    tail order function section, in (0, kappa-1] when kappa > 1. xi:
    marginal lower-tail index (>= 0). gamma: extended-regular-variation
    index used when xi = 0 (may be math.inf). a0: solution of a(1, a0) = 1,
    needed only when kappa = 2 and xi > 0.
    """

    kappa: float
    rho_exp: float
    xi: float = 0.0
    gamma: Optional[float] = None
    a0: Optional[float] = None

    def __post_init__(self):
        if not self.kappa >= 1.0:
            raise ValueError(f"kappa must be >= 1, got {self.kappa}")
        if not self.rho_exp > 0.0:
            raise ValueError(f"rho_exp must be positive, got {self.rho_exp}")
        if not self.xi >= 0.0:
            raise ValueError(f"xi must be >= 0, got {self.xi}")


@dataclass(frozen=True)
class VpRate:
    exponent: Optional[float]  # v(p) = O(p**exponent) when it vanishes
    to_one: bool               # v(p) -> 1 instead of 0


def vp_rate(inputs: LimitInputs) -> VpRate:
    """Rate exponent of v(p): 3-kappa on [1,2], 1-(kappa-2)/rho on (2,2+rho)."""
    k, rho = inputs.kappa, inputs.rho_exp
    if k <= 2.0:
        return VpRate(3.0 - k, False)
    if k < 2.0 + rho:
        return VpRate(1.0 - (k - 2.0) / rho, False)
    return VpRate(None, True)


@dataclass(frozen=True)
class DeltaCovarLimit:
    value: float               # limit (may be -inf)
    label: str                 # "amplification", "attenuation", or "neutral"
    rate_exponent: Optional[float]  # polynomial rate where the limit is degenerate
    gamma_infinite: bool = False


def delta_covar_limit(inputs: LimitInputs) -> DeltaCovarLimit:
    """Limit of delta-CoVaR at q = p as p vanishes, split by marginal tail."""
    k, rho, xi = inputs.kappa, inputs.rho_exp, inputs.xi
    if not k < 2.0 + rho:
        raise ValueError("kappa must satisfy kappa < 2 + rho_exp for a finite regime")
    if xi > 0.0:
        if k < 2.0:
            return DeltaCovarLimit(-math.inf, "amplification", -(2.0 - k) * xi)
        if k == 2.0:
            if inputs.a0 is None:
                raise ValueError("a0 is required when kappa = 2 and xi > 0")
            val = 1.0 - inputs.a0 ** (-xi)
            label = "neutral" if val == 0.0 else ("attenuation" if val > 0 else "amplification")
            return DeltaCovarLimit(val, label, None)
        return DeltaCovarLimit(1.0, "attenuation", (k - 2.0) * xi / rho)

    if k == 2.0:
        # zero for every extended-variation index
        return DeltaCovarLimit(0.0, "neutral", None)
    gamma = inputs.gamma
    if gamma is None:
        raise ValueError("gamma is required when xi = 0 and kappa != 2")
    if math.isinf(gamma):
        if k < 2.0:
            return DeltaCovarLimit(-math.inf, "amplification", None, gamma_infinite=True)
        return DeltaCovarLimit(1.0, "attenuation", None, gamma_infinite=True)
    if k < 2.0:
        return DeltaCovarLimit(1.0 - (3.0 - k) ** gamma, "amplification", None)
    return DeltaCovarLimit(1.0 - (1.0 - (k - 2.0) / rho) ** gamma, "attenuation", None)


# ---------------------------------------------------------------------------
# regime classification of catalogued copula specs


@dataclass(frozen=True)
class RegimeInfo:
    regime: str
    kappa: float
    kappa_2star: float
    caveat: bool  # tail expansion not uniform (Gumbel lower corner, Gaussian)


def theoretical_regime(c: CopulaSpec) -> RegimeInfo:
    """Tail regime and (kappa, kappa of the 2-reflection) for catalogued specs.

    Specs whose relevant corner orders are not catalogued (the base IPS
    lower corner and its 2-reflection) raise ValueError. Gumbel-lower and
    Gaussian corners carry a caveat flag: their expansions are not uniform,
    so the tail order alone does not determine the boundary behavior.
    """
    fam, refl = c.family, c.reflection
    inf = math.inf
    if fam == "independence":
        return RegimeInfo("balance", 2.0, 2.0, False)
    if fam == "comonotone":
        if refl in ("none", "survival"):
            return RegimeInfo("attraction", 1.0, inf, False)
        return RegimeInfo("repulsion", inf, 1.0, False)
    if fam == "countermonotone":
        if refl in ("none", "survival"):
            return RegimeInfo("repulsion", inf, 1.0, False)
        return RegimeInfo("attraction", 1.0, inf, False)
    if fam == "clayton":
        theta = c.params[0]
        return {
            "none": RegimeInfo("attraction", 1.0, theta + 2.0, False),
            "survival": RegimeInfo("balance", 2.0, theta + 2.0, False),
            "reflect1": RegimeInfo("balance", theta + 2.0, 2.0, False),
            "reflect2": RegimeInfo("repulsion", theta + 2.0, 1.0, False),
        }[refl]
    if fam == "gumbel":
        delta = c.params[0]
        lower = 2.0 ** (1.0 / delta)
        return {
            "none": RegimeInfo("attraction", lower, 1.0 + delta, True),
            "survival": RegimeInfo("attraction", 1.0, 1.0 + delta, False),
            "reflect1": RegimeInfo("repulsion", 1.0 + delta, 1.0, False),
            "reflect2": RegimeInfo("repulsion", 1.0 + delta, lower, True),
        }[refl]
    if fam == "frank":
        return RegimeInfo("balance", 2.0, 2.0, False)
    if fam == "student_t":
        return RegimeInfo("mixed", 1.0, 1.0, False)
    if fam == "ips":
        theta = c.params[0]
        if refl == "survival":
            return RegimeInfo("balance", 1.0 + 1.0 / theta, 2.0, False)
        if refl == "reflect1":
            return RegimeInfo("balance", 2.0, 1.0 + 1.0 / theta, False)
        raise ValueError(
            "tail orders of the base IPS lower corner are not catalogued; "
            "use the survival or 1-reflected spec")
    if fam == "gaussian":
        rho = c.params[0] if refl in ("none", "survival") else -c.params[0]
        if rho == 0.0:
            return RegimeInfo("balance", 2.0, 2.0, False)
        kappa = 2.0 / (1.0 + rho)
        kappa2 = 2.0 / (1.0 - rho)
        if rho > 0.0:
            return RegimeInfo("attraction", kappa, kappa2, True)
        return RegimeInfo("repulsion", kappa, kappa2, True)
    raise ValueError(f"unknown copula family {fam!r}")


def boundary_atoms(m: TailModel) -> tuple:
    """Sizes (p0, p1) of the limiting conditional cdf's atoms at 0 and 1."""
    if m.regime == "attraction":
        return (b_inf(m), 0.0)
    if m.regime == "repulsion":
        return (0.0, b_inf(m))
    if m.regime == "balance":
        return (0.0, 0.0)
    qstar = b_inf(m)
    return (qstar, 1.0 - qstar)


def true_tail_model(c: CopulaSpec) -> TailModel:
    """The tail model a catalogued copula spec actually follows.

    Used by the simulation harness to compare empirical tail functionals
    with their population counterparts.
    """
    fam, refl = c.family, c.reflection
    if fam == "clayton" and refl == "none":
        return TailModel("attraction", "clayton_tdf", c.params)
    if fam == "gumbel" and refl == "survival":
        return TailModel("attraction", "reflected_gumbel_tdf", c.params)
    if fam == "clayton" and refl == "reflect2":
        return TailModel("repulsion", "clayton_tdf", c.params)
    if fam == "gumbel" and refl == "reflect1":
        return TailModel("repulsion", "reflected_gumbel_tdf", c.params)
    if fam == "frank" and refl == "none":
        return TailModel("balance", "frank_boundary", c.params)
    if fam == "ips" and refl == "survival":
        return TailModel("balance", "reflected_ips_boundary", c.params)
    if fam == "independence":
        return TailModel("balance", "frank_boundary", (0.0,))
    if fam == "student_t":
        rho, nu = c.params
        if refl in ("reflect1", "reflect2"):
            rho = -rho
        return TailModel("mixed", "student_t_tdf", (rho, nu))
    raise ValueError(f"no catalogued tail model for {fam!r} with reflection {refl!r}")
