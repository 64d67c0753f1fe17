"""Self-contained numerical substrate used by every other module.

Special functions (regularized incomplete gamma/beta, Student-t cdf and
quantile), monotone root finding with a left-endpoint convention for flat
segments, composite midpoint quadrature on the unit interval, and a
derivative-free simplex minimizer with box projection.

Everything here is a pure function of its inputs; there is no shared
mutable state, so all routines are safe to call from multiple threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BracketError, NumericError

_EPS = 2.220446049250313e-16
_TINY = 1e-300
_MAX_CF_ITER = 300


# ---------------------------------------------------------------------------
# box constraints


@dataclass(frozen=True)
class BoxConstraint:
    """Axis-aligned box with finite bounds, lower[i] < upper[i]."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(x) for x in self.lower)
        hi = tuple(float(x) for x in self.upper)
        if len(lo) != len(hi) or not lo:
            raise ValueError("lower and upper must be non-empty and equally long")
        for a, b in zip(lo, hi):
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError("box bounds must be finite")
            if not a < b:
                raise ValueError(f"need lower < upper, got [{a}, {b}]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def project(self, x):
        return np.minimum(np.maximum(np.asarray(x, dtype=float), self.lower), self.upper)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


# ---------------------------------------------------------------------------
# regularized incomplete gamma


def _gamma_series(a: float, x: float) -> float:
    # series for P(a, x), valid and fast for x < a + 1
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_CF_ITER * 4):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))

def _gamma_cf(a: float, x: float) -> float:
    # Lentz continued fraction for Q(a, x), valid for x >= a + 1
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_CF_ITER * 4):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def reg_incomplete_gamma(shape: float, x: float) -> float:
    """Regularized lower incomplete gamma P(shape, x), in [0, 1]."""
    if not shape > 0:
        raise ValueError(f"shape must be positive, got {shape}")
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    if x == 0.0:
        return 0.0
    if x < shape + 1.0:
        p = _gamma_series(shape, x)
    else:
        p = 1.0 - _gamma_cf(shape, x)
    return min(max(p, 0.0), 1.0)


def _gamma_logpdf(a: float, x: float) -> float:
    return -x + (a - 1.0) * math.log(x) - math.lgamma(a)


def reg_incomplete_gamma_inv(shape: float, q: float) -> float:
    """Inverse of ``reg_incomplete_gamma`` in x, for q in [0, 1)."""
    if not shape > 0:
        raise ValueError(f"shape must be positive, got {shape}")
    if not 0.0 <= q < 1.0:
        raise ValueError(f"q must lie in [0, 1), got {q}")
    if q == 0.0:
        return 0.0

    # Wilson-Hilferty start, with a small-q series start as fallback
    g = _norm_quantile(q)
    t = 1.0 - 1.0 / (9.0 * shape) + g / (3.0 * math.sqrt(shape))
    x = shape * t * t * t if t > 0 else 0.0
    if x <= 0.0 or q < 1e-6:
        # P(a, x) ~ x^a / Gamma(a+1) near zero
        x = math.exp((math.log(q) + math.lgamma(shape + 1.0)) / shape)

    lo, hi = 0.0, max(2.0 * x, shape + 10.0)
    while reg_incomplete_gamma(shape, hi) < q:
        lo = hi
        hi *= 2.0
        if hi > 1e300:
            raise NumericError("incomplete gamma inverse bracket overflow")
    if not lo < x < hi:
        x = 0.5 * (lo + hi)

    for _ in range(100):
        f = reg_incomplete_gamma(shape, x) - q
        if abs(f) <= 1e-15 * q:
            return x
        if f > 0:
            hi = x
        else:
            lo = x
        logpdf = _gamma_logpdf(shape, x) if x > 0 else -math.inf
        x_new = x - f * math.exp(-logpdf) if logpdf > -700.0 else 0.5 * (lo + hi)
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-15 * max(x, 1e-300):
            return x_new
        x = x_new
    return x


def _reg_incomplete_gamma_inv_vec(shape: float, q: np.ndarray) -> np.ndarray:
    """Vectorized inverse of P(shape, .): log-space bisection, ~1e-14 relative."""
    q = np.asarray(q, dtype=float)
    if np.any(q < 0) or np.any(q >= 1):
        raise ValueError("q must lie in [0, 1)")
    qmax = float(np.max(q)) if q.size else 0.0
    hi_x = reg_incomplete_gamma_inv(shape, qmax) * 1.000001 + 1e-12 if qmax > 0 else 1.0
    lo = np.full(q.shape, math.log(_TINY))
    hi = np.full(q.shape, math.log(max(hi_x, 1e-6)))
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        ge = _reg_incomplete_gamma_vec(shape, np.exp(mid)) >= q
        hi = np.where(ge, mid, hi)
        lo = np.where(ge, lo, mid)
    out = np.exp(0.5 * (lo + hi))
    return np.where(q == 0.0, 0.0, out)


def _reg_incomplete_gamma_vec(shape: float, x: np.ndarray) -> np.ndarray:
    """Vectorized P(shape, x) for a scalar shape; matches the scalar routine."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=float)
    lg = math.lgamma(shape)

    ser = (x > 0) & (x < shape + 1.0)
    if np.any(ser):
        xs = x[ser]
        term = np.full(xs.shape, 1.0 / shape)
        total = term.copy()
        ap = shape
        for _ in range(_MAX_CF_ITER * 4):
            ap += 1.0
            term *= xs / ap
            total += term
            if np.max(np.abs(term)) < np.min(np.abs(total)) * _EPS:
                break
        out[ser] = total * np.exp(-xs + shape * np.log(xs) - lg)

    cf = x >= shape + 1.0
    if np.any(cf):
        xc = x[cf]
        b = xc + 1.0 - shape
        c = np.full(xc.shape, 1.0 / _TINY)
        d = 1.0 / b
        h = d.copy()
        for i in range(1, _MAX_CF_ITER * 4):
            an = -i * (i - shape)
            b = b + 2.0
            d = an * d + b
            d = np.where(np.abs(d) < _TINY, _TINY, d)
            c = b + an / c
            c = np.where(np.abs(c) < _TINY, _TINY, c)
            d = 1.0 / d
            delta = d * c
            h *= delta
            if np.all(np.abs(delta - 1.0) < 1e-15):
                break
        out[cf] = 1.0 - np.exp(-xc + shape * np.log(xc) - lg) * h

    return np.clip(out, 0.0, 1.0)


# ---------------------------------------------------------------------------
# regularized incomplete beta and the Student t distribution


def _beta_cf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    # iteration count grows like sqrt(max(a, b)); 800 covers df up to ~1e5
    for m in range(1, 800):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def reg_incomplete_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    lbeta = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    front = math.exp(lbeta + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return min(max(front * _beta_cf(a, b, x) / a, 0.0), 1.0)
    return min(max(1.0 - front * _beta_cf(b, a, 1.0 - x) / b, 0.0), 1.0)


def _beta_cf_vec(a: float, b: float, x: np.ndarray) -> np.ndarray:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    for m in range(1, 800):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h *= delta
        if np.all(np.abs(delta - 1.0) < 1e-15):
            break
    return h


def _reg_incomplete_beta_vec(a: float, b: float, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    out[x <= 0.0] = 0.0
    out[x >= 1.0] = 1.0
    inner = (x > 0.0) & (x < 1.0)
    if np.any(inner):
        xi = x[inner]
        lbeta = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        front = np.exp(lbeta + a * np.log(xi) + b * np.log1p(-xi))
        res = np.empty_like(xi)
        direct = xi < (a + 1.0) / (a + b + 2.0)
        if np.any(direct):
            res[direct] = front[direct] * _beta_cf_vec(a, b, xi[direct]) / a
        if np.any(~direct):
            res[~direct] = 1.0 - front[~direct] * _beta_cf_vec(b, a, 1.0 - xi[~direct]) / b
        out[inner] = np.clip(res, 0.0, 1.0)
    return out


def student_t_cdf(x: float, df: float) -> float:
    """Student t cdf with ``df`` degrees of freedom."""
    if not df > 0:
        raise ValueError(f"df must be positive, got {df}")
    if x == 0.0:
        return 0.5
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    z = df / (df + x * x)
    p = 0.5 * reg_incomplete_beta(0.5 * df, 0.5, z)
    return p if x < 0 else 1.0 - p


def _student_t_cdf_vec(x: np.ndarray, df: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    z = df / (df + x * x)
    p = 0.5 * _reg_incomplete_beta_vec(0.5 * df, 0.5, z)
    return np.where(x < 0, p, 1.0 - p)


def _student_t_logpdf(x: float, df: float) -> float:
    c = math.lgamma(0.5 * (df + 1.0)) - math.lgamma(0.5 * df) - 0.5 * math.log(df * math.pi)
    ax = abs(x)
    if ax > 1e150:
        body = 2.0 * math.log(ax) - math.log(df)
    else:
        body = math.log1p(x * x / df)
    return c - 0.5 * (df + 1.0) * body


def student_t_quantile(q: float, df: float) -> float:
    """Inverse Student t cdf, accurate to ~1e-13 on the probability scale."""
    if not df > 0:
        raise ValueError(f"df must be positive, got {df}")
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    if q == 0.5:
        return 0.0
    if q > 0.5:
        return -student_t_quantile(1.0 - q, df)

    # q < 0.5 from here on; exact closed forms where cheap
    if df == 1.0:
        return math.tan(math.pi * (q - 0.5))
    if df == 2.0:
        return (2.0 * q - 1.0) / math.sqrt(2.0 * q * (1.0 - q))

    if q < 1e-4:
        # tail start: T_df(-x) ~ c * x^(-df)
        logc = (
            math.lgamma(0.5 * (df + 1.0))
            - math.lgamma(0.5 * df)
            - 0.5 * math.log(df * math.pi)
            + 0.5 * (df + 1.0) * math.log(df)
            - math.log(df)
        )
        x0 = -math.exp((logc - math.log(q)) / df)
    elif df > 2.0:
        x0 = _norm_quantile(q) * math.sqrt(df / (df - 2.0))
    else:
        x0 = _norm_quantile(q) * 2.0

    lo, hi = None, None  # bracket: T(lo) < q < T(hi)
    x = x0
    f = student_t_cdf(x, df) - q
    grow = abs(x0) + 1.0
    while f > 0:
        hi = x
        x -= grow
        grow *= 2.0
        f = student_t_cdf(x, df) - q
    lo = x
    if hi is None:
        x2, g2 = x0, f
        while g2 < 0:
            x2 += grow
            grow *= 2.0
            g2 = student_t_cdf(x2, df) - q
        hi = x2

    x = 0.5 * (lo + hi)
    for _ in range(200):
        f = student_t_cdf(x, df) - q
        if abs(f) <= 1e-15 * q:
            return x
        if f > 0:
            hi = x
        else:
            lo = x
        neg_logpdf = -_student_t_logpdf(x, df)
        x_new = x - f * math.exp(neg_logpdf) if neg_logpdf < 700.0 else 0.5 * (lo + hi)
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-14 * max(abs(x), 1.0):
            return x_new
        x = x_new
    return x


# ---------------------------------------------------------------------------
# normal distribution helpers (substrate for the Gaussian copula)

_SQRT2 = math.sqrt(2.0)


def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def _norm_quantile(q: float) -> float:
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    # Acklam's rational approximation, then one Halley refinement
    a = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
    b = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01)
    c = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
         -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
    d = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
         3.754408661907416e+00)
    plow, phigh = 0.02425, 1.0 - 0.02425
    if q < plow:
        r = math.sqrt(-2.0 * math.log(q))
        x = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) / \
            ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0)
    elif q <= phigh:
        r = q - 0.5
        s = r * r
        x = (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * r / \
            (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0)
    else:
        r = math.sqrt(-2.0 * math.log1p(-q))
        x = -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) / \
            ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0)
    e = norm_cdf(x) - q
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


# ---------------------------------------------------------------------------
# root finding and quadrature


def find_root_monotone(f: Callable[[float], float], lo: float, hi: float,
                       tol: float = 1e-12) -> float:
    """Left-most x in [lo, hi] with f(x) >= 0, for nondecreasing f.

    Bisection to interval width <= tol. Flat solution sets resolve to their
    left endpoint, matching the generalized-inverse convention
    inf{x : f(x) >= 0}.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    flo, fhi = f(lo), f(hi)
    if flo >= 0.0:
        return lo
    if fhi < 0.0:
        raise BracketError(lo, hi, flo, fhi)
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if f(mid) >= 0.0:
            b = mid
        else:
            a = mid
    return b


def _bisect_monotone_rel(f: Callable[[float], float], lo: float, hi: float,
                         rtol: float = 5e-14, max_iter: int = 240) -> float:
    """Bisection with a width criterion relative to the right endpoint.

    Same left-endpoint convention as :func:`find_root_monotone`; resolves
    roots close to ``lo`` with full relative accuracy, which an absolute
    width criterion cannot.
    """
    flo, fhi = f(lo), f(hi)
    if flo >= 0.0:
        return lo
    if fhi < 0.0:
        raise BracketError(lo, hi, flo, fhi)
    a, b = lo, hi
    for _ in range(max_iter):
        if b - a <= rtol * max(abs(b), _TINY):
            break
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if f(mid) >= 0.0:
            b = mid
        else:
            a = mid
    return b


def integrate_unit_interval(f: Callable[[np.ndarray], np.ndarray], panels: int) -> float:
    """Composite midpoint rule over (0, 1) with ``panels`` equal panels.

    ``f`` must accept the full array of midpoints and return an array of
    values; non-finite values raise, naming the offending abscissa.
    """
    if panels < 1:
        raise ValueError("panels must be >= 1")
    mids = (np.arange(panels) + 0.5) / panels
    vals = np.asarray(f(mids), dtype=float)
    if vals.shape != mids.shape:
        raise ValueError("integrand must return one value per midpoint")
    if not np.all(np.isfinite(vals)):
        bad = mids[~np.isfinite(vals)][0]
        raise NumericError(f"non-finite integrand value at x={bad!r}")
    return float(vals.mean())


def _adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                      tol: float = 1e-11, max_depth: int = 30) -> float:
    """Adaptive Simpson quadrature on [a, b] for a scalar integrand."""
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0

    def recurse(a, m, b, fa, fm, fb, whole, tol, depth):
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
        right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (recurse(a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1))

    return recurse(a, m, b, fa, fm, fb, whole, tol, max_depth)


# ---------------------------------------------------------------------------
# derivative-free minimization


@dataclass(frozen=True)
class MinimizeResult:
    x: tuple
    fun: float
    nfev: int
    flat: bool


def minimize_derivative_free(objective: Callable, box: BoxConstraint,
                             init: Sequence[float], *, seed: int = 0,
                             max_evals: int = 2000,
                             diam_tol: float = 1e-6) -> MinimizeResult:
    """Nelder-Mead simplex descent with box projection and one random restart.

    Terminates a descent when the simplex diameter drops below ``diam_tol``
    or the total evaluation budget ``max_evals`` is exhausted. Deterministic
    given ``init`` and ``seed`` (the restart point is drawn from
    ``default_rng(seed)``).
    """
    x0 = box.project(init)
    if not box.contains(init):
        raise ValueError(f"init {tuple(init)} lies outside the box")
    state = {"nfev": 0, "all_equal": True, "f0": None}

    def fw(x):
        state["nfev"] += 1
        val = float(objective(np.asarray(x, dtype=float)))
        if state["f0"] is None:
            state["f0"] = val
        elif val != state["f0"]:
            state["all_equal"] = False
        return val

    f0 = fw(x0)
    if math.isnan(f0):
        raise ValueError("objective is NaN at init")

    best_x, best_f = np.array(x0), f0

    def descend(start, budget):
        nonlocal best_x, best_f
        n = box.dim
        scale = 0.05 * (np.array(box.upper) - np.array(box.lower))
        pts = [np.array(start, dtype=float)]
        for i in range(n):
            p = np.array(start, dtype=float)
            step = scale[i] if p[i] + scale[i] <= box.upper[i] else -scale[i]
            p[i] += step
            pts.append(box.project(p))
        used = 0
        vals = []
        for p in pts:
            if used >= budget:
                return used
            vals.append(fw(p))
            used += 1
        simplex = list(zip(pts, vals))
        while used < budget:
            simplex.sort(key=lambda t: t[1])
            if simplex[0][1] < best_f:
                best_x, best_f = simplex[0][0].copy(), simplex[0][1]
            diam = max(np.max(np.abs(p - simplex[0][0])) for p, _ in simplex)
            if diam < diam_tol:
                break
            centroid = np.mean([p for p, _ in simplex[:-1]], axis=0)
            worst, fworst = simplex[-1]
            xr = box.project(centroid + (centroid - worst))
            fr = fw(xr); used += 1
            if simplex[0][1] <= fr < simplex[-2][1]:
                simplex[-1] = (xr, fr)
                continue
            if fr < simplex[0][1]:
                if used >= budget:
                    simplex[-1] = (xr, fr)
                    break
                xe = box.project(centroid + 2.0 * (centroid - worst))
                fe = fw(xe); used += 1
                simplex[-1] = (xe, fe) if fe < fr else (xr, fr)
                continue
            if used >= budget:
                break
            xc = box.project(centroid + 0.5 * (worst - centroid))
            fc = fw(xc); used += 1
            if fc < fworst:
                simplex[-1] = (xc, fc)
                continue
            # shrink toward the best point
            x_best = simplex[0][0]
            new = [(x_best, simplex[0][1])]
            for p, _ in simplex[1:]:
                if used >= budget:
                    break
                ps = box.project(x_best + 0.5 * (p - x_best))
                new.append((ps, fw(ps)))
                used += 1
            simplex = new
            if len(simplex) < 2:
                break
        simplex.sort(key=lambda t: t[1])
        if simplex and simplex[0][1] < best_f:
            best_x, best_f = simplex[0][0].copy(), simplex[0][1]
        return used

    budget = max_evals - state["nfev"]
    used = descend(x0, budget)
    remaining = max_evals - state["nfev"]
    if remaining > box.dim + 2:
        rng = np.random.default_rng(seed)
        restart = np.array(box.lower) + rng.random(box.dim) * (
            np.array(box.upper) - np.array(box.lower))
        descend(restart, remaining)

    if state["all_equal"]:
        return MinimizeResult(tuple(map(float, x0)), f0, state["nfev"], True)
    return MinimizeResult(tuple(map(float, best_x)), best_f, state["nfev"], False)
