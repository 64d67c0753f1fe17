"""Rank-based empirical tail functionals.

Pseudo-observations at rank/n (average ranks under ties), the empirical
copula, the conditional-cdf estimator on the k lowest-u points, the
empirical tail dependence function on shrinking windows, and the pair of
empirical tail coefficients used for regime classification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_K = 100  # threshold count used throughout the reference analyses


@dataclass(frozen=True)
class PseudoSample:
    """Rank-transformed paired observations on (0, 1]^2."""

    u: np.ndarray
    v: np.ndarray
    n: int

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if u.ndim != 1 or u.shape != v.shape or len(u) != self.n:
            raise ValueError("u and v must be 1-d arrays of length n")
        if np.any(u <= 0) or np.any(u > 1 + 1e-12) or np.any(v <= 0) or np.any(v > 1 + 1e-12):
            raise ValueError("pseudo-observations must lie in (0, 1]")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


@dataclass(frozen=True)
class TailCoefficients:
    lambda_hat: float        # lower-left empirical tail coefficient
    lambda_hat_2star: float  # upper-left coefficient (2-reflected sample)
    k: int
    n: int


def _average_ranks(x: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties assigned the average rank of their block."""
    order = np.argsort(x, kind="mergesort")
    sx = x[order]
    block_start = np.r_[True, sx[1:] != sx[:-1]]
    block_id = np.cumsum(block_start) - 1
    counts = np.bincount(block_id)
    first_rank = np.cumsum(counts) - counts + 1
    avg = first_rank[block_id] + (counts[block_id] - 1) / 2.0
    ranks = np.empty(len(x))
    ranks[order] = avg
    return ranks


def pseudo_observations(x, y) -> PseudoSample:
    """PseudoSample with U_i = rank(x_i)/n and V_i = rank(y_i)/n."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("x and y must be 1-d arrays of equal length")
    n = len(x)
    if n < 2:
        raise ValueError("need at least two observations")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("inputs must be finite")
    return PseudoSample(_average_ranks(x) / n, _average_ranks(y) / n, n)


def reflect2_sample(s: PseudoSample) -> PseudoSample:
    """2-reflected sample: V_i replaced by (n + 1 - rank(y_i)) / n."""
    return PseudoSample(s.u, (s.n + 1) / s.n - s.v, s.n)


def empirical_copula(s: PseudoSample, u: float, v: float) -> float:
    """Exact count of pairs with (U, V) <= (u, v), divided by n."""
    if not 0.0 <= u <= 1.0 or not 0.0 <= v <= 1.0:
        raise ValueError("(u, v) must lie in the unit square")
    return float(np.count_nonzero((s.u <= u) & (s.v <= v))) / s.n


def A_hat(s: PseudoSample, k: int, v):
    """Conditional-cdf estimator: mean of 1(V <= v) over the k lowest-u points.

    Vectorized over v. With distinct ranks exactly k points satisfy
    U <= k/n, so the value at v = 1 is exactly 1.
    """
    if not 1 <= k <= s.n:
        raise ValueError(f"k must lie in [1, n], got {k}")
    v = np.asarray(v, dtype=float)
    sel = np.sort(s.v[s.u <= k / s.n])
    out = np.searchsorted(sel, v, side="right") / k
    if out.ndim == 0:
        return float(out)
    return out


def b_hat(s: PseudoSample, k: int, w1, w2):
    """Empirical tail dependence function: count in the (k w1/n, k w2/n)
    window divided by k. Vectorized over (w1, w2)."""
    if not 1 <= k <= s.n:
        raise ValueError(f"k must lie in [1, n], got {k}")
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    wmax = max(np.max(w1), np.max(w2))
    if k * wmax / s.n > 1.0 + 1e-12:
        raise ValueError(
            f"window bound violated: k*max(w1,w2)/n = {k * wmax / s.n:.6g} > 1")
    t1 = np.atleast_1d(k * w1 / s.n)
    t2 = np.atleast_1d(k * w2 / s.n)
    keep = s.u <= min(1.0, k * wmax / s.n)
    uu, vv = s.u[keep], s.v[keep]
    counts = ((uu[None, :] <= t1[:, None]) & (vv[None, :] <= t2[:, None])).sum(axis=1)
    out = counts / k
    if np.asarray(w1).ndim == 0 and np.asarray(w2).ndim == 0:
        return float(out[0])
    return out


def tail_coefficients(s: PseudoSample, k: int = DEFAULT_K) -> TailCoefficients:
    """Empirical tail coefficients in the lower-left and upper-left corners."""
    lam = b_hat(s, k, 1.0, 1.0)
    lam2 = b_hat(reflect2_sample(s), k, 1.0, 1.0)
    return TailCoefficients(lam, lam2, k, s.n)
