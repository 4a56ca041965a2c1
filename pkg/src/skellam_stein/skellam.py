"""The integer-valued law of a difference of two independent Poisson counts.

All pmf arithmetic runs in log scale with a single final exponentiation, so
rates up to 10^6 stay inside float64.  Zero rates are admitted only through
the explicit `extended` flag: they arise as continuity limits (the law
degenerates to a single Poisson or a point mass) and downstream models can
produce them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import special
from .dists import IntegerDist, negate

_WINDOW_CAP = 10**7


@dataclass(frozen=True)
class SkellamParams:
    """Rate pair (lambda1, lambda2); extended=True admits zero rates."""

    lambda1: float
    lambda2: float
    extended: bool = False

    def __post_init__(self):
        for name, v in (("lambda1", self.lambda1), ("lambda2", self.lambda2)):
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ValueError(f"{name} must be a finite real")
            if v < 0:
                raise ValueError(f"{name} must be non-negative")
            if v == 0 and not self.extended:
                raise ValueError(
                    f"{name} = 0 requires the extended zero-rate convention"
                )
        object.__setattr__(self, "lambda1", float(self.lambda1))
        object.__setattr__(self, "lambda2", float(self.lambda2))

    @property
    def total(self) -> float:
        return self.lambda1 + self.lambda2


def _log_poisson_pmf(lam: float, k: int) -> float:
    if k < 0:
        return float("-inf")
    if lam == 0.0:
        return 0.0 if k == 0 else float("-inf")
    return k * math.log(lam) - lam - math.lgamma(k + 1)


def log_pmf(params: SkellamParams, k: int) -> float:
    """log P(X = k); -inf where the mass is exactly zero."""
    k = int(k)
    l1, l2 = params.lambda1, params.lambda2
    if l2 == 0.0:
        return _log_poisson_pmf(l1, k)
    if l1 == 0.0:
        return _log_poisson_pmf(l2, -k)
    # log pmf = (k/2) log(l1/l2) - (sqrt(l1) - sqrt(l2))^2 + log ive_|k|(2 sqrt(l1 l2))
    x = 2.0 * math.sqrt(l1) * math.sqrt(l2)
    lv = special.log_scaled_iv(abs(k), x)
    if lv.is_zero():
        return float("-inf")
    tilt = 0.5 * k * (math.log(l1) - math.log(l2))
    root_gap = math.sqrt(l1) - math.sqrt(l2)
    return tilt - root_gap * root_gap + lv.log_magnitude


def pmf(params: SkellamParams, k: int) -> float:
    lp = log_pmf(params, k)
    return math.exp(lp) if lp > float("-inf") else 0.0


def moments(params: SkellamParams) -> tuple[float, float]:
    """(mean, variance) = (lambda1 - lambda2, lambda1 + lambda2)."""
    return params.lambda1 - params.lambda2, params.lambda1 + params.lambda2


def to_dist(params: SkellamParams, tail_tol: float = 1e-12) -> IntegerDist:
    """Window around the mean capturing at least 1 - tail_tol of the mass.

    The pmf is unimodal, so two-sided greedy expansion from round(mean)
    terminates with a near-minimal window.
    """
    if not 0.0 < tail_tol < 1.0:
        raise ValueError("tail_tol must lie in (0, 1)")
    l1, l2 = params.lambda1, params.lambda2
    if l1 == 0.0 and l2 == 0.0:
        return IntegerDist.point_mass(0)
    if l2 == 0.0:
        return special.poisson_dist(l1, tail_tol)
    if l1 == 0.0:
        return negate(special.poisson_dist(l2, tail_tol))

    center = int(round(l1 - l2))
    pc = pmf(params, center)
    left = []
    right = []
    # Compensated summation: plain accumulation can stall short of targets
    # near 1 - 1e-12 once windows reach thousands of terms.
    total, comp = pc, 0.0
    lo_k = center
    hi_k = center
    target = 1.0 - tail_tol
    # Past +-12 sd the true remaining mass is below 1e-30; any further gap
    # is float64 bias in the window values, so chasing it only widens the
    # window.  The honest residual is reported as tail mass.
    width_cap = int(24.0 * math.sqrt(params.total)) + 100
    while total < target:
        next_lo = pmf(params, lo_k - 1)
        next_hi = pmf(params, hi_k + 1)
        if next_lo == 0.0 and next_hi == 0.0:
            break
        if hi_k - lo_k >= width_cap:
            break
        if next_lo >= next_hi:
            lo_k -= 1
            left.append(next_lo)
            add = next_lo
        else:
            hi_k += 1
            right.append(next_hi)
            add = next_hi
        y = add - comp
        t = total + y
        comp = (t - total) - y
        total = t
    probs = np.array(left[::-1] + [pc] + right)
    return IntegerDist(lo_k, probs, max(0.0, 1.0 - total))


def cdf(params: SkellamParams, k: int, tail_tol: float = 1e-12) -> float:
    """P(X <= k), accurate to within tail_tol."""
    d = to_dist(params, tail_tol)
    if k < d.min_support:
        return 0.0
    if k >= d.max_support:
        return min(1.0, d.window_mass() + d.tail_mass)
    return float(d.probabilities[: k - d.min_support + 1].sum())


def sample(params: SkellamParams, rng: np.random.Generator, count: int) -> np.ndarray:
    """Difference of two independent Poisson draws per sample."""
    if count < 0:
        raise ValueError("count must be non-negative")
    a = rng.poisson(params.lambda1, count).astype(np.int64)
    b = rng.poisson(params.lambda2, count).astype(np.int64)
    return a - b


def max_pmf_bound(params: SkellamParams) -> float:
    """exp(-(l1+l2)) * I_0(l1+l2): a ceiling for every pmf value."""
    return special.bessel_i(0, params.total, scaled=True)
