"""Numeric primitives: modified Bessel functions of integer order, windowed
Poisson and binomial probability vectors, and adaptive half-line quadrature.

Bessel values are computed in log scale so extreme arguments stay usable.
Small arguments use the ascending power series; large arguments use backward
ratio recursion normalized by the scaled-sum identity, which never overflows.
Quadrature maps [0, inf) to (0, 1] via u = exp(-t) and applies an adaptive
Gauss-Kronrod 7/15 rule whose nodes avoid the endpoints.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .dists import IntegerDist

MAX_EXP = 709.782712893384  # largest x with exp(x) finite in float64
_SERIES_X_MAX = 30.0
_NEG_INF = float("-inf")


class QuadratureError(RuntimeError):
    """Adaptive quadrature hit maximum depth without meeting tolerance."""


@dataclass(frozen=True)
class LogReal:
    """Non-negative real carried as log magnitude; -inf encodes zero."""

    log_magnitude: float

    @classmethod
    def zero(cls) -> "LogReal":
        return cls(_NEG_INF)

    @classmethod
    def from_value(cls, v: float) -> "LogReal":
        if v < 0:
            raise ValueError("LogReal represents non-negative reals")
        return cls(math.log(v) if v > 0 else _NEG_INF)

    def value(self) -> float:
        if self.log_magnitude > MAX_EXP:
            raise OverflowError("value exceeds float64 range")
        return math.exp(self.log_magnitude)

    def is_zero(self) -> bool:
        return self.log_magnitude == _NEG_INF


def _log_scaled_iv_series(k: int, x: float) -> float:
    """log(exp(-x) * I_k(x)) by the ascending series; k >= 0, x >= 0."""
    if x == 0.0:
        return 0.0 if k == 0 else _NEG_INF
    log_t0 = k * math.log(0.5 * x) - math.lgamma(k + 1) - x
    q = 0.25 * x * x
    s = 1.0
    term = 1.0
    log_scale = 0.0
    m = 0
    while True:
        m += 1
        term *= q / (m * (k + m))
        s += term
        if term <= s * 1e-18 and m >= 2:
            break
        if s > 1e280:
            s *= 1e-280
            term *= 1e-280
            log_scale += 280.0 * math.log(10.0)
        if m > 5_000_000:
            raise RuntimeError("Bessel series failed to converge")
    return log_t0 + log_scale + math.log(s)


def _log_scaled_iv_table_raw(x: float, kmax: int) -> np.ndarray:
    """log(exp(-x) * I_k(x)) for k = 0..kmax via backward ratios.

    Ratios r_m = I_m / I_{m-1} lie in (0, 1) and come from the dominant
    solution of the three-term recurrence, so the continued fraction is
    forward stable.  Products are accumulated as logs in extended
    precision: deep-tail orders underflow float64 by thousands of decades
    yet must stay usable under large compensating tilts.  Normalization is
    exp(-x) * (I_0 + 2 sum_{m>=1} I_m) = 1.
    """
    # Start high enough that I_{m_top} / I_kmax < 1e-21 seeds an accurate
    # downward pass: m_top^2 - kmax^2 = 100 x gives exp(-50) in the
    # Gaussian order regime, faster decay beyond it.
    m_top = int(math.sqrt(kmax * kmax + 100.0 * x)) + 20
    ratios = np.empty(m_top)
    r = 0.0
    for m in range(m_top, 0, -1):
        r = 1.0 / (2.0 * m / x + r)
        ratios[m - 1] = r
    log_t = np.cumsum(np.log(ratios), dtype=np.longdouble)  # log(I_m / I_0)
    peak = max(0.0, float(log_t.max()))
    norm = np.exp(np.longdouble(-peak)) + 2.0 * np.exp(log_t - peak).sum()
    log_norm = peak + np.log(norm)
    out = np.empty(kmax + 1)
    out[0] = float(-log_norm)
    out[1:] = (log_t[:kmax] - log_norm).astype(np.float64)
    return out


@lru_cache(maxsize=64)
def _log_scaled_iv_table_cached(x: float, kmax_bucket: int) -> np.ndarray:
    table = _log_scaled_iv_table_raw(x, kmax_bucket)
    table.setflags(write=False)
    return table


def log_scaled_iv_table(x: float, kmax: int) -> np.ndarray:
    """Read-only table of log(exp(-x) * I_k(x)), k = 0..kmax (at least), x > 0."""
    bucket = max(64, 1 << int(kmax).bit_length())
    return _log_scaled_iv_table_cached(float(x), bucket)


def log_scaled_iv(order: int, x: float) -> LogReal:
    """log(exp(-x) * I_order(x)) as a LogReal; order may be negative."""
    k = abs(int(order))
    if k > 4 * 10**6:
        raise ValueError("order magnitude above 4e6 is unsupported")
    if x < 0:
        raise ValueError("argument must be non-negative")
    if x == 0.0:
        return LogReal(0.0 if k == 0 else _NEG_INF)
    # The series is cheap when it converges in few terms; otherwise the
    # ratio table costs O(sqrt(k^2 + 100 x)) once and is cached.
    if x <= _SERIES_X_MAX or 0.25 * x * x / (k + 1.0) <= 64.0:
        return LogReal(_log_scaled_iv_series(k, x))
    return LogReal(float(log_scaled_iv_table(x, k)[k]))


def bessel_i(order: int, x: float, scaled: bool = False) -> float:
    """Modified Bessel I_order(x) for integer order |order| <= 10^6, x >= 0.

    scaled=True returns exp(-x) * I_order(x), which never overflows.
    Unscaled values raise OverflowError once the result leaves float64
    range, which can only happen when exp(x) itself overflows.
    """
    if abs(int(order)) > 10**6:
        raise ValueError("order magnitude above 10^6 is unsupported")
    lv = log_scaled_iv(order, x)
    if lv.is_zero():
        return 0.0
    if scaled:
        return math.exp(lv.log_magnitude)
    total = lv.log_magnitude + x
    if total > MAX_EXP:
        raise OverflowError(
            f"I_{abs(int(order))}({x}) overflows float64; use scaled=True"
        )
    return math.exp(total)


def poisson_dist(lam: float, tail_tol: float = 1e-12) -> IntegerDist:
    """Poisson(lam) on a window holding at least 1 - tail_tol of the mass.

    Probabilities follow ratio recursion outward from the mode, so no
    factorials are formed and relative accuracy is uniform over the window.
    """
    if lam < 0:
        raise ValueError("rate must be non-negative")
    if not 0.0 < tail_tol < 1.0:
        raise ValueError("tail_tol must lie in (0, 1)")
    if lam == 0.0:
        return IntegerDist.point_mass(0)
    mode = int(lam)
    log_pm = mode * math.log(lam) - lam - math.lgamma(mode + 1)
    pm = math.exp(log_pm)
    left = []   # mode-1, mode-2, ...
    right = []  # mode+1, mode+2, ...
    # Kahan summation: the captured-mass target can sit below the plain
    # float-sum error once windows reach thousands of terms.
    total, comp = pm, 0.0
    lo_p, lo_k = pm, mode   # frontier value/index on the left
    hi_p, hi_k = pm, mode   # frontier value/index on the right
    target = 1.0 - tail_tol
    # Past +-12 sd any remaining gap is float64 bias, not real mass.
    width_cap = int(24.0 * math.sqrt(lam)) + 100
    while total < target:
        next_lo = lo_p * lo_k / lam if lo_k > 0 else 0.0
        next_hi = hi_p * lam / (hi_k + 1)
        if next_lo == 0.0 and next_hi == 0.0:
            break
        if hi_k - lo_k >= width_cap:
            break
        if next_lo >= next_hi and lo_k > 0:
            lo_p, lo_k = next_lo, lo_k - 1
            left.append(lo_p)
            add = lo_p
        else:
            hi_p, hi_k = next_hi, hi_k + 1
            right.append(hi_p)
            add = hi_p
        y = add - comp
        t = total + y
        comp = (t - total) - y
        total = t
    probs = np.array(left[::-1] + [pm] + right)
    return IntegerDist(lo_k, probs, max(0.0, 1.0 - total))


def binomial_thin_dist(n: int, q: float) -> IntegerDist:
    """Binomial(n, q) on its full window {0..n}; exact, no tail."""
    if n < 0 or int(n) != n:
        raise ValueError("n must be a non-negative integer")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    n = int(n)
    if n == 0 or q == 0.0:
        return IntegerDist.point_mass(0)
    if q == 1.0:
        return IntegerDist.point_mass(n)
    mode = min(n, int((n + 1) * q))
    log_pm = (
        math.lgamma(n + 1) - math.lgamma(mode + 1) - math.lgamma(n - mode + 1)
        + mode * math.log(q) + (n - mode) * math.log1p(-q)
    )
    probs = np.zeros(n + 1)
    probs[mode] = math.exp(log_pm)
    ratio = q / (1.0 - q)
    for k in range(mode, n):
        probs[k + 1] = probs[k] * ratio * (n - k) / (k + 1)
    for k in range(mode, 0, -1):
        probs[k - 1] = probs[k] / ratio * k / (n - k + 1)
    return IntegerDist(0, probs, max(0.0, 1.0 - float(probs.sum())))


# Gauss-Kronrod 7/15 on [-1, 1]: Kronrod nodes/weights, with the embedded
# 7-point Gauss rule living on the odd-indexed nodes.
_GK_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_GK_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_GK_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870,
])
_GAUSS_IDX = (1, 3, 5, 7, 9, 11, 13)
# Weight applied when accumulating the (Kronrod - Gauss) defect per node.
_GK_WDIFF = _GK_WK.copy()
for _i, _j in enumerate(_GAUSS_IDX):
    _GK_WDIFF[_j] -= _GK_WG[_i]

_MAX_DEPTH = 60


def _abs_norm(v) -> float:
    if isinstance(v, np.ndarray):
        return float(np.abs(v).sum())
    return abs(v)


def adaptive_gauss_kronrod(
    fn: Callable,
    a: float,
    b: float,
    abs_tol: float,
    norm: Callable = _abs_norm,
    max_depth: int = _MAX_DEPTH,
):
    """Integrate fn over [a, b] to absolute tolerance abs_tol.

    fn may return floats or ndarrays (one shape throughout); norm maps a
    value of that shape to a scalar used for the error test.  The worst
    interval (by the Kronrod-Gauss defect) is bisected until the summed
    defects meet abs_tol.  Returns (integral, error_estimate).  Raises
    QuadratureError when the target is still unmet at max_depth.
    """
    if not b > a:
        raise ValueError("need b > a")
    if not abs_tol > 0.0:
        raise ValueError("abs_tol must be positive")

    def rule(lo: float, hi: float):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        acc_k = None
        acc_d = None
        for i in range(15):
            v = fn(mid + half * _GK_NODES[i])
            wk = half * _GK_WK[i]
            wd = half * _GK_WDIFF[i]
            if acc_k is None:
                acc_k = wk * v
                acc_d = wd * v
            else:
                acc_k += wk * v
                acc_d += wd * v
        return acc_k, norm(acc_d)

    done_val = None
    done_err = 0.0
    tick = 0
    # heap entries: (-err, tick, lo, hi, depth, value, err)
    val, err = rule(a, b)
    heap = [(-err, tick, a, b, 0, val, err)]
    pending_err = err
    # An interval this clean cannot usefully shrink the total further.
    floor = abs_tol / (64.0 * 15.0)
    while heap:
        if done_err + pending_err <= abs_tol:
            break
        neg, _, lo, hi, depth, val, err = heapq.heappop(heap)
        pending_err -= err
        if err <= floor:
            # Worst interval already negligible: estimates have saturated.
            done_val = val if done_val is None else done_val + val
            done_err += err
            continue
        if depth >= max_depth:
            raise QuadratureError(
                f"tolerance {abs_tol} unmet on [{lo}, {hi}] at depth {depth}"
            )
        mid = 0.5 * (lo + hi)
        for c_lo, c_hi in ((lo, mid), (mid, hi)):
            c_val, c_err = rule(c_lo, c_hi)
            tick += 1
            heapq.heappush(heap, (-c_err, tick, c_lo, c_hi, depth + 1, c_val, c_err))
            pending_err += c_err
    for _, _, _, _, _, val, err in heap:
        done_val = val if done_val is None else done_val + val
        done_err += err
    return done_val, done_err


def time_of_node(u: float) -> float:
    """Map a quadrature node u in (0, 1] to t = -log(u), kept strictly > 0.

    log1p keeps precision when u is near 1 (t near 0); if rounding lands a
    node exactly on u = 1 the result is nudged to the smallest positive
    float so integrands are never evaluated at t = 0.
    """
    t = -math.log1p(u - 1.0) if u > 0.5 else -math.log(u)
    return t if t > 0.0 else 5e-324


def integrate_halfline(fn: Callable[[float], float], abs_tol: float = 1e-10) -> float:
    """Integral of fn over [0, inf) via the substitution u = exp(-t).

    The transformed integrand g(u) = fn(-log u) / u is evaluated only at
    interior nodes of (0, 1], never at t = 0 or t = inf.  Suited to
    integrands bounded near t = 0 with exponential-type decay; raises
    QuadratureError if refinement cannot certify abs_tol.
    """
    if not abs_tol > 0:
        raise ValueError("abs_tol must be positive")
    value, _ = adaptive_gauss_kronrod(
        lambda u: fn(time_of_node(u)) / u, 0.0, 1.0, abs_tol
    )
    return float(value)
