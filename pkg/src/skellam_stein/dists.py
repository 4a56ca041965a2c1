"""Finite-support integer distributions: exact convolution, negation,
empirical histograms, and total variation with tracked truncation slack.

An :class:`IntegerDist` is the common currency for exact computation: a
probability vector on a contiguous integer window plus the mass that the
window does not capture.  Total variation is always reported as an interval
(value, slack) so truncation can never manufacture a false pass when the
upper endpoint is compared against a bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

MASS_ATOL = 1e-9         # |sum + tail - 1| tolerated on construction
DIRECT_CONV_LIMIT = 4096  # windows below this convolve by the direct kernel
CONV_WINDOW_CAP = 10**7   # combined output window cap for convolve


class ResourceLimitError(RuntimeError):
    """An exact computation would exceed a declared size cap."""


@dataclass
class IntegerDist:
    """Probability vector on the window [min_support, min_support + len - 1].

    tail_mass is the probability not captured by the window; the captured
    mass plus the tail must account for the whole distribution.
    """

    min_support: int
    probabilities: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        p = np.ascontiguousarray(np.asarray(self.probabilities, dtype=np.float64))
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probabilities must be a non-empty 1-D vector")
        # FFT round-off may leave values like -1e-17; anything worse is a bug.
        if np.any(p < -1e-12):
            raise ValueError("negative probability in distribution window")
        np.maximum(p, 0.0, out=p)
        self.probabilities = p
        self.min_support = int(self.min_support)
        self.tail_mass = float(self.tail_mass)
        if not 0.0 <= self.tail_mass < 1.0:
            raise ValueError(f"tail_mass {self.tail_mass} outside [0, 1)")
        total = float(p.sum()) + self.tail_mass
        if abs(total - 1.0) > MASS_ATOL:
            raise ValueError(f"window mass + tail = {total}, not 1 within {MASS_ATOL}")

    @classmethod
    def point_mass(cls, k: int) -> "IntegerDist":
        return cls(k, np.ones(1))

    @property
    def max_support(self) -> int:
        return self.min_support + self.probabilities.size - 1

    def support(self) -> np.ndarray:
        return np.arange(self.min_support, self.max_support + 1)

    def prob(self, k: int) -> float:
        if self.min_support <= k <= self.max_support:
            return float(self.probabilities[k - self.min_support])
        return 0.0

    def window_mass(self) -> float:
        return float(self.probabilities.sum())

    def mean(self) -> float:
        return float(self.probabilities @ self.support())

    def variance(self) -> float:
        m = self.mean()
        return float(self.probabilities @ (self.support() - m) ** 2)


@dataclass(frozen=True)
class TVInterval:
    """TV estimate with truncation slack: true TV lies in [value - slack, value + slack]."""

    value: float
    slack: float

    @property
    def upper(self) -> float:
        return self.value + self.slack

    @property
    def lower(self) -> float:
        return max(0.0, self.value - self.slack)


def tv_distance(d1: IntegerDist, d2: IntegerDist) -> TVInterval:
    """Total variation over the union window, with slack from the tails."""
    lo = min(d1.min_support, d2.min_support)
    hi = max(d1.max_support, d2.max_support)
    p = np.zeros(hi - lo + 1)
    q = np.zeros(hi - lo + 1)
    p[d1.min_support - lo : d1.max_support - lo + 1] = d1.probabilities
    q[d2.min_support - lo : d2.max_support - lo + 1] = d2.probabilities
    value = 0.5 * float(np.abs(p - q).sum())
    slack = 0.5 * (d1.tail_mass + d2.tail_mass)
    return TVInterval(value, slack)


def convolve(d1: IntegerDist, d2: IntegerDist) -> IntegerDist:
    """Exact law of the sum of independent draws; tail masses combine."""
    n1, n2 = d1.probabilities.size, d2.probabilities.size
    n_out = n1 + n2 - 1
    if n_out > CONV_WINDOW_CAP:
        raise ResourceLimitError(
            f"convolution window {n_out} exceeds cap {CONV_WINDOW_CAP}"
        )
    if max(n1, n2) < DIRECT_CONV_LIMIT:
        probs = kernels.convolve(d1.probabilities, d2.probabilities)
    else:
        probs = _fft_convolve(d1.probabilities, d2.probabilities)
    # mass not captured: 1 - (1 - t1)(1 - t2)
    tail = d1.tail_mass + d2.tail_mass - d1.tail_mass * d2.tail_mass
    return IntegerDist(d1.min_support + d2.min_support, probs, tail)


def _fft_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n_out = a.size + b.size - 1
    n_fft = 1 << (n_out - 1).bit_length()
    out = np.fft.irfft(np.fft.rfft(a, n_fft) * np.fft.rfft(b, n_fft), n_fft)[:n_out]
    return np.maximum(out, 0.0)


def negate(d: IntegerDist) -> IntegerDist:
    """Law of -X: reflected window."""
    return IntegerDist(-d.max_support, d.probabilities[::-1].copy(), d.tail_mass)


def empirical_dist(samples) -> IntegerDist:
    """Normalized histogram of integer samples; no tail mass."""
    arr = np.asarray(samples)
    if arr.size == 0:
        raise ValueError("cannot build an empirical distribution from no samples")
    arr = arr.astype(np.int64)
    lo = int(arr.min())
    counts = np.bincount(arr - lo)
    return IntegerDist(lo, counts / arr.size, 0.0)
