"""Shared verification report structure and empirical-comparison thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .dists import TVInterval


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of checking an exact TV distance against a closed-form bound.

    satisfied means the upper end of the TV interval does not exceed the
    bound; an infinite bound is vacuously satisfied.  ratio is tv/bound,
    taken as 0 when both vanish.
    """

    tv: TVInterval
    bound: float
    satisfied: bool
    ratio: float
    extra: dict = field(default_factory=dict)


def make_report(tv: TVInterval, bound: float, extra: dict | None = None) -> VerificationReport:
    bound = float(bound)
    satisfied = math.isinf(bound) or tv.upper <= bound
    if bound > 0.0:
        ratio = tv.value / bound
    else:
        ratio = 0.0 if tv.value == 0.0 else math.inf
    return VerificationReport(tv, bound, bool(satisfied), float(ratio), extra or {})


def empirical_tv_threshold(trials: int, support_size: int, failure_prob: float = 1e-3) -> float:
    """Level exceeded by the empirical-vs-true TV with probability < failure_prob.

    Mean term: E TV = (1/2) E sum_k |phat_k - p_k| <= (1/2) sum_k sqrt(p_k / trials)
    <= (1/2) sqrt(support_size / trials) by Cauchy-Schwarz.  Deviation term:
    one sample moves TV by at most 1/trials, so a bounded-differences bound
    adds sqrt(log(1/failure_prob) / (2 trials)).
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    if support_size <= 0:
        raise ValueError("support_size must be positive")
    mean = 0.5 * math.sqrt(support_size / trials)
    deviation = math.sqrt(math.log(1.0 / failure_prob) / (2.0 * trials))
    return mean + deviation
