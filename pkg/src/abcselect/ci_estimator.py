"""Confidence bounds on a configuration's real test accuracy, derived from
one probe on sampled data, plus the snapshot clamping that keeps the
interval nested inside the one cached at the last pruning round.

Both bounds are Hoeffding-style: the upper bound starts from the train
accuracy on the sampled training set and adds deviation terms for the
training sample size and the full test set size; the lower bound starts
from the test accuracy on the sampled test set and subtracts a deviation
term for the test sample size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ConfidenceInterval, ConfigurationState, ProbeOutcome, clamp_interval

__all__ = [
    "BoundInputs",
    "clamp_to_cached",
    "estimate_ci",
    "lower_bound",
    "upper_bound",
]


@dataclass(frozen=True)
class BoundInputs:
    """Everything the bound formulas need besides the probe itself."""

    outcome: ProbeOutcome
    n_configs: int
    delta: float
    full_test_size: int

    def __post_init__(self) -> None:
        if self.n_configs < 1:
            raise ValueError(f"n_configs must be >= 1, got {self.n_configs}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if self.full_test_size < self.outcome.test_sample_size:
            raise ValueError(
                f"full_test_size {self.full_test_size} smaller than probe test "
                f"sample size {self.outcome.test_sample_size}"
            )


def upper_bound(inp: BoundInputs) -> float:
    """Unclamped upper confidence bound of the real test accuracy.

    acc_train + sqrt(ln(4 n^2 / delta) / (2 s_tr))
              + sqrt(ln(4 n^2 / delta) / (2 full_test_size))

    Nonincreasing in s_tr and in the full test size, nondecreasing in the
    number of configurations and in the train accuracy. The caller clamps
    into [0, 1].
    """
    s_tr = inp.outcome.train_sample_size
    if s_tr < 1:
        raise ValueError("train sample size must be >= 1")
    log_term = math.log(4.0 * inp.n_configs * inp.n_configs / inp.delta)
    return (
        inp.outcome.train_accuracy
        + math.sqrt(log_term / (2.0 * s_tr))
        + math.sqrt(log_term / (2.0 * inp.full_test_size))
    )


def lower_bound(inp: BoundInputs) -> float:
    """Unclamped lower confidence bound of the real test accuracy.

    acc_test - sqrt(ln(2 n^2 / delta) / (2 s_te))

    Always <= the probe's test accuracy; nondecreasing in s_te,
    nonincreasing in the number of configurations.
    """
    s_te = inp.outcome.test_sample_size
    if s_te < 1:
        raise ValueError("test sample size must be >= 1")
    log_term = math.log(2.0 * inp.n_configs * inp.n_configs / inp.delta)
    return inp.outcome.test_accuracy - math.sqrt(log_term / (2.0 * s_te))


def clamp_to_cached(
    raw: ConfidenceInterval, cached: ConfidenceInterval
) -> tuple[ConfidenceInterval, bool]:
    """Intersect a fresh interval with the cached snapshot interval.

    Returns the nested interval plus a flag that is True when the two were
    disjoint; in that anomalous case the result collapses to the cached
    endpoint nearest the fresh interval.
    """
    if raw.upper < cached.lower:
        return ConfidenceInterval(cached.lower, cached.lower), True
    if raw.lower > cached.upper:
        return ConfidenceInterval(cached.upper, cached.upper), True
    return (
        ConfidenceInterval(max(raw.lower, cached.lower), min(raw.upper, cached.upper)),
        False,
    )


def estimate_ci(config: ConfigurationState, inp: BoundInputs) -> ConfidenceInterval:
    """Post-probe interval: bound formulas, [0, 1] clamp, snapshot clamp.

    The result is always a subset of ``config.cached_ci``. Callers that need
    the disjointness anomaly flag use :func:`clamp_to_cached` directly.
    """
    raw = clamp_interval(lower_bound(inp), upper_bound(inp))
    nested, _ = clamp_to_cached(raw, config.cached_ci)
    return nested
