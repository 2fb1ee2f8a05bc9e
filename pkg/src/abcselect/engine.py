"""The selection loop: probe, bound, prune, snapshot, schedule.

Each round probes one configuration, re-estimates its confidence interval,
updates the incumbent (the configuration with the highest lower bound seen
so far), prunes every active configuration whose upper bound is within
epsilon of the incumbent lower bound, and snapshot-caches the surviving
intervals whenever pruning happened. The loop runs while more than one
configuration remains; the incumbent is returned.

Also provides the anytime best-guess output and budget-limited runs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from .ci_estimator import BoundInputs, clamp_to_cached, lower_bound, upper_bound
from .core import (
    BackendError,
    ConfidenceInterval,
    ConfigurationState,
    RunParams,
    RunTrace,
    TraceRound,
    clamp_interval,
    initial_states,
)
from .probes import ProbeBackend
from .scheduler import GradientEstimate, SchedulerKind, next_sample_size, pick_next

__all__ = [
    "EngineState",
    "FinalEvaluation",
    "anytime_best_guess",
    "build_report",
    "run_abc",
    "select_with_budget",
    "verify_selection",
]

logger = logging.getLogger(__name__)


@dataclass
class EngineState:
    """Snapshot of the loop: configurations, incumbent, active set, trace."""

    configs: list[ConfigurationState]
    params: RunParams
    incumbent_id: int
    incumbent_lower: float = 0.0
    active_set: set[int] = field(default_factory=set)
    round_index: int = 0
    trace: RunTrace = field(default_factory=RunTrace)
    budget_stopped: bool = False
    _prev_ci: dict[int, ConfidenceInterval] = field(default_factory=dict, repr=False)

    def by_id(self, config_id: int) -> ConfigurationState:
        return self.configs[config_id - 1]

    def active_configs(self) -> list[ConfigurationState]:
        return [self.by_id(i) for i in sorted(self.active_set)]


def _validate_setup(
    configs: Sequence[ConfigurationState], backend: ProbeBackend, params: RunParams
) -> None:
    if len(configs) != params.n_configs:
        raise ValueError(
            f"{len(configs)} configurations but params.n_configs = {params.n_configs}"
        )
    if len(configs) != backend.n_configs:
        raise ValueError(
            f"{len(configs)} configurations but backend has {backend.n_configs}"
        )
    if params.max_train_size != backend.max_train_size:
        raise ValueError(
            f"params.max_train_size {params.max_train_size} != backend "
            f"{backend.max_train_size}"
        )
    if params.max_test_size != backend.max_test_size:
        raise ValueError(
            f"params.max_test_size {params.max_test_size} != backend "
            f"{backend.max_test_size}"
        )
    for i, cfg in enumerate(configs):
        if cfg.id != i + 1:
            raise ValueError("configuration ids must be 1..n in input order")


def _round_guard_limit(params: RunParams) -> int:
    growth_steps = math.ceil(
        math.log(params.max_train_size / params.initial_train_size)
        / math.log(params.step_factor_c)
    ) if params.max_train_size > params.initial_train_size else 0
    return params.n_configs * (2 + growth_steps) + params.n_configs


def _next_probe_sizes(
    cfg: ConfigurationState, params: RunParams, force_full: bool
) -> tuple[int, int]:
    """Sizes for this configuration's next probe.

    Train size grows geometrically by c; test size grows by the same factor
    from its initial value, except that a probe at full training data is
    evaluated on the full test data (the accuracy is then exact).
    """
    if force_full:
        return params.max_train_size, params.max_test_size
    last = cfg.last_outcome
    if last is None:
        s_tr = cfg.current_sample_size
        s_te = params.initial_test_size
    else:
        s_tr = next_sample_size(
            cfg.current_sample_size, params.step_factor_c, params.max_train_size
        )
        s_te = next_sample_size(
            last.test_sample_size, params.step_factor_c, params.max_test_size
        )
    if s_tr >= params.max_train_size:
        s_te = params.max_test_size
    return s_tr, s_te


def _choose_next(state: EngineState, scheduler: SchedulerKind, force_full: bool) -> int:
    """Warm-up sweeps (every configuration probed at the initial size, then
    once grown) in ascending id order; afterwards the scheduler decides."""
    active = state.active_configs()
    if force_full:
        return active[0].id
    for want in (0, 1):
        for cfg in active:
            if len(cfg.history) == want:
                return cfg.id
    grads = {
        cfg.id: _gradient_estimate(state, cfg)
        for cfg in active
        if len(cfg.history) >= 2
    }
    return pick_next(scheduler, active, grads)


def _gradient_estimate(state: EngineState, cfg: ConfigurationState) -> GradientEstimate:
    last, prev = cfg.history[-1], cfg.history[-2]
    prev_ci = state._prev_ci[cfg.id]
    return GradientEstimate(
        delta_cost=max(0.0, last.cost - prev.cost),
        delta_lower=cfg.ci.lower - prev_ci.lower,
        delta_upper=cfg.ci.upper - prev_ci.upper,
    )


def _run(
    configs: Sequence[ConfigurationState],
    backend: ProbeBackend,
    params: RunParams,
    scheduler: SchedulerKind,
    budget: float | None,
) -> EngineState:
    _validate_setup(configs, backend, params)
    state = EngineState(
        configs=list(configs),
        params=params,
        incumbent_id=configs[0].id,
        active_set={c.id for c in configs if c.active},
    )
    state.trace.params = params
    guard_limit = _round_guard_limit(params)
    force_full = False

    while len(state.active_set) > 1:
        cfg = state.by_id(_choose_next(state, scheduler, force_full))
        s_tr, s_te = _next_probe_sizes(cfg, params, force_full)

        if budget is not None:
            est = backend.estimate_cost(cfg.id, s_tr, s_te)
            if est is not None and state.trace.wall_cost_total + est > budget:
                state.budget_stopped = True
                state.trace.flags.append(
                    f"budget stop before round {state.round_index + 1}: "
                    f"spent {state.trace.wall_cost_total:g} + estimated {est:g} "
                    f"> budget {budget:g}"
                )
                break

        try:
            outcome = backend.probe(cfg.id, s_tr, s_te)
        except Exception as exc:  # noqa: BLE001 - re-raised with round context
            raise BackendError(
                f"probe failed at round {state.round_index + 1} "
                f"for config {cfg.id} (s_tr={s_tr}, s_te={s_te}): {exc}"
            ) from exc
        state.round_index += 1

        saturated = (
            outcome.train_sample_size >= params.max_train_size
            and outcome.test_sample_size >= params.max_test_size
        )
        if saturated:
            # Full training and test data: the accuracy is measured exactly
            # and the interval collapses to that point.
            raw = clamp_interval(outcome.test_accuracy, outcome.test_accuracy)
        else:
            inp = BoundInputs(
                outcome=outcome,
                n_configs=params.n_configs,
                delta=params.delta,
                full_test_size=params.max_test_size,
            )
            raw = clamp_interval(lower_bound(inp), upper_bound(inp))
        ci, disjoint = clamp_to_cached(raw, cfg.cached_ci)
        if disjoint:
            msg = (
                f"round {state.round_index}: interval [{raw.lower:.6f}, "
                f"{raw.upper:.6f}] disjoint from snapshot "
                f"[{cfg.cached_ci.lower:.6f}, {cfg.cached_ci.upper:.6f}] "
                f"for config {cfg.id}"
            )
            state.trace.flags.append(msg)
            logger.warning(msg)

        state._prev_ci[cfg.id] = cfg.ci
        cfg.append_probe(outcome)
        cfg.current_sample_size = outcome.train_sample_size
        cfg.ci = ci

        if ci.lower > state.incumbent_lower:
            state.incumbent_id = cfg.id
            state.incumbent_lower = ci.lower

        pruned = tuple(
            c.id
            for c in state.active_configs()
            if c.ci.upper - state.incumbent_lower <= params.epsilon
        )
        for pid in pruned:
            state.by_id(pid).active = False
            state.active_set.discard(pid)
        if pruned:
            for c in state.active_configs():
                c.cached_ci = c.ci

        state.trace.append(
            TraceRound(
                round_index=state.round_index,
                config_id=cfg.id,
                outcome=outcome,
                ci=ci,
                incumbent_id=state.incumbent_id,
                pruned_ids=pruned,
                snapshot=bool(pruned),
            )
        )

        if budget is not None and est is None and state.trace.wall_cost_total >= budget:
            state.budget_stopped = True
            state.trace.flags.append(
                f"budget stop after round {state.round_index}: spent "
                f"{state.trace.wall_cost_total:g} >= budget {budget:g} "
                "(no cost estimate available)"
            )
            break

        if not force_full and state.round_index >= guard_limit and len(state.active_set) > 1:
            force_full = True
            msg = (
                f"round guard hit after {state.round_index} rounds with "
                f"{len(state.active_set)} survivors; forcing exact full-data "
                "evaluation of the remainder"
            )
            state.trace.flags.append(msg)
            logger.warning(msg)

    survivors = sorted(state.active_set)
    if survivors and survivors != [state.incumbent_id]:
        msg = (
            f"termination with survivors {survivors} while the incumbent is "
            f"{state.incumbent_id}; returning the incumbent"
        )
        state.trace.flags.append(msg)
        logger.warning(msg)
    state.trace.final_selection = state.incumbent_id
    truths = {
        c.id: acc
        for c in state.configs
        if (acc := backend.true_accuracy(c.id)) is not None
    }
    if len(truths) == len(state.configs):
        state.trace.true_accuracies = truths
    return state


def run_abc(
    configs: Sequence[ConfigurationState],
    backend: ProbeBackend,
    params: RunParams,
    scheduler: SchedulerKind = SchedulerKind.GRADIENT_CI,
) -> tuple[int, RunTrace]:
    """Run the full selection loop; returns (selected id, trace)."""
    state = _run(configs, backend, params, scheduler, budget=None)
    return state.incumbent_id, state.trace


def anytime_best_guess(state: EngineState) -> int:
    """Best configuration to output mid-run.

    Compares the incumbent with the active configuration of highest upper
    bound; each candidate's gap is the highest upper bound among the other
    configurations minus its own lower bound. Smaller gap wins; ties go to
    the incumbent.
    """
    if not any(c.history for c in state.configs):
        return state.incumbent_id
    incumbent = state.by_id(state.incumbent_id)
    candidates = [incumbent]
    active = state.active_configs()
    if active:
        top = min(active, key=lambda c: (-c.ci.upper, c.id))
        if top.id != incumbent.id:
            candidates.append(top)
    if len(candidates) == 1:
        return incumbent.id
    pool = {c.id for c in active} | {c.id for c in candidates}
    gaps = []
    for cand in candidates:
        others = pool - {cand.id}
        if not others:
            return cand.id
        max_upper = max(state.by_id(i).ci.upper for i in others)
        gaps.append(max_upper - cand.ci.lower)
    return candidates[0].id if gaps[0] <= gaps[1] else candidates[1].id


def select_with_budget(
    configs: Sequence[ConfigurationState],
    backend: ProbeBackend,
    params: RunParams,
    scheduler: SchedulerKind,
    cost_budget: float,
) -> tuple[int, RunTrace]:
    """Run the loop but stop before the probe that would exceed the budget.

    On a budget stop the anytime best guess is returned; if the run
    terminated naturally first, the result matches :func:`run_abc`. A budget
    below the first probe's cost yields configuration 1 with an empty trace
    and a warning flag.
    """
    if cost_budget <= 0.0:
        raise ValueError(f"cost_budget must be > 0, got {cost_budget}")
    state = _run(configs, backend, params, scheduler, budget=cost_budget)
    if not state.budget_stopped:
        return state.incumbent_id, state.trace
    if not state.trace.rounds:
        state.trace.flags.append(
            "budget below the first probe cost; returning configuration 1 unprobed"
        )
        state.trace.final_selection = state.configs[0].id
        return state.configs[0].id, state.trace
    guess = anytime_best_guess(state)
    state.trace.final_selection = guess
    return guess, state.trace


@dataclass(frozen=True)
class FinalEvaluation:
    """Outcome of fully training the selected configuration.

    When the full-data accuracy falls below the last sampled-model test
    accuracy, the sampled model is the better deliverable and the violation
    is flagged.
    """

    accuracy: float
    cost: float
    sampled_accuracy: float
    full_below_sampled: bool

    @property
    def deliverable(self) -> str:
        return "sampled_model" if self.full_below_sampled else "full_model"


def verify_selection(
    backend: ProbeBackend,
    configs: Sequence[ConfigurationState],
    selected_id: int,
) -> FinalEvaluation:
    """Train the selected configuration on full data and compare against its
    last sampled probe."""
    cfg = configs[selected_id - 1]
    last = cfg.last_outcome
    sampled_acc = last.test_accuracy if last is not None else 0.0
    outcome = backend.probe(selected_id, backend.max_train_size, backend.max_test_size)
    return FinalEvaluation(
        accuracy=outcome.test_accuracy,
        cost=outcome.cost,
        sampled_accuracy=sampled_acc,
        full_below_sampled=outcome.test_accuracy < sampled_acc,
    )


def build_report(
    selected_id: int,
    trace: RunTrace,
    backend: ProbeBackend,
    params: RunParams,
    method: str,
    final_eval: FinalEvaluation | None = None,
) -> dict:
    """Report JSON: selection, both cost scenarios, rounds, prunes, params.

    Scenario (i) is selection cost only; scenario (ii) adds one full-data
    training of the selected configuration (taken from ``final_eval`` when
    provided, otherwise from the backend's cost estimate).
    """
    full_cost: float | None
    real_accuracy: float | None
    if final_eval is not None:
        full_cost = final_eval.cost
        real_accuracy = final_eval.accuracy
    else:
        full_cost = backend.estimate_cost(
            selected_id, backend.max_train_size, backend.max_test_size
        )
        real_accuracy = backend.true_accuracy(selected_id)
    report = {
        "method": method,
        "selected": selected_id,
        "selected_label": backend.labels[selected_id - 1],
        "real_accuracy": real_accuracy,
        "total_cost_scenario_i": trace.wall_cost_total,
        "total_cost_scenario_ii": (
            trace.wall_cost_total + full_cost if full_cost is not None else None
        ),
        "rounds": trace.n_rounds,
        "prunes": sorted({p for r in trace.rounds for p in r.pruned_ids}),
        "params": params.to_dict(),
        "flags": list(trace.flags),
    }
    if trace.true_accuracies is not None:
        report["true_accuracies"] = {
            str(k): v for k, v in sorted(trace.true_accuracies.items())
        }
    if final_eval is not None:
        report["final_evaluation"] = {
            "accuracy": final_eval.accuracy,
            "cost": final_eval.cost,
            "sampled_accuracy": final_eval.sampled_accuracy,
            "full_below_sampled": final_eval.full_below_sampled,
            "deliverable": final_eval.deliverable,
        }
    return report
