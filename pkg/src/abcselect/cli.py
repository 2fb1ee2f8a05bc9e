"""Command-line front door: run a selection, run experiment suites, audit
traces, print reports.

Exit codes: 0 success, 1 invalid configuration (the message names the
offending key), 2 backend or data error, 3 audit invariant violation.
The environment variable ABC_SEED overrides the configured seed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .baselines import HalvingParams, full_run, successive_halving
from .core import BackendError, RunParams, initial_states, load_trace_rounds
from .engine import build_report, run_abc, select_with_budget, verify_selection
from .harness import (
    ExperimentSpec,
    InstanceSource,
    containment_audit,
    run_experiment,
    structural_audit,
)
from .probes import LearnerBackend, LearnerSpec, SyntheticBackend, SyntheticInstance, load_csv_dataset
from .scheduler import SchedulerKind, optimal_step_size

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_AUDIT = 3

logger = logging.getLogger(__name__)


class ConfigError(Exception):
    """Invalid configuration file; message names the offending key."""


def _check_keys(d: dict, allowed: set[str], where: str) -> None:
    for key in d:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}")


def _load_json(path: str | Path, what: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"{what} file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file {p} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{what} file {p} must hold a JSON object")
    return data


def _resolve(path_str: str, base_dir: Path) -> Path:
    path = Path(path_str)
    return path if path.is_absolute() else base_dir / path


def _build_backend(conf: dict, seed: int, base_dir: Path):
    _check_keys(
        conf,
        {"synthetic", "csv", "header", "holdout", "learners", "cost_model", "split_seed"},
        "backend",
    )
    if ("synthetic" in conf) == ("csv" in conf):
        raise ConfigError("backend needs exactly one of 'synthetic' or 'csv'")
    if "synthetic" in conf:
        path = _resolve(conf["synthetic"], base_dir)
        if not path.exists():
            raise FileNotFoundError(f"synthetic instance file not found: {path}")
        try:
            instance = SyntheticInstance.load(path)
        except ValueError as exc:
            raise ConfigError(f"invalid synthetic instance {path}: {exc}") from exc
        return SyntheticBackend(instance, seed=seed)
    csv_path = _resolve(conf["csv"], base_dir)
    if not csv_path.exists():
        raise FileNotFoundError(f"dataset file not found: {csv_path}")
    handle = load_csv_dataset(
        csv_path,
        header=bool(conf.get("header", False)),
        holdout=float(conf.get("holdout", 0.3)),
        seed=int(conf.get("split_seed", 0)),
    )
    try:
        learners = [LearnerSpec.from_dict(d) for d in conf.get("learners", [])]
    except ValueError as exc:
        raise ConfigError(f"invalid learners: {exc}") from exc
    if not learners:
        raise ConfigError("backend key 'learners' must list at least one learner")
    cost_model = conf.get("cost_model")
    if cost_model is not None:
        cost_model = [tuple(pair) for pair in cost_model]
    return LearnerBackend(handle, learners, seed=seed, cost_model=cost_model)


def _build_params(conf: dict, backend, seed: int) -> RunParams:
    _check_keys(
        conf,
        {
            "epsilon",
            "delta",
            "initial_train_size",
            "initial_test_size",
            "step_factor_c",
            "alpha_cost_exponent",
            "seed",
        },
        "params",
    )
    alpha = float(conf.get("alpha_cost_exponent", 1.0))
    if "step_factor_c" in conf:
        c = float(conf["step_factor_c"])
    else:
        c = optimal_step_size(alpha)
    try:
        return RunParams(
            epsilon=float(conf.get("epsilon", 0.01)),
            delta=float(conf.get("delta", 0.5)),
            n_configs=backend.n_configs,
            initial_train_size=min(int(conf.get("initial_train_size", 1000)), backend.max_train_size),
            initial_test_size=min(int(conf.get("initial_test_size", 2000)), backend.max_test_size),
            step_factor_c=c,
            alpha_cost_exponent=alpha,
            max_train_size=backend.max_train_size,
            max_test_size=backend.max_test_size,
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(f"invalid params: {exc}") from exc


def _resolve_seed(conf_params: dict) -> int:
    env = os.environ.get("ABC_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"ABC_SEED must be an integer, got {env!r}") from exc
    return int(conf_params.get("seed", 0))


def cmd_run(args: argparse.Namespace) -> int:
    conf = _load_json(args.config, "run config")
    _check_keys(
        conf, {"backend", "params", "scheduler", "method", "budget", "output"}, "run config"
    )
    params_conf = conf.get("params", {})
    seed = _resolve_seed(params_conf)
    base_dir = Path(args.config).resolve().parent
    backend = _build_backend(conf.get("backend", {}), seed, base_dir)
    params = _build_params(params_conf, backend, seed)

    method = args.method or conf.get("method", "abc")
    if method not in ("abc", "full_run", "successive_halving"):
        raise ConfigError(f"unknown key 'method' value {method!r} in run config")
    sched_name = args.scheduler or conf.get("scheduler", "gradient_ci")
    try:
        scheduler = SchedulerKind(sched_name)
    except ValueError as exc:
        raise ConfigError(f"unknown key 'scheduler' value {sched_name!r}") from exc
    budget = conf.get("budget")
    if args.budget is not None:
        budget = args.budget

    out_conf = conf.get("output", {})
    _check_keys(out_conf, {"trace", "report"}, "output")
    trace_path = Path(out_conf.get("trace", "out/trace.jsonl"))
    report_path = Path(out_conf.get("report", "out/report.json"))
    trace_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.parent.mkdir(parents=True, exist_ok=True)

    ids = list(range(1, backend.n_configs + 1))
    if method == "full_run":
        best, accuracies, total_cost = full_run(ids, backend)
        report = {
            "method": "full_run",
            "selected": best,
            "selected_label": backend.labels[best - 1],
            "real_accuracy": accuracies[best],
            "total_cost_scenario_i": total_cost,
            "total_cost_scenario_ii": total_cost,
            "rounds": len(ids),
            "prunes": [],
            "params": params.to_dict(),
            "flags": [],
            "accuracies": {str(i): accuracies[i] for i in ids},
        }
        report_path.write_text(json.dumps(report, indent=2) + "\n")
        print(f"full_run selected configuration {best} ({backend.labels[best - 1]})")
        print("per-configuration accuracies:")
        for i in ids:
            print(f"  {i:3d}  {backend.labels[i - 1]:<40s} {accuracies[i]:.6f}")
        print(f"total cost: {total_cost:g}")
        return EXIT_OK

    if method == "successive_halving":
        hp = HalvingParams(
            initial_train_size=params.initial_train_size,
            initial_test_size=params.initial_test_size,
            growth_factor=params.step_factor_c,
        )
        selected, trace = successive_halving(ids, backend, hp)
        trace.params = params
        trace.write_jsonl(trace_path)
        report = build_report(selected, trace, backend, params, method="successive_halving")
        report_path.write_text(json.dumps(report, indent=2) + "\n")
        print(f"successive_halving selected configuration {selected} "
              f"({backend.labels[selected - 1]}) after {trace.n_rounds} probes, "
              f"cost {trace.wall_cost_total:g}")
        return EXIT_OK

    states = initial_states(list(backend.labels), params)
    if budget is not None:
        selected, trace = select_with_budget(states, backend, params, scheduler, float(budget))
        method_name = f"abc_{scheduler.value}_budget"
    else:
        selected, trace = run_abc(states, backend, params, scheduler)
        method_name = f"abc_{scheduler.value}"
    final_eval = None
    if args.final_train and backend.true_accuracy(selected) is None:
        final_eval = verify_selection(backend, states, selected)
        if final_eval.full_below_sampled:
            trace.flags.append(
                "full-data accuracy fell below the sampled model; reporting the "
                "sampled model as the deliverable"
            )
    trace.write_jsonl(trace_path)
    report = build_report(selected, trace, backend, params, method_name, final_eval)
    report_path.write_text(json.dumps(report, indent=2) + "\n")

    cfg = states[selected - 1]
    print(f"selected configuration {selected} ({backend.labels[selected - 1]})")
    print(f"  bounds [{cfg.ci.lower:.6f}, {cfg.ci.upper:.6f}] after {trace.n_rounds} rounds")
    if report["real_accuracy"] is not None:
        print(f"  real accuracy {report['real_accuracy']:.6f}")
    print(f"  cost: selection {report['total_cost_scenario_i']:g}", end="")
    if report["total_cost_scenario_ii"] is not None:
        print(f", with final training {report['total_cost_scenario_ii']:g}")
    else:
        print()
    for flag in trace.flags:
        print(f"  note: {flag}")
    print(f"trace: {trace_path}\nreport: {report_path}")
    return EXIT_OK


def _parse_experiment(conf: dict, base_dir: Path) -> tuple[ExperimentSpec, Path]:
    _check_keys(
        conf,
        {
            "name",
            "instances",
            "methods",
            "epsilon_grid",
            "n_configs_grid",
            "repetitions",
            "base_seed",
            "budget_grid",
            "delta",
            "initial_train_size",
            "initial_test_size",
            "step_factor_c",
            "alpha_cost_exponent",
            "output_dir",
        },
        "experiment spec",
    )
    sources = []
    for i, inst in enumerate(conf.get("instances", [])):
        _check_keys(
            inst,
            {"name", "synthetic", "csv", "header", "holdout", "learners", "split_seed"},
            f"instances[{i}]",
        )
        name = inst.get("name", f"instance-{i}")
        if "synthetic" in inst:
            path = Path(inst["synthetic"])
            if not path.is_absolute():
                path = base_dir / path
            if not path.exists():
                raise FileNotFoundError(f"synthetic instance file not found: {path}")
            try:
                sources.append(
                    InstanceSource(name=name, synthetic=SyntheticInstance.load(path))
                )
            except ValueError as exc:
                raise ConfigError(f"invalid synthetic instance {path}: {exc}") from exc
        elif "csv" in inst:
            csv_path = Path(inst["csv"])
            if not csv_path.is_absolute():
                csv_path = base_dir / csv_path
            if not csv_path.exists():
                raise FileNotFoundError(f"dataset file not found: {csv_path}")
            try:
                learners = tuple(
                    LearnerSpec.from_dict(d) for d in inst.get("learners", [])
                )
            except ValueError as exc:
                raise ConfigError(f"invalid learners in instances[{i}]: {exc}") from exc
            sources.append(
                InstanceSource(
                    name=name,
                    csv_path=str(csv_path),
                    learners=learners,
                    holdout=float(inst.get("holdout", 0.3)),
                    header=bool(inst.get("header", False)),
                    split_seed=int(inst.get("split_seed", 0)),
                )
            )
        else:
            raise ConfigError(f"instances[{i}] needs 'synthetic' or 'csv'")
    try:
        spec = ExperimentSpec(
            sources=tuple(sources),
            methods=tuple(conf.get("methods", [])),
            epsilon_grid=tuple(conf.get("epsilon_grid", [])),
            n_configs_grid=tuple(conf.get("n_configs_grid", [])),
            repetitions=int(conf.get("repetitions", 100)),
            base_seed=int(conf.get("base_seed", 0)),
            budget_grid=tuple(conf.get("budget_grid", [])),
            delta=float(conf.get("delta", 0.5)),
            initial_train_size=int(conf.get("initial_train_size", 1000)),
            initial_test_size=int(conf.get("initial_test_size", 2000)),
            step_factor_c=float(conf.get("step_factor_c", 2.0)),
            alpha_cost_exponent=float(conf.get("alpha_cost_exponent", 1.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid experiment spec: {exc}") from exc
    out_dir = Path(conf.get("output_dir", "out/experiment"))
    return spec, out_dir


def cmd_experiment(args: argparse.Namespace) -> int:
    conf = _load_json(args.spec, "experiment spec")
    spec, out_dir = _parse_experiment(conf, Path(args.spec).resolve().parent)
    workers = args.workers if args.workers is not None else os.cpu_count() or 1
    rows = run_experiment(spec, out_dir=out_dir, workers=workers)
    print(f"{len(rows)} metric rows written under {out_dir}")
    return EXIT_OK


def cmd_audit(args: argparse.Namespace) -> int:
    rounds = load_trace_rounds(args.trace)
    report = _load_json(args.report, "report")
    if "params" not in report:
        raise ConfigError("report file lacks the 'params' key")
    params = RunParams.from_dict(report["params"])

    issues = structural_audit(rounds, params)
    if issues:
        print(f"structural audit FAILED with {len(issues)} issue(s):")
        for issue in issues:
            print(f"  {issue}")
        return EXIT_AUDIT
    print(f"structural audit passed over {len(rounds)} rounds "
          f"({sum(1 for r in rounds if r.snapshot)} snapshots)")

    if args.structural_only:
        return EXIT_OK
    truths = report.get("true_accuracies")
    if not truths:
        raise BackendError(
            "report lacks ground-truth accuracies; rerun with --structural-only"
        )
    from .core import RunTrace  # local alias for assembling the audited trace

    trace = RunTrace(
        rounds=list(rounds),
        params=params,
        true_accuracies={int(k): float(v) for k, v in truths.items()},
    )
    containment = containment_audit([trace])
    print(f"containment threshold delta/n^2 = {containment.threshold:g}")
    for cid in sorted(containment.probes):
        rate = containment.rates[cid]
        print(
            f"  config {cid}: {containment.violations[cid]}/{containment.probes[cid]} "
            f"violations (rate {rate:.4f})"
        )
    if containment.flagged:
        print(f"flagged configurations: {list(containment.flagged)}")
        return EXIT_AUDIT
    print("containment audit passed")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    report = _load_json(args.report, "report")
    print(f"method:     {report.get('method', '?')}")
    label = report.get("selected_label", "")
    print(f"selected:   {report.get('selected', '?')} {f'({label})' if label else ''}")
    if report.get("real_accuracy") is not None:
        print(f"accuracy:   {report['real_accuracy']:.6f}")
    print(f"cost (i):   {report.get('total_cost_scenario_i', float('nan')):g}")
    if report.get("total_cost_scenario_ii") is not None:
        print(f"cost (ii):  {report['total_cost_scenario_ii']:g}")
    print(f"rounds:     {report.get('rounds', '?')}")
    print(f"pruned:     {report.get('prunes', [])}")
    for flag in report.get("flags", []):
        print(f"note:       {flag}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abcselect",
        description="Select an approximately best ML configuration with "
        "confidence-interval based progressive sampling and pruning.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a selection described by a config file")
    p_run.add_argument("config", help="path to the run config JSON")
    p_run.add_argument("--method", choices=["abc", "full_run", "successive_halving"])
    p_run.add_argument("--scheduler", choices=[k.value for k in SchedulerKind])
    p_run.add_argument("--budget", type=float, help="cost budget for an anytime run")
    p_run.add_argument(
        "--final-train",
        action="store_true",
        help="fully train the selection afterwards (real backends)",
    )
    p_run.set_defaults(func=cmd_run)

    p_exp = sub.add_parser("experiment", help="run an experiment suite")
    p_exp.add_argument("spec", help="path to the experiment spec JSON")
    p_exp.add_argument("--workers", type=int, default=None, help="worker processes")
    p_exp.set_defaults(func=cmd_experiment)

    p_audit = sub.add_parser("audit", help="check a trace against all invariants")
    p_audit.add_argument("--trace", required=True, help="trace JSONL path")
    p_audit.add_argument("--report", required=True, help="matching report JSON path")
    p_audit.add_argument(
        "--structural-only",
        action="store_true",
        help="skip the containment audit (no ground truth needed)",
    )
    p_audit.set_defaults(func=cmd_audit)

    p_rep = sub.add_parser("report", help="print a report summary")
    p_rep.add_argument("report", help="report JSON path")
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, OSError, BackendError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
