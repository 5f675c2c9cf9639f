"""Experiment runner: sweeps policies over traces, noise models and seeds.

Configuration lives in a YAML file (nested key-value sections); command-line
flags override individual values.  Results are written as a CSV whose rows are
fully determined by the configuration, so re-running an identical config
reproduces the output byte for byte.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 when a bound
check listed in ``fatal_bounds`` fails.
"""

from __future__ import annotations

import argparse
import statistics
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import yaml

from .adversary import AdversaryConfig, certify_lower_bound, run_adversary
from .combine import run_ftl, run_mw
from .errors import ConfigError, TraceParseError
from .metrics import BoundReport, check_bounds, count_inversions_fast, ell1_loss
from .policies import POLICY_NAMES, run_policy
from .trace import NoiseSpec, Trace, WorkloadSpec, parse_trace, perturb_predictions, synthesize

CSV_HEADER = (
    "trace_id,k,noise_id,seed,policy,cost,opt,eta,inversions,eps_ratio,"
    "bounds_passed,bounds_failed"
)

# Which report entries belong on which policy's result row.  The lemma1
# record is a property of the trace itself and is attached to every row.
_ROW_BOUNDS = {
    "blind_oracle": ("thm1_prop1", "thm1_prop2"),
    "lru": ("lru_k",),
    "marker": ("marker_2hk",),
    "ftl": ("ftl_thm2", "cor1_det"),
    "mw": ("mw_thm3", "cor2_rand"),
    "belady": (),
}

_ADVERSARY_POLICIES = ("lru", "blind_oracle", "ftl")


@dataclass(frozen=True)
class ExperimentConfig:
    policies: tuple[str, ...]
    ks: tuple[int, ...]
    seeds: tuple[int, ...]
    workload: WorkloadSpec | None = None
    trace_path: str | None = None
    noises: tuple[NoiseSpec, ...] = ()
    epsilon: float = 0.1
    adversary: AdversaryConfig | None = None
    out_path: str = "results.csv"
    fatal_bounds: tuple[str, ...] = ()

    def validate(self) -> None:
        if not self.policies:
            raise ConfigError("at least one policy is required")
        for name in self.policies:
            if name not in POLICY_NAMES:
                raise ConfigError(f"unknown policy {name!r}")
        if "mw" in self.policies and not 0.0 < self.epsilon < 0.25:
            raise ConfigError("mw requires epsilon in (0, 1/4)")
        if self.workload is not None and self.trace_path is not None:
            raise ConfigError("give either a workload or a trace file, not both")
        if self.workload is None and self.trace_path is None and self.adversary is None:
            raise ConfigError("no trace source: configure a workload, trace file or adversary")
        if self.workload is not None:
            self.workload.validate()
        for noise in self.noises:
            noise.validate()
        if not self.ks and (self.workload is not None or self.trace_path is not None):
            raise ConfigError("at least one cache size k is required")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        for k in self.ks:
            if k < 1:
                raise ConfigError("cache sizes must be >= 1")
        if self.adversary is not None:
            self.adversary.validate()


@dataclass(frozen=True)
class ResultRow:
    trace_id: str
    k: int
    noise_id: str
    seed: int | None  # None marks an aggregate (mean over seeds) row
    policy: str
    cost: float
    opt: float
    eta: float
    inversions: float
    eps_ratio: float | None
    bounds_passed: tuple[str, ...]
    bounds_failed: tuple[str, ...]


def _noise_from_mapping(data: dict) -> NoiseSpec:
    allowed = {"kind", "width", "sigma", "shift", "prob", "limit"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown noise keys: {sorted(unknown)}")
    if "kind" not in data:
        raise ConfigError("noise entry needs a 'kind'")
    return NoiseSpec(**data)


def _workload_from_mapping(data: dict) -> WorkloadSpec:
    allowed = {"kind", "universe", "length", "alpha", "cycle", "phase_len"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown workload keys: {sorted(unknown)}")
    for key in ("kind", "universe", "length"):
        if key not in data:
            raise ConfigError(f"workload needs {key!r}")
    return WorkloadSpec(**data)


def _adversary_from_mapping(data: dict) -> AdversaryConfig:
    allowed = {"k", "j", "num_phases"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown adversary keys: {sorted(unknown)}")
    for key in ("k", "j"):
        if key not in data:
            raise ConfigError(f"adversary needs {key!r}")
    return AdversaryConfig(**data)


def config_from_mapping(data: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed YAML mapping."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    allowed = {
        "policies",
        "k",
        "seeds",
        "workload",
        "trace",
        "noise",
        "epsilon",
        "adversary",
        "out",
        "fatal_bounds",
    }
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    ks = data.get("k", [])
    if isinstance(ks, int):
        ks = [ks]
    seeds = data.get("seeds", [0])
    if isinstance(seeds, int):
        seeds = list(range(seeds))
    noises = data.get("noise", [])
    if isinstance(noises, dict):
        noises = [noises]
    workload = data.get("workload")
    if workload is not None and not noises:
        noises = [{"kind": "perfect"}]
    adversary = data.get("adversary")
    return ExperimentConfig(
        policies=tuple(data.get("policies", ["lru", "belady", "blind_oracle", "marker"])),
        ks=tuple(int(k) for k in ks),
        seeds=tuple(int(s) for s in seeds),
        workload=_workload_from_mapping(workload) if workload is not None else None,
        trace_path=data.get("trace"),
        noises=tuple(_noise_from_mapping(n) for n in noises),
        epsilon=float(data.get("epsilon", 0.1)),
        adversary=_adversary_from_mapping(adversary) if adversary is not None else None,
        out_path=data.get("out", "results.csv"),
        fatal_bounds=tuple(data.get("fatal_bounds", [])),
    )


def load_config(path: str) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return config_from_mapping(data or {})


def _cell_trace(
    config: ExperimentConfig,
    file_trace: Trace | None,
    noise: NoiseSpec | None,
    seed: int,
) -> Trace:
    """Realize the trace for one (noise, seed) cell.

    Workload cells draw requests and noise from child streams of the row
    seed, so the same seed yields the same requests under every noise model.
    File traces keep their requests; noise (when configured) re-derives the
    predictions from the true arrivals, otherwise the file's own predictions
    are used as-is.
    """
    if file_trace is not None:
        if noise is None:
            return file_trace
        predictions = perturb_predictions(list(file_trace.arrivals), noise, seed)
        return Trace(file_trace.requests, tuple(predictions), file_trace.arrivals)
    assert config.workload is not None and noise is not None
    return synthesize(config.workload, noise, seed)


def _policy_cost(name: str, trace: Trace, k: int, epsilon: float, seed: int):
    """Run one policy; returns (cost, extra expert costs for the bound map)."""
    if name == "ftl":
        result = run_ftl("blind_oracle", "lru", trace, k)
        return result.cost, {"blind_oracle": result.cost_a, "lru": result.cost_b}
    if name == "mw":
        result = run_mw("blind_oracle", "marker", trace, k, epsilon, seed)
        return result.cost, {"blind_oracle": result.cost_a, "marker": result.cost_b}
    return run_policy(name, trace, k, seed).cost, {}


def _verdicts(report: BoundReport, policy: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    wanted = ("lemma1",) + _ROW_BOUNDS.get(policy, ())
    passed, failed = [], []
    for bound_id in wanted:
        record = report.get(bound_id)
        if record is None:
            continue
        if record.passed:
            passed.append(f"{bound_id}(vacuous)" if record.vacuous else bound_id)
        else:
            failed.append(bound_id)
    return tuple(passed), tuple(failed)


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    """Run the configured sweep; rows come back in deterministic order."""
    config.validate()
    rows: list[ResultRow] = []

    file_trace = None
    trace_id = ""
    if config.trace_path is not None:
        file_trace = parse_trace(Path(config.trace_path).read_text(encoding="utf-8"))
        trace_id = Path(config.trace_path).stem
    elif config.workload is not None:
        trace_id = config.workload.label

    noises: tuple[NoiseSpec | None, ...] = config.noises or ()
    if file_trace is not None and not noises:
        noises = (None,)

    if file_trace is not None or config.workload is not None:
        for k in config.ks:
            for noise in noises:
                noise_id = noise.label if noise is not None else "file"
                per_seed: dict[str, list[dict]] = {p: [] for p in config.policies}
                for seed in config.seeds:
                    trace = _cell_trace(config, file_trace, noise, seed)
                    opt = run_policy("belady", trace, k).cost
                    eta = ell1_loss(trace.arrivals, trace.predictions)
                    inversions = count_inversions_fast(trace.arrivals, trace.predictions)
                    costs: dict[str, float] = {}
                    for name in config.policies:
                        cost, extra = _policy_cost(name, trace, k, config.epsilon, seed)
                        costs.setdefault(name, cost)
                        for expert, expert_cost in extra.items():
                            costs.setdefault(expert, expert_cost)
                    report = check_bounds(
                        costs,
                        opt,
                        eta,
                        inversions,
                        k,
                        epsilon=config.epsilon if "mw" in costs else None,
                    )
                    eps_ratio = eta / opt if opt > 0 else None
                    for name in config.policies:
                        passed, failed = _verdicts(report, name)
                        rows.append(
                            ResultRow(
                                trace_id, k, noise_id, seed, name,
                                costs[name], opt, eta, inversions, eps_ratio,
                                passed, failed,
                            )
                        )
                        per_seed[name].append(
                            {"cost": costs[name], "opt": opt, "eta": eta,
                                 "inversions": inversions, "all": dict(costs)}
                        )
                rows.extend(
                    _aggregate_rows(config, trace_id, k, noise_id, per_seed)
                )

    if config.adversary is not None:
        rows.extend(_adversary_rows(config))

    rows.sort(key=_row_key)
    return rows


def _aggregate_rows(config, trace_id, k, noise_id, per_seed) -> list[ResultRow]:
    """Mean-over-seeds rows for the randomized policies (seed column 'agg')."""
    out = []
    for name in config.policies:
        if name not in ("marker", "mw") or len(config.seeds) < 2:
            continue
        cells = per_seed[name]
        means = {key: statistics.fmean(c[key] for c in cells)
                 for key in ("cost", "opt", "eta", "inversions")}
        costs = {name: means["cost"]}
        for expert in ("blind_oracle", "lru", "marker"):
            if all(expert in c["all"] for c in cells):
                costs.setdefault(expert, statistics.fmean(c["all"][expert] for c in cells))
        report = check_bounds(
            costs, means["opt"], means["eta"], means["inversions"], k,
            epsilon=config.epsilon if name == "mw" else None,
        )
        passed, failed = _verdicts(report, name)
        out.append(
            ResultRow(
                trace_id, k, noise_id, None, name,
                means["cost"], means["opt"], means["eta"], means["inversions"],
                means["eta"] / means["opt"] if means["opt"] > 0 else None, passed, failed,
            )
        )
    return out


def _adversary_rows(config: ExperimentConfig) -> list[ResultRow]:
    adv = config.adversary
    rows = []
    for name in config.policies:
        if name not in _ADVERSARY_POLICIES:
            continue
        result = run_adversary(name, adv)
        record = certify_lower_bound(result)
        inversions = count_inversions_fast(result.trace.arrivals, result.trace.predictions)
        eps_ratio = result.eta / result.opt_cost if result.opt_cost > 0 else None
        rows.append(
            ResultRow(
                adv.label, adv.k, "adaptive", 0, name,
                result.alg_cost, result.opt_cost, result.eta, inversions, eps_ratio,
                ("lower_bound_thm4",) if record.passed else (),
                () if record.passed else ("lower_bound_thm4",),
            )
        )
    return rows


def _row_key(row: ResultRow):
    return (
        row.trace_id,
        row.k,
        row.noise_id,
        (1, 0) if row.seed is None else (0, row.seed),
        row.policy,
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value) if not value.is_integer() else str(int(value))
    return str(value)


def render_csv(rows: list[ResultRow]) -> str:
    lines = [CSV_HEADER]
    for row in sorted(rows, key=_row_key):
        lines.append(
            ",".join(
                (
                    row.trace_id,
                    str(row.k),
                    row.noise_id,
                    "agg" if row.seed is None else str(row.seed),
                    row.policy,
                    _fmt(row.cost),
                    _fmt(row.opt),
                    _fmt(row.eta),
                    _fmt(row.inversions),
                    _fmt(row.eps_ratio),
                    ";".join(row.bounds_passed),
                    ";".join(row.bounds_failed),
                )
            )
        )
    return "\n".join(lines) + "\n"


def emit_csv(rows: list[ResultRow], path: str) -> None:
    Path(path).write_text(render_csv(rows), encoding="utf-8")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="predcache",
        description="Run caching-with-predictions experiments and write a results CSV.",
    )
    parser.add_argument("--config", help="YAML experiment config")
    parser.add_argument("--trace", help="trace CSV file (overrides the config's source)")
    parser.add_argument("--out", help="output CSV path")
    parser.add_argument("--seed", type=int, help="single seed (overrides the config's seeds)")
    parser.add_argument("--k", type=int, help="single cache size (overrides the config's list)")
    parser.add_argument(
        "--policy",
        action="append",
        help="policy to run; repeatable (overrides the config's list)",
    )
    parser.add_argument("--epsilon", type=float, help="epsilon for the mw combiner")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else config_from_mapping({})
        if args.trace is not None:
            config = replace(config, trace_path=args.trace, workload=None)
        if args.out is not None:
            config = replace(config, out_path=args.out)
        if args.seed is not None:
            config = replace(config, seeds=(args.seed,))
        if args.k is not None:
            config = replace(config, ks=(args.k,))
        if args.policy:
            config = replace(config, policies=tuple(args.policy))
        if args.epsilon is not None:
            config = replace(config, epsilon=args.epsilon)
        if not config.ks:
            config = replace(config, ks=(8,))
        rows = run_experiment(config)
    except (ConfigError, TraceParseError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2

    try:
        emit_csv(rows, config.out_path)
    except OSError as exc:
        print(f"I/O error writing {config.out_path}: {exc}", file=sys.stderr)
        return 2

    failed = sorted({b for row in rows for b in row.bounds_failed})
    print(f"wrote {len(rows)} rows to {config.out_path}")
    if failed:
        print(f"failed bounds: {', '.join(failed)}")
    fatal = sorted(set(failed) & set(config.fatal_bounds))
    if fatal:
        print(f"fatal bound failures: {', '.join(fatal)}", file=sys.stderr)
        return 3
    return 0
