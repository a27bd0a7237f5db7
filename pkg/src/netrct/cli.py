"""Command-line front end: scenario configs, execution, CSV/JSON emission.

A scenario is a single JSON file (see `CONFIG_KEYS` below and the README
for the schema); every value can be overridden by a flag. Commands:

    generate    write a graph edge list and its degree histogram
    simulate    time series (and optional final state) per production model
    experiment  one treated run: effect-report JSON plus group time series
    sweep       size sweep or p sweep, one CSV row per grid point
    run         dispatch on the config's own "command" entry

Exit codes: 0 success (divergence is a valid, reported finding),
2 invalid configuration, 1 I/O or internal failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from .dynamics import (
    DEFAULT_BURN_IN,
    DEFAULT_WINDOW,
    DynamicsParams,
    Regularization,
    analytic_c_base,
    simulate,
)
from .errors import NetrctError, ParameterError, StabilityError
from .experiments import (
    Assignment,
    ExperimentConfig,
    assign,
    run_experiment,
    run_p_sweep,
    run_size_sweep,
)
from .graph import (
    WattsStrogatzParams,
    degree_histogram,
    generate_watts_strogatz,
    partition_by_treatment,
    write_edge_list,
)
from .rng import derive_key

COMMANDS = ("generate", "simulate", "experiment", "sweep")

CONFIG_KEYS = {
    "command", "name", "seed", "graph", "dynamics", "assignment", "models",
    "burn_in", "window", "baseline_model", "sweep", "dump_final_state",
    "out_dir", "threads", "p_values", "allow_divergent",
}
GRAPH_KEYS = {"n", "k", "p", "seed"}
DYNAMICS_KEYS = {"lambda_int", "nu_damp", "delta_lambda", "model", "steps",
                 "seed", "boost", "regularization"}
REGULARIZATION_KEYS = {"mode", "nu_max", "c_max"}
ASSIGNMENT_KEYS = {"strategy", "size", "fraction", "seed"}
SWEEP_KEYS = {"kind", "ks", "fractions", "ps", "replications"}


class ConfigError(ParameterError):
    pass


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(
            f"unknown key {unknown[0]!r} in {where} "
            f"(allowed: {', '.join(sorted(allowed))})"
        )


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} must contain a JSON object")
    _check_keys(cfg, CONFIG_KEYS, "config")
    for key, allowed in (("graph", GRAPH_KEYS), ("dynamics", DYNAMICS_KEYS),
                         ("assignment", ASSIGNMENT_KEYS), ("sweep", SWEEP_KEYS)):
        if key in cfg:
            if not isinstance(cfg[key], dict):
                raise ConfigError(f"config section {key!r} must be an object")
            _check_keys(cfg[key], allowed, f"config section {key!r}")
    reg = cfg.get("dynamics", {}).get("regularization")
    if reg is not None:
        if not isinstance(reg, dict):
            raise ConfigError("dynamics.regularization must be an object")
        _check_keys(reg, REGULARIZATION_KEYS, "dynamics.regularization")
    return cfg


def apply_overrides(cfg: dict, args: argparse.Namespace) -> dict:
    """Fold command-line flags over the JSON config (flags win)."""
    cfg = json.loads(json.dumps(cfg))  # deep copy
    graph = cfg.setdefault("graph", {})
    dyn = cfg.setdefault("dynamics", {})
    for flag, section, key in (
        ("n", graph, "n"), ("k", graph, "k"), ("p", graph, "p"),
        ("steps", dyn, "steps"), ("model", dyn, "model"),
        ("nu_damp", dyn, "nu_damp"), ("lambda_int", dyn, "lambda_int"),
        ("delta_lambda", dyn, "delta_lambda"), ("boost", dyn, "boost"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            section[key] = value
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if getattr(args, "model", None) is not None:
        cfg["models"] = [args.model]
    if getattr(args, "regularization", None) is not None:
        dyn.setdefault("regularization", {})["mode"] = args.regularization
    for cap in ("nu_max", "c_max"):
        value = getattr(args, cap, None)
        if value is not None:
            dyn.setdefault("regularization", {})[cap] = value
    if getattr(args, "frac", None) is not None:
        cfg.setdefault("assignment", {})["fraction"] = args.frac
        cfg["assignment"].pop("size", None)
    if getattr(args, "assignment", None) is not None:
        cfg.setdefault("assignment", {})["strategy"] = args.assignment
    if getattr(args, "out_dir", None) is not None:
        cfg["out_dir"] = args.out_dir
    if getattr(args, "threads", None) is not None:
        cfg["threads"] = args.threads
    return cfg


def _require(cfg: dict, key: str) -> dict:
    if key not in cfg:
        raise ConfigError(f"config is missing the {key!r} section")
    return cfg[key]


def build_graph_params(cfg: dict, p: float | None = None) -> WattsStrogatzParams:
    section = _require(cfg, "graph")
    for key in ("n", "k"):
        if key not in section:
            raise ConfigError(f"graph section is missing {key!r}")
    master = int(cfg.get("seed", 0))
    try:
        return WattsStrogatzParams(
            n=int(section["n"]),
            k=int(section["k"]),
            p=float(section["p"] if p is None else p),
            seed=int(section.get("seed", derive_key(master, 1))),
        )
    except KeyError as exc:
        raise ConfigError(f"graph section is missing {exc.args[0]!r}") from exc


def build_dynamics(cfg: dict) -> DynamicsParams:
    section = cfg.get("dynamics", {})
    master = int(cfg.get("seed", 0))
    reg_section = section.get("regularization", {})
    regularization = Regularization(
        mode=reg_section.get("mode", "none"),
        nu_max=(float(reg_section["nu_max"]) if "nu_max" in reg_section else None),
        c_max=(float(reg_section["c_max"]) if "c_max" in reg_section else None),
    )
    return DynamicsParams(
        lambda_int=float(section.get("lambda_int", 1.0)),
        nu_damp=float(section.get("nu_damp", 0.01)),
        delta_lambda=float(section.get("delta_lambda", 0.0)),
        model=section.get("model", "constant"),
        regularization=regularization,
        steps=int(section.get("steps", 50)),
        seed=int(section.get("seed", derive_key(master, 2))),
        boost=section.get("boost", "intrinsic"),
    )


def build_assignment(cfg: dict, n: int) -> Assignment:
    section = _require(cfg, "assignment")
    if "strategy" not in section:
        raise ConfigError("assignment section is missing 'strategy'")
    if "size" in section and "fraction" in section:
        raise ConfigError("assignment takes either 'size' or 'fraction', not both")
    if "size" in section:
        size = int(section["size"])
    elif "fraction" in section:
        frac = float(section["fraction"])
        if not 0.0 < frac <= 1.0:
            raise ConfigError(f"assignment fraction must be in (0, 1], got {frac}")
        size = min(n, max(1, round(frac * n)))
    else:
        raise ConfigError("assignment section needs 'size' or 'fraction'")
    master = int(cfg.get("seed", 0))
    return Assignment(
        strategy=section["strategy"],
        size=size,
        seed=int(section.get("seed", derive_key(master, 3))),
    )


def _out_dir(cfg: dict, command: str) -> Path:
    out = Path(cfg.get("out_dir", os.path.join("out", cfg.get("name", command))))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _threads(cfg: dict) -> int:
    if "threads" in cfg:
        return max(1, int(cfg["threads"]))
    env = os.environ.get("NETRCT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _write(path: Path, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _degrees_csv(g) -> str:
    hist = degree_histogram(g)
    lines = ["degree,count"]
    lines.extend(f"{d},{c}" for d, c in sorted(hist.counts.items()))
    return "\n".join(lines) + "\n"


def cmd_generate(cfg: dict) -> int:
    out = _out_dir(cfg, "generate")
    p_values = cfg.get("p_values")
    graph_section = _require(cfg, "graph")
    if p_values is not None and not p_values:
        raise ConfigError("p_values must be a nonempty list")
    if p_values is None and "p" not in graph_section:
        raise ConfigError("generate needs graph.p or a p_values list")
    ps = [float(x) for x in p_values] if p_values else [float(graph_section["p"])]
    multi = len(ps) > 1
    for p in ps:
        params = build_graph_params(cfg, p=p)
        g = generate_watts_strogatz(params)
        suffix = f"_p{p:g}" if multi else ""
        edge_path = out / f"graph{suffix}.edgelist"
        write_edge_list(g, edge_path)
        _write(out / f"degrees{suffix}.csv", _degrees_csv(g))
        if "assignment" in cfg:
            assignment = build_assignment(cfg, params.n)
            treatment = assign(g, assignment)
            _write(out / f"treatment{suffix}.txt",
                   "\n".join(str(i) for i in treatment.tolist()) + "\n")
        hist = degree_histogram(g)
        print(f"graph n={params.n} k={params.k} p={params.p:g} "
              f"edges={g.edge_count} degree_min={hist.min_degree()} "
              f"degree_mean={hist.mean():g} degree_max={hist.max_degree()} "
              f"-> {edge_path}")
    return 0


def cmd_simulate(cfg: dict) -> int:
    out = _out_dir(cfg, "simulate")
    params = build_graph_params(cfg)
    dyn = build_dynamics(cfg)
    models = cfg.get("models", [dyn.model])
    if not models:
        raise ConfigError("models must be a nonempty list")
    window = int(cfg.get("window", DEFAULT_WINDOW))
    g = generate_watts_strogatz(params)

    treatment = None
    tracked = None
    if "assignment" in cfg:
        treatment = assign(g, build_assignment(cfg, params.n))
        tracked = partition_by_treatment(g, treatment)

    dump = bool(cfg.get("dump_final_state", False))
    runs = ["model,status,diverged_at,steps_recorded,window_mean_all,analytic_c_base"]
    try:
        reference = analytic_c_base(dyn.lambda_int, params.k, dyn.nu_damp)
    except StabilityError:
        reference = math.nan
    for model in models:
        run_params = replace(dyn, model=model)
        ts = simulate(g, run_params, treatment=treatment, tracked=tracked,
                      record_final_state=dump)
        ts.write_csv(out / f"timeseries_{model}.csv")
        if dump and ts.final_values is not None:
            deg = g.degrees
            lines = ["node,degree,content"]
            lines.extend(f"{i},{deg[i]},{_fmt(v)}"
                         for i, v in enumerate(ts.final_values.tolist()))
            _write(out / f"final_state_{model}.csv", "\n".join(lines) + "\n")
        status = "divergent" if ts.diverged else "ok"
        recorded = ts.steps.size - 1
        wmean = (ts.window_mean("mean_all", window)
                 if not ts.diverged and recorded >= window else math.nan)
        runs.append(f"{model},{status},"
                    f"{ts.diverged_at if ts.diverged_at is not None else ''},"
                    f"{recorded},{_fmt(wmean)},{_fmt(reference)}")
        print(f"model={model} status={status} steps={recorded} "
              f"window_mean_all={_fmt(wmean)}")
    _write(out / "runs.csv", "\n".join(runs) + "\n")
    return 0


def build_experiment_config(cfg: dict) -> ExperimentConfig:
    return ExperimentConfig(
        graph=build_graph_params(cfg),
        dynamics=build_dynamics(cfg),
        assignment=build_assignment(cfg, int(_require(cfg, "graph")["n"])),
        burn_in=int(cfg.get("burn_in", DEFAULT_BURN_IN)),
        window=int(cfg.get("window", DEFAULT_WINDOW)),
        baseline_model=cfg.get("baseline_model", "constant"),
        allow_divergent=bool(cfg.get("allow_divergent", False)),
    )


def cmd_experiment(cfg: dict) -> int:
    out = _out_dir(cfg, "experiment")
    config = build_experiment_config(cfg)
    report, base_ts, treated_ts = run_experiment(config, return_series=True)
    _write(out / "report.json", json.dumps(report.to_dict(), indent=2) + "\n")
    treated_ts.write_csv(out / "timeseries.csv")
    base_ts.write_csv(out / "baseline_timeseries.csv")
    if report.status == "ok":
        print(f"experiment status=ok c_base_prime={_fmt(report.c_base_prime)} "
              f"e_spillover={_fmt(report.e_spillover)} "
              f"e_treatment={_fmt(report.e_treatment)} "
              f"e_dampening={_fmt(report.e_dampening)} "
              f"e_intrinsic={_fmt(report.e_intrinsic)}")
    else:
        print(f"experiment status={report.status} diverged_at={report.diverged_at}")
    return 0


def cmd_sweep(cfg: dict) -> int:
    out = _out_dir(cfg, "sweep")
    sweep = _require(cfg, "sweep")
    kind = sweep.get("kind")
    if kind not in ("size", "p"):
        raise ConfigError(f"sweep kind must be 'size' or 'p', got {kind!r}")
    replications = int(sweep.get("replications", 5))
    threads = _threads(cfg)
    graph_section = _require(cfg, "graph")
    dyn = build_dynamics(cfg)

    if kind == "size":
        ks = [int(k) for k in sweep.get("ks", [])]
        fractions = [float(f) for f in sweep.get("fractions", [])]
        if not ks or not fractions:
            raise ConfigError("size sweeps need nonempty 'ks' and 'fractions'")
        for key in ("n", "p"):
            if key not in graph_section:
                raise ConfigError(f"size sweeps need graph.{key}")
        master = int(cfg.get("seed", 0))
        base = ExperimentConfig(
            # k of the base config is a placeholder; the sweep axis replaces it
            graph=WattsStrogatzParams(
                n=int(graph_section["n"]), k=ks[0], p=float(graph_section["p"]),
                seed=int(graph_section.get("seed", derive_key(master, 1)))),
            dynamics=dyn,
            assignment=Assignment("random", 1, seed=0),
            burn_in=int(cfg.get("burn_in", DEFAULT_BURN_IN)),
            window=int(cfg.get("window", DEFAULT_WINDOW)),
            baseline_model=cfg.get("baseline_model", "constant"),
            allow_divergent=bool(cfg.get("allow_divergent", False)),
        )
        result = run_size_sweep(base, fractions, ks, replications, threads=threads)
    else:
        ps = [float(p) for p in sweep.get("ps", [])]
        if not ps:
            raise ConfigError("p sweeps need a nonempty 'ps' list")
        master = int(cfg.get("seed", 0))
        result = run_p_sweep(
            n=int(graph_section["n"]), k=int(graph_section["k"]), ps=ps,
            replications=replications, dynamics=dyn,
            graph_seed=int(graph_section.get("seed", derive_key(master, 1))),
            burn_in=int(cfg.get("burn_in", DEFAULT_BURN_IN)),
            window=int(cfg.get("window", DEFAULT_WINDOW)),
            threads=threads,
        )
    result.write_csv(out / "sweep.csv")
    flagged = sum(1 for pt in result.points if pt.status != "ok")
    print(f"sweep kind={kind} points={len(result.points)} "
          f"replications={replications} flagged={flagged} -> {out / 'sweep.csv'}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netrct",
        description="Monte Carlo experiments of content production on small-world graphs",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS + ("run",):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", help="scenario JSON file")
        cmd.add_argument("--n", type=int)
        cmd.add_argument("--k", type=int)
        cmd.add_argument("--p", type=float)
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--steps", type=int)
        cmd.add_argument("--model", choices=("constant", "uniform", "poisson"))
        cmd.add_argument("--nu-damp", dest="nu_damp", type=float)
        cmd.add_argument("--lambda-int", dest="lambda_int", type=float)
        cmd.add_argument("--delta-lambda", dest="delta_lambda", type=float)
        cmd.add_argument("--frac", type=float)
        cmd.add_argument("--assignment", choices=("random", "clustered"))
        cmd.add_argument("--regularization", choices=("none", "hard_cap", "sigmoid"))
        cmd.add_argument("--nu-max", dest="nu_max", type=float)
        cmd.add_argument("--c-max", dest="c_max", type=float)
        cmd.add_argument("--boost", choices=("intrinsic", "total"))
        cmd.add_argument("--out-dir", dest="out_dir")
        cmd.add_argument("--threads", type=int)
    return parser


_DISPATCH = {
    "generate": cmd_generate,
    "simulate": cmd_simulate,
    "experiment": cmd_experiment,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = apply_overrides(load_config(args.config), args)
        command = args.subcommand
        if command == "run":
            command = cfg.get("command")
            if command not in _DISPATCH:
                raise ConfigError(
                    f"'run' needs a config with a valid 'command' entry, got {command!r}"
                )
        elif "command" in cfg and cfg["command"] != command:
            raise ConfigError(
                f"config declares command {cfg['command']!r} but "
                f"{command!r} was invoked"
            )
        return _DISPATCH[command](cfg)
    except NetrctError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
