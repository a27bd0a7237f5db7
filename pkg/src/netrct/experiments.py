"""Treatment assignment, effect metrics and parameter sweeps.

An experiment runs two simulations on the same graph: a bare baseline
(no treatment) whose windowed all-node mean is the reference level
c_base_prime, and a treated run whose windowed group means produce the
effect metrics:

    e_spillover  = c_control / c_base_prime - 1
    e_treatment  = c_treatment / c_control - 1
    e_dampening  = e_treatment / delta_lambda
    e_intrinsic  = c_treatment / c_base_prime - 1
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import (
    DEFAULT_BURN_IN,
    DEFAULT_WINDOW,
    DynamicsParams,
    TimeSeries,
    analytic_c_base,
    baseline_params,
    simulate,
    stability_margin,
)
from .errors import DivergenceError, ParameterError
from .graph import (
    Graph,
    GroupPartition,
    WattsStrogatzParams,
    generate_watts_strogatz,
    mean_degree_of,
    partition_by_treatment,
    within_group_edge_fraction,
)
from .rng import DOMAIN_ASSIGNMENT, DOMAIN_SWEEP, CounterStream, derive_key

ASSIGNMENT_STRATEGIES = ("random", "clustered")

#: columns of the sweep CSV that carry per-point values (means, then stddevs)
SIZE_SWEEP_METRICS = (
    "c_base_prime", "c_treatment", "c_control", "c_neighbours", "c_rest",
    "e_spillover", "e_treatment", "e_dampening", "e_intrinsic",
)
P_SWEEP_METRICS = ("c_base_prime", "e_degree_distribution")


@dataclass(frozen=True)
class Assignment:
    """How the treatment group is chosen."""

    strategy: str
    size: int
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in ASSIGNMENT_STRATEGIES:
            raise ParameterError(
                f"assignment strategy must be one of {ASSIGNMENT_STRATEGIES}, "
                f"got {self.strategy!r}"
            )
        if not isinstance(self.size, int) or self.size < 1:
            raise ParameterError(f"treatment size must be a positive integer, got {self.size!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """A complete experiment: graph, dynamics, assignment and window."""

    graph: WattsStrogatzParams
    dynamics: DynamicsParams
    assignment: Assignment
    burn_in: int = DEFAULT_BURN_IN
    window: int = DEFAULT_WINDOW
    baseline_model: str = "constant"
    allow_divergent: bool = False

    def __post_init__(self):
        if self.assignment.size > self.graph.n:
            raise ParameterError(
                f"treatment size {self.assignment.size} exceeds n={self.graph.n}"
            )
        if self.burn_in < 1 or self.window < 1:
            raise ParameterError("burn_in and window must be positive")
        if self.burn_in + self.window > self.dynamics.steps:
            raise ParameterError(
                f"burn_in + window = {self.burn_in + self.window} exceeds "
                f"steps = {self.dynamics.steps}"
            )
        margin = stability_margin(
            self.graph.k, self.dynamics.nu_damp,
            self.dynamics.delta_lambda, self.dynamics.boost,
        )
        if margin <= 0 and not self.allow_divergent:
            raise ParameterError(
                f"unstable parameters (stability margin {margin:g}); "
                f"set allow_divergent to run a divergence study"
            )


@dataclass
class EffectReport:
    """Everything measured in one experiment."""

    n: int
    k: int
    p: float
    graph_seed: int
    model: str
    boost: str
    delta_lambda: float
    n_treatment: int
    n_neighbours: int
    n_rest: int
    n_control: int
    frac: float
    mean_degree_treatment: float
    mean_degree_neighbours: float
    mean_degree_rest: float
    mean_degree_control: float
    within_treatment_edge_fraction: float
    c_base_prime: float
    c_all: float
    c_treatment: float
    c_control: float
    c_neighbours: float
    c_rest: float
    e_degree_distribution: float
    e_spillover: float
    e_treatment: float
    e_dampening: float
    e_intrinsic: float
    status: str = "ok"
    diverged_at: int | None = None

    METRIC_FIELDS = (
        "c_base_prime", "c_treatment", "c_control", "c_neighbours", "c_rest",
        "e_spillover", "e_treatment", "e_dampening", "e_intrinsic",
    )

    def to_dict(self) -> dict:
        """JSON-ready dict; non-finite floats become None."""
        out = {}
        for name in self.__dataclass_fields__:
            if name == "METRIC_FIELDS":
                continue
            value = getattr(self, name)
            if isinstance(value, float) and not math.isfinite(value):
                value = None
            out[name] = value
        return out


def assign_random(g: Graph, size: int, seed: int) -> np.ndarray:
    """Uniform treatment subset of `size` nodes, deterministic in seed."""
    if not 1 <= size <= g.n:
        raise ParameterError(f"treatment size must be in [1, {g.n}], got {size}")
    keys = CounterStream(derive_key(seed, DOMAIN_ASSIGNMENT)).u64_array(g.n)
    chosen = np.argsort(keys, kind="stable")[:size]
    return np.sort(chosen).astype(np.int64)


def assign_clustered(g: Graph, size: int) -> np.ndarray:
    """Contiguous block of pre-rewiring ring positions: nodes 0..size-1."""
    if not 1 <= size <= g.n:
        raise ParameterError(f"treatment size must be in [1, {g.n}], got {size}")
    return np.arange(size, dtype=np.int64)


def assign(g: Graph, assignment: Assignment) -> np.ndarray:
    if assignment.strategy == "random":
        return assign_random(g, assignment.size, assignment.seed)
    return assign_clustered(g, assignment.size)


def run_baseline(g: Graph, params: DynamicsParams,
                 burn_in: int = DEFAULT_BURN_IN,
                 window: int = DEFAULT_WINDOW) -> float:
    """Windowed all-node mean of a bare run (c_base_prime).

    `params` must carry delta_lambda=0; use the constant model (the
    default of `baseline_params`) unless the baseline itself is under
    study, so the reference level carries no sampling noise.
    """
    if params.delta_lambda != 0.0:
        raise ParameterError("baseline runs require delta_lambda = 0")
    if burn_in + window > params.steps:
        raise ParameterError("burn_in + window exceeds the step count")
    ts = simulate(g, params)
    if ts.diverged:
        raise DivergenceError(ts.diverged_at or params.steps, "baseline run diverged")
    return ts.window_mean("mean_all", window)


def degree_distribution_effect(g: Graph, params: DynamicsParams,
                               burn_in: int = DEFAULT_BURN_IN,
                               window: int = DEFAULT_WINDOW) -> float:
    """Relative excess of the simulated bare mean over the k-regular formula.

    Zero on the p=0 ring lattice; positive once rewiring spreads the
    degree distribution.
    """
    measured = run_baseline(g, params, burn_in, window)
    reference = analytic_c_base(params.lambda_int, g.mean_degree(), params.nu_damp)
    return measured / reference - 1.0


def content_by_degree(g: Graph, values: np.ndarray) -> dict[int, float]:
    """Mean content per degree value over populated degrees."""
    if values.shape != (g.n,):
        raise ParameterError("values length does not match the graph")
    deg = g.degrees
    sums = np.bincount(deg, weights=values)
    counts = np.bincount(deg)
    populated = np.flatnonzero(counts)
    return {int(d): float(sums[d] / counts[d]) for d in populated}


def _windowed_group_means(ts: TimeSeries, window: int) -> dict[str, float]:
    return {
        col: ts.window_mean(col, window)
        for col in ("mean_all", "mean_treatment", "mean_neighbours",
                    "mean_rest", "mean_control")
    }


def run_experiment_on(g: Graph, dynamics: DynamicsParams, treatment: np.ndarray,
                      burn_in: int = DEFAULT_BURN_IN, window: int = DEFAULT_WINDOW,
                      baseline_model: str = "constant",
                      ) -> tuple[EffectReport, TimeSeries, TimeSeries]:
    """Run baseline + treated simulation on an existing graph.

    Returns (report, baseline_series, treated_series). Divergence in
    either run is flagged in the report status, not raised.
    """
    parts = partition_by_treatment(g, treatment)
    base = simulate(g, baseline_params(dynamics, baseline_model), tracked=parts)
    treated = simulate(g, dynamics, treatment=treatment, tracked=parts)

    k_exact = g.mean_degree()
    report = EffectReport(
        n=g.n,
        k=g.params.k if g.params else int(round(k_exact)),
        p=g.params.p if g.params else math.nan,
        graph_seed=g.params.seed if g.params else 0,
        model=dynamics.model,
        boost=dynamics.boost,
        delta_lambda=dynamics.delta_lambda,
        n_treatment=parts.n_treatment,
        n_neighbours=parts.n_neighbours,
        n_rest=parts.n_rest,
        n_control=parts.n_control,
        frac=parts.n_treatment / g.n,
        mean_degree_treatment=mean_degree_of(g, parts.treatment),
        mean_degree_neighbours=(mean_degree_of(g, parts.neighbours)
                                if parts.n_neighbours else math.nan),
        mean_degree_rest=(mean_degree_of(g, parts.rest)
                          if parts.n_rest else math.nan),
        mean_degree_control=(mean_degree_of(g, parts.control)
                             if parts.n_control else math.nan),
        within_treatment_edge_fraction=within_group_edge_fraction(g, parts.treatment),
        c_base_prime=math.nan, c_all=math.nan, c_treatment=math.nan,
        c_control=math.nan, c_neighbours=math.nan, c_rest=math.nan,
        e_degree_distribution=math.nan, e_spillover=math.nan,
        e_treatment=math.nan, e_dampening=math.nan, e_intrinsic=math.nan,
    )

    if base.diverged or treated.diverged:
        report.status = "divergent"
        report.diverged_at = base.diverged_at if base.diverged else treated.diverged_at
        return report, base, treated

    c_base_prime = base.window_mean("mean_all", window)
    means = _windowed_group_means(treated, window)
    report.c_base_prime = c_base_prime
    report.c_all = means["mean_all"]
    report.c_treatment = means["mean_treatment"]
    report.c_control = means["mean_control"]
    report.c_neighbours = means["mean_neighbours"]
    report.c_rest = means["mean_rest"]
    report.e_degree_distribution = c_base_prime / analytic_c_base(
        dynamics.lambda_int, k_exact, dynamics.nu_damp) - 1.0
    report.e_spillover = means["mean_control"] / c_base_prime - 1.0
    report.e_treatment = means["mean_treatment"] / means["mean_control"] - 1.0
    report.e_dampening = (report.e_treatment / dynamics.delta_lambda
                          if dynamics.delta_lambda > 0 else math.nan)
    report.e_intrinsic = means["mean_treatment"] / c_base_prime - 1.0
    return report, base, treated


def run_experiment(config: ExperimentConfig, *, return_series: bool = False):
    """Build the graph, assign treatment and measure all effect metrics."""
    g = generate_watts_strogatz(config.graph)
    treatment = assign(g, config.assignment)
    report, base, treated = run_experiment_on(
        g, config.dynamics, treatment,
        burn_in=config.burn_in, window=config.window,
        baseline_model=config.baseline_model,
    )
    if return_series:
        return report, base, treated
    return report


@dataclass
class SweepPoint:
    """Aggregated metrics of one grid point of a sweep."""

    axes: dict[str, float]
    means: dict[str, float]
    stddevs: dict[str, float] | None
    replications: int
    status: str = "ok"


@dataclass
class SweepResult:
    kind: str
    points: list[SweepPoint] = field(default_factory=list)

    def to_csv(self) -> str:
        metrics = SIZE_SWEEP_METRICS if self.kind == "size" else P_SWEEP_METRICS
        axis_names = list(self.points[0].axes) if self.points else (
            ["k", "p", "n", "N", "frac", "delta_lambda"] if self.kind == "size"
            else ["k", "p", "n"])
        header = (axis_names + list(metrics)
                  + [f"stddev_{m}" for m in metrics] + ["replications", "status"])
        lines = [",".join(header)]
        for pt in self.points:
            row = [f"{pt.axes[a]:.12g}" for a in axis_names]
            row += [f"{pt.means.get(m, math.nan):.12g}" for m in metrics]
            if pt.stddevs is None:
                row += ["" for _ in metrics]
            else:
                row += [f"{pt.stddevs.get(m, math.nan):.12g}" for m in metrics]
            row += [str(pt.replications), pt.status]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv())


def _nan_mean_std(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    if np.all(np.isnan(arr)):
        return math.nan, math.nan
    mean = float(np.nanmean(arr))
    std = float(np.nanstd(arr, ddof=1)) if np.sum(~np.isnan(arr)) > 1 else math.nan
    return mean, std


def _run_size_job(args) -> dict[str, float] | None:
    config = args
    try:
        report = run_experiment(config)
    except DivergenceError:
        return None
    if report.status != "ok":
        return None
    return {m: getattr(report, m) for m in SIZE_SWEEP_METRICS}


def _execute(jobs: list, worker, threads: int) -> list:
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(worker, jobs, chunksize=1))
    return [worker(job) for job in jobs]


def run_size_sweep(base: ExperimentConfig, fractions: list[float], ks: list[int],
                   replications: int = 5, threads: int = 1) -> SweepResult:
    """Random-assignment experiments over a (k, N/n) grid, seed-replicated.

    Every grid point runs `replications` experiments on fresh graphs with
    derived seeds, and reports per-metric means and sample stddevs.
    Divergent points are flagged in their status, and the sweep
    continues. Results are merged in grid order, so the output does not
    depend on `threads`.
    """
    if not fractions or not ks:
        raise ParameterError("sweep axes must be nonempty")
    if len(set(fractions)) != len(fractions) or len(set(ks)) != len(ks):
        raise ParameterError("sweep grid points must be distinct")
    if replications < 1:
        raise ParameterError("replications must be positive")

    sweep_key = derive_key(base.graph.seed, DOMAIN_SWEEP)
    jobs = []
    grid = []
    for ki, k in enumerate(ks):
        for fi, frac in enumerate(fractions):
            size = min(base.graph.n, max(1, round(frac * base.graph.n)))
            grid.append((k, frac, size))
            for rep in range(replications):
                point_key = derive_key(derive_key(derive_key(sweep_key, ki), fi), rep)
                jobs.append(replace(
                    base,
                    graph=replace(base.graph, k=k, seed=point_key),
                    dynamics=replace(base.dynamics, seed=derive_key(point_key, 1)),
                    assignment=Assignment("random", size, seed=derive_key(point_key, 2)),
                ))

    results = _execute(jobs, _run_size_job, threads)

    out = SweepResult(kind="size")
    for gi, (k, frac, size) in enumerate(grid):
        reps = results[gi * replications:(gi + 1) * replications]
        ok = [r for r in reps if r is not None]
        means, stds = {}, {}
        for m in SIZE_SWEEP_METRICS:
            mean, std = _nan_mean_std([r[m] for r in ok]) if ok else (math.nan, math.nan)
            means[m] = mean
            stds[m] = std
        out.points.append(SweepPoint(
            axes={"k": k, "p": base.graph.p, "n": base.graph.n,
                  "N": size, "frac": frac,
                  "delta_lambda": base.dynamics.delta_lambda},
            means=means,
            stddevs=stds if replications > 1 else None,
            replications=replications,
            status="ok" if len(ok) == len(reps) else "divergent",
        ))
    return out


def _run_p_job(args) -> dict[str, float] | None:
    params, dynamics, burn_in, window = args
    try:
        g = generate_watts_strogatz(params)
        c_prime = run_baseline(g, dynamics, burn_in, window)
        effect = c_prime / analytic_c_base(
            dynamics.lambda_int, g.mean_degree(), dynamics.nu_damp) - 1.0
    except DivergenceError:
        return None
    return {"c_base_prime": c_prime, "e_degree_distribution": effect}


def run_p_sweep(n: int, k: int, ps: list[float], replications: int = 5,
                dynamics: DynamicsParams | None = None, graph_seed: int = 0,
                burn_in: int = DEFAULT_BURN_IN, window: int = DEFAULT_WINDOW,
                threads: int = 1) -> SweepResult:
    """Degree-distribution effect of bare runs across rewiring probabilities."""
    if not ps:
        raise ParameterError("sweep axes must be nonempty")
    if len(set(ps)) != len(ps):
        raise ParameterError("sweep grid points must be distinct")
    if replications < 1:
        raise ParameterError("replications must be positive")
    if dynamics is None:
        dynamics = DynamicsParams()
    if dynamics.delta_lambda != 0.0:
        raise ParameterError("p sweeps measure bare baselines; delta_lambda must be 0")

    sweep_key = derive_key(graph_seed, DOMAIN_SWEEP)
    jobs = []
    for pi, p in enumerate(ps):
        for rep in range(replications):
            point_key = derive_key(derive_key(sweep_key, pi), rep)
            params = WattsStrogatzParams(n=n, k=k, p=p, seed=point_key)
            jobs.append((params, replace(dynamics, seed=derive_key(point_key, 1)),
                         burn_in, window))

    results = _execute(jobs, _run_p_job, threads)

    out = SweepResult(kind="p")
    for pi, p in enumerate(ps):
        reps = results[pi * replications:(pi + 1) * replications]
        ok = [r for r in reps if r is not None]
        means, stds = {}, {}
        for m in P_SWEEP_METRICS:
            mean, std = _nan_mean_std([r[m] for r in ok]) if ok else (math.nan, math.nan)
            means[m] = mean
            stds[m] = std
        out.points.append(SweepPoint(
            axes={"k": k, "p": p, "n": n},
            means=means,
            stddevs=stds if replications > 1 else None,
            replications=replications,
            status="ok" if len(ok) == len(reps) else "divergent",
        ))
    return out
