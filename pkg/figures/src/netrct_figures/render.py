"""Build matplotlib figures from simulator outputs and write image files."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib import pyplot as plt
from matplotlib.collections import LineCollection

from .io import InputError, read_csv_columns, read_edge_list, read_node_ids, \
    read_report, read_timeseries
from .specs import MODEL_STYLES, MODELS, FigureSpec

TREATMENT_COLOR = "tab:blue"
OTHER_COLOR = "0.7"
REFERENCE_COLOR = "red"


def _finite(xs, ys):
    pairs = [(x, y) for x, y in zip(xs, ys)
             if isinstance(y, float) and math.isfinite(y)]
    return [p[0] for p in pairs], [p[1] for p in pairs]


def _draw_graph_layout(ax, indir: Path, spec: FigureSpec):
    n, edges = read_edge_list(indir / spec.inputs[0])
    treatment = read_node_ids(indir / spec.inputs[1])
    # circular layout by ring position keeps a clustered group contiguous
    angles = 2.0 * np.pi * np.arange(n) / n
    xs, ys = np.cos(angles), np.sin(angles)
    segments = [((xs[u], ys[u]), (xs[v], ys[v])) for u, v in edges]
    ax.add_collection(LineCollection(segments, colors="0.85", linewidths=0.6,
                                     zorder=1))
    colors = [TREATMENT_COLOR if i in treatment else OTHER_COLOR for i in range(n)]
    ax.scatter(xs, ys, s=28, c=colors, zorder=2, edgecolors="none")
    ax.set_aspect("equal")
    ax.set_xlim(-1.1, 1.1)
    ax.set_ylim(-1.1, 1.1)
    ax.axis("off")


def _draw_model_series(ax, indir: Path, spec: FigureSpec):
    for model, path in zip(MODELS, spec.inputs):
        ts = read_timeseries(indir / path)
        steps, means = _finite(ts["t"], ts["mean_all"])
        ax.plot(steps, means, MODEL_STYLES[model], label=model)
    if spec.options.get("logy"):
        ax.set_yscale("log")
    ax.set_xlabel("time step")
    ax.set_ylabel("mean content production")
    ax.legend()


def _draw_log_histogram(ax, indir: Path, spec: FigureSpec):
    for model, path in zip(MODELS, spec.inputs):
        columns = read_csv_columns(indir / path)
        if "content" not in columns:
            raise InputError(indir / path, "missing column 'content'")
        ax.hist(columns["content"], bins=60, density=True, histtype="step",
                linestyle=MODEL_STYLES[model], label=model)
    ax.set_yscale("log")
    ax.set_xlabel("content produced in the final step")
    ax.set_ylabel("density")
    ax.legend()


def _draw_degree_histograms(ax, indir: Path, spec: FigureSpec):
    for path in spec.inputs:
        columns = read_csv_columns(indir / path)
        if "degree" not in columns or "count" not in columns:
            raise InputError(indir / path, "expected columns degree,count")
        label = Path(path).stem.split("_", 1)[-1].replace("p", "p=")
        ax.plot(columns["degree"], columns["count"], marker=".", label=label)
    ax.set_xlabel("degree")
    ax.set_ylabel("node count")
    ax.legend()


def _draw_p_sweep(ax, indir: Path, spec: FigureSpec):
    columns = read_csv_columns(indir / spec.inputs[0])
    if "e_degree_distribution" not in columns:
        raise InputError(indir / spec.inputs[0],
                         "missing column 'e_degree_distribution'")
    errors = columns.get("stddev_e_degree_distribution")
    yerr = None
    if errors and all(isinstance(e, float) and math.isfinite(e) for e in errors):
        yerr = errors
    ax.errorbar(columns["p"], columns["e_degree_distribution"], yerr=yerr,
                marker="o")
    ax.set_xlabel("rewiring probability p")
    ax.set_ylabel("degree-distribution effect")


def _draw_degree_scatter(ax, indir: Path, spec: FigureSpec):
    columns = read_csv_columns(indir / spec.inputs[0])
    for required in ("degree", "content"):
        if required not in columns:
            raise InputError(indir / spec.inputs[0], f"missing column {required!r}")
    degrees = np.asarray(columns["degree"], dtype=float)
    content = np.asarray(columns["content"], dtype=float)
    buckets = sorted(set(degrees.tolist()))
    means = [content[degrees == d].mean() for d in buckets]
    ax.scatter(buckets, means, s=18)
    runs = read_csv_columns(indir / spec.inputs[1])
    reference = next((v for m, v in zip(runs["model"], runs["analytic_c_base"])
                      if m == "constant"), math.nan)
    if isinstance(reference, float) and math.isfinite(reference):
        ax.axhline(reference, color=REFERENCE_COLOR, linestyle="--", linewidth=1)
    ax.axvline(float(np.average(degrees)), color=REFERENCE_COLOR,
               linestyle="--", linewidth=1)
    ax.set_xlabel("node degree")
    ax.set_ylabel("mean content production")


def _draw_group_series(ax, indir: Path, spec: FigureSpec):
    ts = read_timeseries(indir / spec.inputs[0])
    for column, style in (("mean_treatment", "-"), ("mean_neighbours", "--"),
                          ("mean_rest", ":")):
        steps, means = _finite(ts["t"], ts[column])
        ax.plot(steps, means, style, label=column.removeprefix("mean_"))
    report = read_report(indir / spec.inputs[1])
    reference = report.get("c_base_prime")
    if isinstance(reference, (int, float)):
        ax.axhline(reference, color=REFERENCE_COLOR, linestyle="--",
                   linewidth=1, label="bare baseline")
    ax.set_xlim(left=5)  # steady-state portion; early transient is off scale
    ax.set_xlabel("time step")
    ax.set_ylabel("mean content production")
    ax.legend()


def _draw_fraction_curves(ax, indir: Path, spec: FigureSpec):
    columns = read_csv_columns(indir / spec.inputs[0])
    metric = spec.options["metric"]
    if metric not in columns:
        raise InputError(indir / spec.inputs[0], f"missing column {metric!r}")
    ks = sorted({int(k) for k in columns["k"]})
    for k in ks:
        rows = [(frac, value) for kk, frac, value in
                zip(columns["k"], columns["frac"], columns[metric])
                if int(kk) == k and isinstance(value, float) and math.isfinite(value)]
        ax.plot([r[0] for r in rows], [r[1] for r in rows], marker="o",
                label=f"k={k}")
    ax.set_ylim(bottom=0)
    ax.set_xlabel("treatment fraction N/n")
    ax.set_ylabel(spec.options.get("ylabel", metric))
    ax.legend()


_DRAWERS = {
    "graph_layout": _draw_graph_layout,
    "model_series": _draw_model_series,
    "log_histogram": _draw_log_histogram,
    "degree_histograms": _draw_degree_histograms,
    "p_sweep_curve": _draw_p_sweep,
    "degree_scatter": _draw_degree_scatter,
    "group_series": _draw_group_series,
    "fraction_curves": _draw_fraction_curves,
}


def build_figure(spec: FigureSpec, indir):
    """Create the matplotlib Figure for one spec (no file output)."""
    indir = Path(indir)
    fig, ax = plt.subplots(figsize=(6.0, 4.2), dpi=120)
    try:
        _DRAWERS[spec.kind](ax, indir, spec)
    except Exception:
        plt.close(fig)
        raise
    ax.set_title(spec.title)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec, indir, outdir) -> Path:
    """Render one figure to `<outdir>/<spec.output>` and return the path.

    Re-rendering overwrites the file with identical bytes: the layout is
    deterministic and the image metadata is pinned.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fig = build_figure(spec, indir)
    target = outdir / spec.output
    try:
        fig.savefig(target, metadata={"Software": "netrct-figures"})
    finally:
        plt.close(fig)
    return target
