"""The figure registry: what each figure reads and how it is drawn."""

from __future__ import annotations

from dataclasses import dataclass, field

MODELS = ("constant", "uniform", "poisson")

#: one line style per production model, shared by every multi-model plot
MODEL_STYLES = {"constant": "-", "uniform": "--", "poisson": ":"}


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    kind: str
    inputs: tuple[str, ...]
    output: str
    title: str
    options: dict = field(default_factory=dict)


def _model_files(name: str, pattern: str) -> tuple[str, ...]:
    return tuple(f"{name}/{pattern.format(model=m)}" for m in MODELS)


REGISTRY: dict[str, FigureSpec] = {spec.figure_id: spec for spec in [
    FigureSpec("fig1", "graph_layout",
               ("fig1/graph.edgelist", "fig1/treatment.txt"),
               "fig1.png", "Small-world graph, random treatment group"),
    FigureSpec("fig2", "model_series", _model_files("fig2", "timeseries_{model}.csv"),
               "fig2.png", "Mean content production converges"),
    FigureSpec("fig3", "log_histogram",
               _model_files("fig3", "final_state_{model}.csv"),
               "fig3.png", "Final-step content density (log scale)"),
    FigureSpec("fig4", "model_series", _model_files("fig4", "timeseries_{model}.csv"),
               "fig4.png", "Mean content production diverges (k=200)",
               {"logy": True}),
    FigureSpec("fig5", "model_series", _model_files("fig5", "timeseries_{model}.csv"),
               "fig5.png", "Marginal case grows linearly (k=100)"),
    FigureSpec("fig6", "model_series", _model_files("fig6", "timeseries_{model}.csv"),
               "fig6.png", "Sigmoid-regularized feedback converges"),
    FigureSpec("fig7", "degree_histograms",
               tuple(f"fig7/degrees_p{p}.csv" for p in ("0", "0.01", "0.1", "0.5")),
               "fig7.png", "Degree distribution vs rewiring probability"),
    FigureSpec("fig8", "p_sweep_curve", ("fig8/sweep.csv",),
               "fig8.png", "Degree-distribution effect vs p"),
    FigureSpec("fig9", "degree_scatter",
               ("fig9/final_state_constant.csv", "fig9/runs.csv"),
               "fig9.png", "Content production vs node degree"),
    FigureSpec("fig10", "group_series",
               ("fig10/timeseries.csv", "fig10/report.json"),
               "fig10.png", "Spillover into neighbours and rest (random treatment)"),
    FigureSpec("fig11", "group_series",
               ("fig11/timeseries.csv", "fig11/report.json"),
               "fig11.png", "Spillover with k=10"),
    FigureSpec("fig12", "graph_layout",
               ("fig12/graph.edgelist", "fig12/treatment.txt"),
               "fig12.png", "Small-world graph, clustered treatment group"),
    FigureSpec("fig13", "group_series",
               ("fig13/timeseries.csv", "fig13/report.json"),
               "fig13.png", "Clustered treatment group"),
    FigureSpec("fig14", "fraction_curves", ("fig14/sweep.csv",),
               "fig14.png", "Intrinsic effect vs treatment fraction",
               {"metric": "e_intrinsic", "ylabel": "intrinsic effect"}),
    FigureSpec("fig15", "fraction_curves", ("fig15/sweep.csv",),
               "fig15.png", "Dampening is a function of k, not of N/n",
               {"metric": "e_dampening", "ylabel": "dampening effect"}),
]}
