import math

import pytest


def timeseries_csv(steps=20, level=2.0, groups=False):
    lines = ["t,mean_all,mean_treatment,mean_neighbours,mean_rest,mean_control"]
    for t in range(steps + 1):
        mean = level * (1 - 0.5**t)
        if groups:
            row = [t, mean, mean * 1.02, mean * 1.005, mean * 0.999, mean * 1.001]
        else:
            row = [t, mean, math.nan, math.nan, math.nan, math.nan]
        lines.append(",".join(f"{x:.12g}" if isinstance(x, float) else str(x)
                              for x in row))
    return "\n".join(lines) + "\n"


def final_state_csv(n=400, base=2.0):
    lines = ["node,degree,content"]
    for i in range(n):
        degree = 40 + (i % 21)
        content = base * degree / 50 + 0.01 * (i % 7)
        lines.append(f"{i},{degree},{content:.12g}")
    return "\n".join(lines) + "\n"


def degrees_csv():
    return "degree,count\n" + "\n".join(
        f"{d},{max(1, 100 - 4 * abs(d - 50))}" for d in range(40, 61)) + "\n"


def p_sweep_csv():
    header = ("k,p,n,c_base_prime,e_degree_distribution,"
              "stddev_c_base_prime,stddev_e_degree_distribution,"
              "replications,status")
    rows = [f"50,{p:g},10000,2.0,{0.005 * p:.6g},0.001,0.0005,5,ok"
            for p in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)]
    return header + "\n" + "\n".join(rows) + "\n"


def size_sweep_csv(damp_by_k={10: 0.9, 30: 0.7, 50: 0.5}):
    metrics = ["c_base_prime", "c_treatment", "c_control", "c_neighbours",
               "c_rest", "e_spillover", "e_treatment", "e_dampening",
               "e_intrinsic"]
    header = ("k,p,n,N,frac,delta_lambda," + ",".join(metrics) + ","
              + ",".join(f"stddev_{m}" for m in metrics) + ",replications,status")
    lines = [header]
    for k, damp in damp_by_k.items():
        for frac in (0.1, 0.25, 0.5, 0.75, 1.0):
            dampening = "nan" if frac == 1.0 else f"{damp - 0.01 * frac:.6g}"
            intrinsic = f"{0.25 + 0.25 * frac:.6g}"
            values = ["2.0", "2.1", "2.001", "2.002", "2.0005",
                      "0.0005", "0.025", dampening, intrinsic]
            stds = ["0.001"] * 9
            lines.append(f"{k},0.1,10000,{int(frac * 10000)},{frac:g},0.5,"
                         + ",".join(values) + "," + ",".join(stds) + ",5,ok")
    return "\n".join(lines) + "\n"


def edge_list_text(n=24, k=4):
    lines = [f"# n={n} k={k} p=0.1 seed=1"]
    edges = set()
    for i in range(n):
        for d in (1, 2):
            edges.add(tuple(sorted((i, (i + d) % n))))
    lines += [f"{u} {v}" for u, v in sorted(edges)]
    return "\n".join(lines) + "\n"


def runs_csv():
    return ("model,status,diverged_at,steps_recorded,window_mean_all,analytic_c_base\n"
            "constant,ok,,50,2.0018,2\n")


@pytest.fixture
def synthetic_outputs(tmp_path):
    """A fake scenario-output tree covering every figure kind."""
    for fig in ("fig2", "fig4", "fig5", "fig6"):
        d = tmp_path / fig
        d.mkdir()
        for model in ("constant", "uniform", "poisson"):
            (d / f"timeseries_{model}.csv").write_text(timeseries_csv())
    fig3 = tmp_path / "fig3"
    fig3.mkdir()
    for model in ("constant", "uniform", "poisson"):
        (fig3 / f"final_state_{model}.csv").write_text(final_state_csv())
    fig7 = tmp_path / "fig7"
    fig7.mkdir()
    for p in ("0", "0.01", "0.1", "0.5"):
        (fig7 / f"degrees_p{p}.csv").write_text(degrees_csv())
    fig8 = tmp_path / "fig8"
    fig8.mkdir()
    (fig8 / "sweep.csv").write_text(p_sweep_csv())
    fig9 = tmp_path / "fig9"
    fig9.mkdir()
    (fig9 / "final_state_constant.csv").write_text(final_state_csv())
    (fig9 / "runs.csv").write_text(runs_csv())
    for fig in ("fig10", "fig11", "fig13"):
        d = tmp_path / fig
        d.mkdir()
        (d / "timeseries.csv").write_text(timeseries_csv(groups=True))
        (d / "report.json").write_text('{"c_base_prime": 2.0019}')
    for fig in ("fig1", "fig12"):
        d = tmp_path / fig
        d.mkdir()
        (d / "graph.edgelist").write_text(edge_list_text())
        (d / "treatment.txt").write_text("".join(f"{i}\n" for i in range(5)))
    for fig in ("fig14", "fig15"):
        d = tmp_path / fig
        d.mkdir()
        (d / "sweep.csv").write_text(size_sweep_csv())
    return tmp_path
