"""Discrete-time content production with neighbour feedback.

Each step, every node sums the content its neighbours produced in the
previous step, scales the sum by the global dampening factor, adds the
intrinsic rate, and draws its new content from the configured production
model at that rate. Treated nodes get their intrinsic rate multiplied by
(1 + delta_lambda); see `boost` below for the alternative rule that
multiplies the whole rate. All nodes update simultaneously from the
previous-step snapshot, and every draw is a pure function of
(seed, node, step), so results do not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import sparse
from scipy.special import expit, gammaln

from .errors import DivergenceError, NumericError, ParameterError, StabilityError
from .graph import Graph, GroupPartition
from .rng import (
    DOMAIN_BASELINE,
    DOMAIN_DYNAMICS,
    derive_key,
    node_step_u64,
    node_step_u64_scalar,
    substream_u64_array,
    unit_from_u64,
    unit_from_u64_array,
)

PRODUCTION_MODELS = ("constant", "uniform", "poisson")
REGULARIZATION_MODES = ("none", "hard_cap", "sigmoid")
BOOST_MODES = ("intrinsic", "total")

#: any tracked group mean above this flags the run as divergent
DIVERGENCE_LIMIT = 1e12

#: default steady-state measurement window
DEFAULT_STEPS = 50
DEFAULT_BURN_IN = 20
DEFAULT_WINDOW = 10

#: switch point between Poisson inversion and the PTRS rejection sampler
_POISSON_INVERSION_CUTOFF = 10.0
_POISSON_MAX_INVERSION_STEPS = 400


@dataclass(frozen=True)
class Regularization:
    """Optional caps on the feedback term and on produced content.

    mode "hard_cap" clips with min(); mode "sigmoid" squashes through
    cap * sigmoid(x). A cap only applies when its value is set, so e.g.
    sigmoid mode with only `nu_max` regularizes the network feedback but
    leaves production untouched.
    """

    mode: str = "none"
    nu_max: float | None = None
    c_max: float | None = None

    def __post_init__(self):
        if self.mode not in REGULARIZATION_MODES:
            raise ParameterError(
                f"regularization mode must be one of {REGULARIZATION_MODES}, got {self.mode!r}"
            )
        if self.mode == "none":
            if self.nu_max is not None or self.c_max is not None:
                raise ParameterError("caps require a regularization mode other than 'none'")
            return
        if self.nu_max is None and self.c_max is None:
            raise ParameterError(f"mode {self.mode!r} requires nu_max and/or c_max")
        for name, cap in (("nu_max", self.nu_max), ("c_max", self.c_max)):
            if cap is not None and not (float(cap) > 0 and math.isfinite(cap)):
                raise ParameterError(f"{name} must be a positive finite real, got {cap!r}")


@dataclass(frozen=True)
class DynamicsParams:
    """All knobs of one simulation run."""

    lambda_int: float = 1.0
    nu_damp: float = 0.01
    delta_lambda: float = 0.0
    model: str = "constant"
    regularization: Regularization = field(default_factory=Regularization)
    steps: int = DEFAULT_STEPS
    seed: int = 0
    boost: str = "intrinsic"

    def __post_init__(self):
        for name in ("lambda_int", "nu_damp", "delta_lambda"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
                raise ParameterError(f"{name} must be a non-negative finite real, got {value!r}")
        if self.model not in PRODUCTION_MODELS:
            raise ParameterError(
                f"model must be one of {PRODUCTION_MODELS}, got {self.model!r}"
            )
        if self.boost not in BOOST_MODES:
            raise ParameterError(f"boost must be one of {BOOST_MODES}, got {self.boost!r}")
        if not isinstance(self.steps, int) or self.steps < 1:
            raise ParameterError(f"steps must be a positive integer, got {self.steps!r}")
        if not isinstance(self.seed, int) or self.seed < 0 or self.seed > (1 << 64) - 1:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


@dataclass
class ContentState:
    """Per-node content values at one time step (all zeros at t=0)."""

    t: int
    values: np.ndarray


@dataclass
class TimeSeries:
    """Per-step means of the tracked groups, plus divergence status.

    Row 0 is the all-zero initial state; rows then follow each executed
    step. Means of empty groups are NaN.
    """

    steps: np.ndarray
    mean_all: np.ndarray
    mean_treatment: np.ndarray
    mean_neighbours: np.ndarray
    mean_rest: np.ndarray
    mean_control: np.ndarray
    diverged: bool = False
    diverged_at: int | None = None
    final_values: np.ndarray | None = None

    _COLUMNS = ("t", "mean_all", "mean_treatment", "mean_neighbours",
                "mean_rest", "mean_control")

    def window_mean(self, column: str, window: int) -> float:
        """Average of a column over the final `window` recorded steps."""
        values = getattr(self, column)[1:]  # skip the t=0 row
        if values.size < window:
            raise ParameterError(
                f"window of {window} steps exceeds the {values.size} recorded steps"
            )
        return float(values[-window:].mean())

    def to_csv(self) -> str:
        lines = [",".join(self._COLUMNS)]
        for i in range(self.steps.size):
            row = [str(int(self.steps[i]))]
            for col in self._COLUMNS[1:]:
                row.append(f"{getattr(self, col)[i]:.12g}")
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv())


def _poisson_inversion(lam: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Poisson quantiles by CDF inversion; exact for moderate rates."""
    out = np.zeros(lam.size, dtype=np.float64)
    pmf = np.exp(-lam)
    cdf = pmf.copy()
    active = u >= cdf
    k = 0
    while active.any():
        k += 1
        if k > _POISSON_MAX_INVERSION_STEPS:
            # u within one ulp of 1; the remaining tail mass is below 2**-53
            out[active] = k - 1
            break
        pmf[active] *= lam[active] / k
        cdf[active] += pmf[active]
        out[active] = k
        active &= u >= cdf
    return out


def _poisson_ptrs(lam: np.ndarray, bases: np.ndarray) -> np.ndarray:
    """Poisson draws via the PTRS transformed-rejection sampler (rates >= 10).

    Consumes uniforms pairwise from the per-element substreams rooted at
    `bases`, so the number of rejection rounds of one element never
    shifts another element's stream.
    """
    out = np.zeros(lam.size, dtype=np.float64)
    slam = np.sqrt(lam)
    loglam = np.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2.0)

    active = np.arange(lam.size)
    draw = 0
    while active.size:
        draw += 1
        u = unit_from_u64_array(substream_u64_array(bases[active], 2 * draw - 1)) - 0.5
        v = unit_from_u64_array(substream_u64_array(bases[active], 2 * draw))
        us = 0.5 - np.abs(u)
        k = np.floor((2.0 * a[active] / us + b[active]) * u + lam[active] + 0.43)

        accept = (us >= 0.07) & (v <= vr[active])
        consider = ~accept & (k >= 0) & ~((us < 0.013) & (v > us))
        if consider.any():
            idx = np.flatnonzero(consider)
            ia = active[idx]
            with np.errstate(divide="ignore"):
                lhs = (np.log(v[idx]) + np.log(invalpha[ia])
                       - np.log(a[ia] / (us[idx] * us[idx]) + b[ia]))
            rhs = k[idx] * loglam[ia] - lam[ia] - gammaln(k[idx] + 1.0)
            accept[idx] |= lhs <= rhs
        out[active[accept]] = k[accept]
        active = active[~accept]
    return out


def _poisson_draws(lam: np.ndarray, bases: np.ndarray) -> np.ndarray:
    """Exact Poisson draws keyed by the per-node words in `bases`."""
    out = np.empty(lam.size, dtype=np.float64)
    small = lam < _POISSON_INVERSION_CUTOFF
    if small.any():
        idx = np.flatnonzero(small)
        out[idx] = _poisson_inversion(lam[idx], unit_from_u64_array(bases[idx]))
    large = ~small
    if large.any():
        idx = np.flatnonzero(large)
        out[idx] = _poisson_ptrs(lam[idx], bases[idx])
    return out


def _draw_content(lam: np.ndarray, params: DynamicsParams, t: int,
                  dyn_key: int) -> np.ndarray:
    if params.model == "constant":
        return lam.copy()
    bases = node_step_u64(dyn_key, t, lam.size)
    if params.model == "uniform":
        # inverse transform of U(0, 2*lam)
        return 2.0 * lam * unit_from_u64_array(bases)
    return _poisson_draws(lam, bases)


def _apply_feedback_cap(raw: np.ndarray, reg: Regularization) -> np.ndarray:
    if reg.mode == "none" or reg.nu_max is None:
        return raw
    if reg.mode == "hard_cap":
        return np.minimum(reg.nu_max, raw)
    return reg.nu_max * expit(raw)


def _apply_content_cap(drawn: np.ndarray, reg: Regularization) -> np.ndarray:
    if reg.mode == "none" or reg.c_max is None:
        return drawn
    if reg.mode == "hard_cap":
        return np.minimum(reg.c_max, drawn)
    return reg.c_max * expit(drawn)


def _boost_vector(n: int, params: DynamicsParams, treatment) -> np.ndarray:
    boost = np.ones(n, dtype=np.float64)
    if treatment is not None and params.delta_lambda > 0:
        idx = np.asarray(
            sorted(treatment) if isinstance(treatment, (set, frozenset)) else treatment,
            dtype=np.int64,
        )
        if idx.size:
            if idx.min() < 0 or idx.max() >= n:
                raise ParameterError("treatment contains node ids outside the graph")
            boost[idx] = 1.0 + params.delta_lambda
    return boost


def _step_values(adj: sparse.csr_matrix, prev: np.ndarray, params: DynamicsParams,
                 boost: np.ndarray, t: int, dyn_key: int) -> np.ndarray:
    reg = params.regularization
    nu = _apply_feedback_cap(params.nu_damp * (adj @ prev), reg)
    if params.boost == "intrinsic":
        lam = params.lambda_int * boost + nu
    else:
        lam = (params.lambda_int + nu) * boost
    values = _apply_content_cap(_draw_content(lam, params, t, dyn_key), reg)
    if not np.all(np.isfinite(values)):
        raise DivergenceError(t, f"non-finite content at step {t}")
    return values


def step(g: Graph, state: ContentState, params: DynamicsParams,
         treatment=None) -> ContentState:
    """Advance one time step; all nodes update from the t-1 snapshot."""
    if state.values.shape != (g.n,):
        raise ParameterError(
            f"state has {state.values.shape} values for a graph of {g.n} nodes"
        )
    t = state.t + 1
    boost = _boost_vector(g.n, params, treatment)
    dyn_key = derive_key(params.seed, DOMAIN_DYNAMICS)
    values = _step_values(g.to_csr(), state.values, params, boost, t, dyn_key)
    return ContentState(t=t, values=values)


def _group_mean(values: np.ndarray, idx: np.ndarray) -> float:
    if idx.size == 0:
        return math.nan
    return float(values[idx].sum() / idx.size)


def simulate(g: Graph, params: DynamicsParams, treatment=None,
             tracked: GroupPartition | None = None, *,
             record_final_state: bool = False) -> TimeSeries:
    """Run `params.steps` steps from the all-zero state, recording group means.

    Aborts early and flags (rather than fails) the result when any
    tracked mean exceeds DIVERGENCE_LIMIT or turns non-finite.
    """
    adj = g.to_csr()
    boost = _boost_vector(g.n, params, treatment)
    dyn_key = derive_key(params.seed, DOMAIN_DYNAMICS)

    if tracked is not None:
        t_idx = tracked.treatment
        nb_idx = tracked.neighbours
        rest_idx = tracked.rest
    else:
        empty = np.empty(0, dtype=np.int64)
        t_idx, nb_idx, rest_idx = empty, empty, empty
    n_control = nb_idx.size + rest_idx.size

    steps_out = [0]
    cols = {name: [0.0 if size else math.nan] for name, size in (
        ("mean_all", g.n),
        ("mean_treatment", t_idx.size),
        ("mean_neighbours", nb_idx.size),
        ("mean_rest", rest_idx.size),
        ("mean_control", n_control),
    )}

    values = np.zeros(g.n, dtype=np.float64)
    diverged = False
    diverged_at = None
    for t in range(1, params.steps + 1):
        try:
            values = _step_values(adj, values, params, boost, t, dyn_key)
        except DivergenceError as exc:
            diverged = True
            diverged_at = exc.step
            break
        nb_sum = float(values[nb_idx].sum()) if nb_idx.size else math.nan
        rest_sum = float(values[rest_idx].sum()) if rest_idx.size else math.nan
        steps_out.append(t)
        cols["mean_all"].append(float(values.mean()))
        cols["mean_treatment"].append(_group_mean(values, t_idx))
        cols["mean_neighbours"].append(nb_sum / nb_idx.size if nb_idx.size else math.nan)
        cols["mean_rest"].append(rest_sum / rest_idx.size if rest_idx.size else math.nan)
        if n_control:
            # control mean from the subgroup sums keeps the weighted-mean
            # identity with neighbours/rest exact
            parts = [s for s in (nb_sum, rest_sum) if not math.isnan(s)]
            cols["mean_control"].append(sum(parts) / n_control)
        else:
            cols["mean_control"].append(math.nan)
        if any(cols[c][-1] > DIVERGENCE_LIMIT for c in cols):  # NaN compares False
            diverged = True
            diverged_at = t
            break

    return TimeSeries(
        steps=np.asarray(steps_out, dtype=np.int64),
        mean_all=np.asarray(cols["mean_all"]),
        mean_treatment=np.asarray(cols["mean_treatment"]),
        mean_neighbours=np.asarray(cols["mean_neighbours"]),
        mean_rest=np.asarray(cols["mean_rest"]),
        mean_control=np.asarray(cols["mean_control"]),
        diverged=diverged,
        diverged_at=diverged_at,
        final_values=values if record_final_state else None,
    )


def analytic_c_base(lambda_int: float, k: float, nu_damp: float) -> float:
    """Closed-form steady-state mean on a k-regular graph, no treatment."""
    rho = k * nu_damp
    if rho >= 1.0:
        raise StabilityError(
            f"k * nu_damp = {rho:g} >= 1: no finite steady state"
        )
    return lambda_int / (1.0 - rho)


def analytic_c_full(lambda_int: float, k: float, nu_damp: float,
                    delta_lambda: float, boost: str = "intrinsic") -> float:
    """Fixed point when every node receives the treatment boost.

    Under the default "intrinsic" rule only the intrinsic rate is
    multiplied, so the feedback loop gain is unchanged and the fixed
    point is (1 + dl) * lambda_int / (1 - k * nu_damp). Under "total"
    the whole rate is multiplied, which also rescales the loop gain:
    (1 + dl) * lambda_int / (1 - (1 + dl) * k * nu_damp).
    """
    if boost not in BOOST_MODES:
        raise ParameterError(f"boost must be one of {BOOST_MODES}, got {boost!r}")
    factor = 1.0 + delta_lambda
    gain = k * nu_damp * (factor if boost == "total" else 1.0)
    if gain >= 1.0:
        raise StabilityError(f"loop gain {gain:g} >= 1: no finite steady state")
    return factor * lambda_int / (1.0 - gain)


def stability_margin(k: float, nu_damp: float, delta_lambda: float = 0.0,
                     boost: str = "intrinsic") -> float:
    """1 - loop gain: positive = stable, zero = linear growth, negative = divergent.

    With the "intrinsic" boost rule the treatment boost feeds only the
    input, not the loop, so the margin does not depend on delta_lambda.
    """
    if boost not in BOOST_MODES:
        raise ParameterError(f"boost must be one of {BOOST_MODES}, got {boost!r}")
    factor = (1.0 + delta_lambda) if boost == "total" else 1.0
    return 1.0 - factor * k * nu_damp


def regularized_fixed_point(lambda_int: float, k: float, nu_damp: float,
                            nu_max: float, tol: float = 1e-10,
                            max_iter: int = 200_000) -> float:
    """Solve c = lambda_int + nu_max * sigmoid(c * k * nu_damp).

    Damped fixed-point iteration; the damping factor is chosen from the
    slope bound nu_max * k * nu_damp / 4 so the iteration is a
    contraction for any parameters.
    """
    if not nu_max > 0:
        raise ParameterError(f"nu_max must be positive, got {nu_max!r}")
    slope_bound = nu_max * k * nu_damp / 4.0
    alpha = 1.0 if slope_bound < 0.9 else 1.0 / (1.0 + slope_bound)

    def g(c: float) -> float:
        return lambda_int + nu_max * float(expit(c * k * nu_damp))

    c = lambda_int + 0.5 * nu_max
    for _ in range(max_iter):
        target = g(c)
        if abs(target - c) <= tol:
            return c
        c = (1.0 - alpha) * c + alpha * target
    raise NumericError(
        f"fixed point did not converge to {tol:g} within {max_iter} iterations"
    )


def baseline_params(params: DynamicsParams, model: str = "constant") -> DynamicsParams:
    """The untreated companion of `params` used for bare baseline runs."""
    return replace(params, delta_lambda=0.0, model=model,
                   seed=derive_key(params.seed, DOMAIN_BASELINE))
