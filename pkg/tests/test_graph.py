import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netrct import (
    GenerationError,
    ParameterError,
    WattsStrogatzParams,
    degree_histogram,
    generate_watts_strogatz,
    mean_degree_of,
    partition_by_treatment,
    within_group_edge_fraction,
)
from netrct.graph import format_edge_list


# ---------------------------------------------------------------- parameters

@pytest.mark.parametrize(
    "n,k,p",
    [
        (100, 5, 0.1),   # odd k
        (100, 100, 0.1),  # k >= n
        (100, 102, 0.1),
        (2, 2, 0.1),     # n too small
        (100, 6, -0.1),  # p out of range
        (100, 6, 1.5),
        (100, 0, 0.1),
    ],
)
def test_invalid_params_rejected(n, k, p):
    with pytest.raises(ParameterError):
        WattsStrogatzParams(n, k, p, seed=1)


def test_odd_k_error_names_constraint():
    with pytest.raises(ParameterError, match="even"):
        WattsStrogatzParams(100, 7, 0.1)


# ---------------------------------------------------------------- generation

def _assert_invariants(g, params):
    degrees = g.degrees
    assert g.n == params.n
    assert g.edge_count == params.n * params.k // 2
    assert int(degrees.sum()) == params.n * params.k  # mean degree exactly k
    # symmetry, no self loops, no duplicates
    for i in range(g.n):
        nbrs = g.neighbors(i)
        assert np.all(np.diff(nbrs) > 0)  # sorted, no duplicates
        assert i not in nbrs
        for j in nbrs.tolist():
            assert i in g.neighbors(j)


def test_ring_lattice_structure():
    g = generate_watts_strogatz(WattsStrogatzParams(100, 6, 0.0, seed=9))
    _assert_invariants(g, g.params)
    assert np.all(g.degrees == 6)
    for i in range(100):
        expected = sorted((i + d) % 100 for d in (-3, -2, -1, 1, 2, 3))
        assert g.neighbors(i).tolist() == expected


def test_generation_deterministic():
    params = WattsStrogatzParams(500, 10, 0.3, seed=77)
    a = generate_watts_strogatz(params)
    b = generate_watts_strogatz(params)
    assert np.array_equal(a.indptr, b.indptr)
    assert np.array_equal(a.indices, b.indices)
    c = generate_watts_strogatz(WattsStrogatzParams(500, 10, 0.3, seed=78))
    assert not np.array_equal(a.indices, c.indices)


@settings(max_examples=25, deadline=None)
@given(data=st.data())
def test_generated_graph_invariants(data):
    n = data.draw(st.integers(min_value=6, max_value=64))
    half = data.draw(st.integers(min_value=1, max_value=(n - 1) // 2))
    p = data.draw(st.sampled_from([0.0, 0.1, 0.5, 1.0]))
    seed = data.draw(st.integers(min_value=0, max_value=2**32))
    g = generate_watts_strogatz(WattsStrogatzParams(n, 2 * half, p, seed=seed))
    _assert_invariants(g, g.params)


def test_full_rewire_stays_connected_and_edge_preserving():
    g = generate_watts_strogatz(WattsStrogatzParams(10000, 50, 1.0, seed=2))
    assert g.edge_count == 250000
    assert int(g.degrees.sum()) == 500000


def test_degree_variance_grows_with_p():
    # spread at p=1.0 strictly exceeds spread at p=0.1, seed by seed
    for seed in range(10):
        low = generate_watts_strogatz(WattsStrogatzParams(10000, 50, 0.1, seed=seed))
        high = generate_watts_strogatz(WattsStrogatzParams(10000, 50, 1.0, seed=seed))
        assert high.degrees.var() > low.degrees.var()


def test_degree_spread_reaches_both_sides_and_skews_high():
    # the rewired degree distribution reaches both sides of the mean and
    # carries more mass in the upper tail than at the mirrored distance
    upper_tail = 0
    lower_tail = 0
    for seed in range(10):
        g = generate_watts_strogatz(WattsStrogatzParams(10000, 50, 0.1, seed=seed))
        counts = np.bincount(g.degrees)
        assert counts[:50].sum() > 0 and counts[51:].sum() > 0
        upper_tail += int((g.degrees >= 56).sum())
        lower_tail += int((g.degrees <= 44).sum())
    assert upper_tail > lower_tail


# ----------------------------------------------------------------- histogram

def test_histogram_of_ring_is_single_bucket():
    g = generate_watts_strogatz(WattsStrogatzParams(300, 6, 0.0, seed=1))
    hist = degree_histogram(g)
    assert hist.counts == {6: 300}
    assert hist.mean() == 6.0


def test_histogram_mean_exact_after_rewiring(ws_10k_k50):
    hist = degree_histogram(ws_10k_k50)
    assert sum(hist.counts.values()) == 10000
    assert hist.total_degree() == 10000 * 50


# -------------------------------------------------------------- mean degrees

def test_mean_degree_of_all_nodes_is_k(small_ws):
    assert mean_degree_of(small_ws, np.arange(small_ws.n)) == 8.0


def test_mean_degree_of_single_node(small_ws):
    node = 13
    assert mean_degree_of(small_ws, [node]) == float(small_ws.degrees[node])


def test_mean_degree_of_rejects_bad_input(small_ws):
    with pytest.raises(ParameterError):
        mean_degree_of(small_ws, [])
    with pytest.raises(ParameterError):
        mean_degree_of(small_ws, [small_ws.n])


# ----------------------------------------------------------------- partition

def test_partition_all_nodes_treated(small_ws):
    parts = partition_by_treatment(small_ws, np.arange(small_ws.n))
    assert parts.n_treatment == small_ws.n
    assert parts.n_neighbours == 0 and parts.n_rest == 0
    assert parts.n_control == 0


def test_partition_neighbours_are_adjacent_non_treatment(small_ws):
    treatment = np.array([0, 1, 50])
    parts = partition_by_treatment(small_ws, treatment)
    tset = set(treatment.tolist())
    expected_nb = set()
    for t in treatment:
        expected_nb.update(small_ws.neighbors(t).tolist())
    expected_nb -= tset
    assert set(parts.neighbours.tolist()) == expected_nb


@settings(max_examples=25, deadline=None)
@given(data=st.data())
def test_partition_is_disjoint_cover(small_ws, data):
    size = data.draw(st.integers(min_value=1, max_value=small_ws.n))
    seed = data.draw(st.integers(min_value=0, max_value=2**32))
    rng = np.random.default_rng(seed)
    treatment = rng.choice(small_ws.n, size=size, replace=False)
    parts = partition_by_treatment(small_ws, treatment)
    union = np.concatenate([parts.treatment, parts.neighbours, parts.rest])
    assert union.size == small_ws.n
    assert np.array_equal(np.sort(union), np.arange(small_ws.n))
    assert parts.n_control == small_ws.n - size


def test_partition_rejects_invalid_ids(small_ws):
    with pytest.raises(ParameterError):
        partition_by_treatment(small_ws, [])
    with pytest.raises(ParameterError):
        partition_by_treatment(small_ws, [-1])
    with pytest.raises(ParameterError):
        partition_by_treatment(small_ws, [1, 1])


# ------------------------------------------------------- edge fraction

def test_within_fraction_all_nodes_is_one(small_ws):
    assert within_group_edge_fraction(small_ws, np.arange(small_ws.n)) == 1.0


def test_within_fraction_isolated_member_is_zero():
    g = generate_watts_strogatz(WattsStrogatzParams(100, 6, 0.0, seed=1))
    # node 50 has no neighbour inside {0, 50}
    assert within_group_edge_fraction(g, [0, 50]) == 0.0


def test_within_fraction_bounds_and_complement(small_ws):
    group = np.arange(40)
    inside = within_group_edge_fraction(small_ws, group)
    complement = within_group_edge_fraction(
        small_ws, np.setdiff1d(np.arange(small_ws.n), group))
    assert 0.0 <= inside <= 1.0
    assert 0.0 <= complement <= 1.0


def test_within_fraction_contiguous_block_is_high(small_ws):
    # a ring-contiguous block keeps most incidences internal at low p
    assert within_group_edge_fraction(small_ws, np.arange(50)) > 0.6


def test_within_fraction_rejects_empty(small_ws):
    with pytest.raises(ParameterError):
        within_group_edge_fraction(small_ws, [])


# ----------------------------------------------------------------- edge list

def test_edge_list_format():
    g = generate_watts_strogatz(WattsStrogatzParams(10, 4, 0.0, seed=6))
    text = format_edge_list(g)
    lines = text.strip().split("\n")
    assert lines[0] == "# n=10 k=4 p=0 seed=6"
    assert len(lines) == 1 + 20
    pairs = [tuple(map(int, line.split())) for line in lines[1:]]
    assert all(u < v for u, v in pairs)
    assert pairs == sorted(pairs)


def test_generation_error_when_connectivity_impossible(monkeypatch):
    import netrct.graph as graph_mod

    monkeypatch.setattr(graph_mod, "_connected", lambda *args: False)
    with pytest.raises(GenerationError):
        graph_mod.generate_watts_strogatz(WattsStrogatzParams(20, 4, 0.5, seed=0))
