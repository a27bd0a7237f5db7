"""Connected Watts-Strogatz graphs and treatment-relative node partitions.

Graphs are generated once and then immutable; the adjacency is stored in
CSR form (sorted neighbour lists), which is what the dynamics hot loop
consumes directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import GenerationError, ParameterError
from .rng import DOMAIN_GRAPH, CounterStream, derive_key

#: attempts at drawing a connected graph before giving up
CONNECTIVITY_RETRY_BUDGET = 100


@dataclass(frozen=True)
class WattsStrogatzParams:
    """Parameters (n, k, p) of the ring-rewiring construction plus a seed."""

    n: int
    k: int
    p: float
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 3:
            raise ParameterError(f"n must be an integer >= 3, got {self.n!r}")
        if not isinstance(self.k, int) or self.k <= 0:
            raise ParameterError(f"k must be a positive integer, got {self.k!r}")
        if self.k % 2 != 0:
            raise ParameterError(
                f"k must be even (the ring lattice connects k/2 neighbours "
                f"on each side), got k={self.k}"
            )
        if self.k >= self.n:
            raise ParameterError(f"k must be smaller than n, got k={self.k}, n={self.n}")
        if not (0.0 <= float(self.p) <= 1.0):
            raise ParameterError(f"p must be in [0, 1], got {self.p!r}")
        if not isinstance(self.seed, int) or self.seed < 0 or self.seed > (1 << 64) - 1:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


@dataclass(eq=False)
class Graph:
    """Immutable undirected graph in CSR form.

    ``indices[indptr[i]:indptr[i+1]]`` is the sorted neighbour list of
    node ``i``. Generation guarantees symmetry, no self loops, no
    duplicate edges and connectivity.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    params: WattsStrogatzParams | None = None
    _csr: sparse.csr_matrix | None = field(default=None, repr=False)

    @property
    def edge_count(self) -> int:
        return self.indices.size // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def mean_degree(self) -> float:
        return 2.0 * self.edge_count / self.n

    def to_csr(self) -> sparse.csr_matrix:
        """Adjacency as a scipy CSR matrix with unit weights (cached)."""
        if self._csr is None:
            data = np.ones(self.indices.size, dtype=np.float64)
            self._csr = sparse.csr_matrix(
                (data, self.indices, self.indptr), shape=(self.n, self.n)
            )
        return self._csr

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """All undirected edges as arrays (u, v) with u < v, sorted by (u, v)."""
        rows = np.repeat(np.arange(self.n), self.degrees)
        cols = self.indices
        upper = cols > rows
        return rows[upper].astype(np.int64), cols[upper].astype(np.int64)


@dataclass
class DegreeHistogram:
    """Node counts per degree value."""

    counts: dict[int, int]
    n: int

    def total_degree(self) -> int:
        return sum(d * c for d, c in self.counts.items())

    def mean(self) -> float:
        return self.total_degree() / self.n

    def min_degree(self) -> int:
        return min(self.counts)

    def max_degree(self) -> int:
        return max(self.counts)


@dataclass
class GroupPartition:
    """Disjoint node sets treatment / neighbours / rest covering the graph.

    ``neighbours`` are the non-treatment nodes adjacent to at least one
    treatment node; ``control`` is the union of neighbours and rest.
    """

    treatment: np.ndarray
    neighbours: np.ndarray
    rest: np.ndarray

    @property
    def control(self) -> np.ndarray:
        return np.sort(np.concatenate([self.neighbours, self.rest]))

    @property
    def n_treatment(self) -> int:
        return self.treatment.size

    @property
    def n_neighbours(self) -> int:
        return self.neighbours.size

    @property
    def n_rest(self) -> int:
        return self.rest.size

    @property
    def n_control(self) -> int:
        return self.neighbours.size + self.rest.size


def _connected(n: int, indptr: np.ndarray, indices: np.ndarray) -> bool:
    """Single-component check; O(n + m) independent of graph diameter."""
    adj = sparse.csr_matrix(
        (np.ones(indices.size, dtype=np.float64), indices, indptr), shape=(n, n)
    )
    return csgraph.connected_components(
        adj, directed=False, return_labels=False) == 1


def _ring_lattice_edges(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Edges (u, v) with u < v of the ring lattice, sorted ascending."""
    half = k // 2
    base = np.arange(n, dtype=np.int64)
    u = np.empty(n * half, dtype=np.int64)
    v = np.empty(n * half, dtype=np.int64)
    for j, d in enumerate(range(1, half + 1)):
        u[j * n:(j + 1) * n] = base
        v[j * n:(j + 1) * n] = (base + d) % n
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    order = np.lexsort((hi, lo))
    return lo[order], hi[order]


def _attempt_generation(
    params: WattsStrogatzParams, stream: CounterStream
) -> tuple[np.ndarray, np.ndarray]:
    """One rewiring pass; returns final indptr/indices (may be disconnected)."""
    n, k, p = params.n, params.k, float(params.p)
    half = k // 2
    lo, hi = _ring_lattice_edges(n, k)
    m = lo.size

    rewire_mask = stream.unit_array(m) < p
    rewire_idx = np.flatnonzero(rewire_mask)

    # Rewiring walks the original edges in ascending (u, v) order. Only the
    # delta against the lattice is tracked: membership of (u, w) in the
    # current graph is "on the lattice and not removed, or added".
    removed: set[int] = set()
    added_codes: set[int] = set()
    new_u: list[int] = []
    new_w: list[int] = []
    lo_list = lo.tolist()
    hi_list = hi.tolist()
    wrap = n - half
    for i in rewire_idx.tolist():
        u = lo_list[i]
        v = hi_list[i]
        removed.add(u * n + v)
        while True:
            w = stream.randint_below(n)
            if w == u:
                continue
            a, b = (u, w) if u < w else (w, u)
            code = a * n + b
            d = (w - u) % n
            on_lattice = d <= half or d >= wrap
            if (on_lattice and code not in removed) or code in added_codes:
                continue
            break
        added_codes.add(code)
        new_u.append(u)
        new_w.append(w)

    keep = ~rewire_mask
    eu = np.concatenate([lo[keep], np.asarray(new_u, dtype=np.int64)])
    ev = np.concatenate([hi[keep], np.asarray(new_w, dtype=np.int64)])
    rows = np.concatenate([eu, ev])
    cols = np.concatenate([ev, eu])
    adj = sparse.coo_matrix(
        (np.ones(rows.size, dtype=np.float64), (rows, cols)), shape=(n, n)
    ).tocsr()
    adj.sort_indices()
    return adj.indptr, adj.indices


def generate_watts_strogatz(params: WattsStrogatzParams) -> Graph:
    """Generate a connected Watts-Strogatz graph.

    Construction: build the ring lattice where node i connects to
    i +/- 1 ... i +/- k/2 (mod n), then visit the original edges in
    ascending (u, v) order and, with probability p, replace (u, v) by
    (u, w) with w drawn uniformly from the nodes that are neither u nor
    a current neighbour of u. Disconnected results are discarded and the
    construction retried on the next seed substream.

    Deterministic: identical params (including seed) give an identical
    adjacency.
    """
    graph_key = derive_key(params.seed, DOMAIN_GRAPH)
    for attempt in range(CONNECTIVITY_RETRY_BUDGET):
        stream = CounterStream(derive_key(graph_key, attempt))
        indptr, indices = _attempt_generation(params, stream)
        if _connected(params.n, indptr, indices):
            return Graph(n=params.n, indptr=indptr, indices=indices, params=params)
    raise GenerationError(
        f"no connected graph after {CONNECTIVITY_RETRY_BUDGET} attempts "
        f"for n={params.n}, k={params.k}, p={params.p}, seed={params.seed}"
    )


def degree_histogram(g: Graph) -> DegreeHistogram:
    """Histogram over all node degrees; the weighted mean is exactly k."""
    counts = np.bincount(g.degrees)
    nonzero = np.flatnonzero(counts)
    return DegreeHistogram(
        counts={int(d): int(counts[d]) for d in nonzero}, n=g.n
    )


def _as_node_array(g: Graph, nodes, what: str) -> np.ndarray:
    arr = np.asarray(sorted(nodes) if isinstance(nodes, (set, frozenset)) else nodes,
                     dtype=np.int64)
    if arr.ndim != 1 or arr.size == 0:
        raise ParameterError(f"{what} must be a nonempty set of node ids")
    if arr.min() < 0 or arr.max() >= g.n:
        raise ParameterError(f"{what} contains node ids outside [0, {g.n})")
    if np.unique(arr).size != arr.size:
        raise ParameterError(f"{what} contains duplicate node ids")
    return arr


def mean_degree_of(g: Graph, nodes) -> float:
    """Arithmetic mean degree over a nonempty node subset."""
    idx = _as_node_array(g, nodes, "nodes")
    return float(g.degrees[idx].mean())


def partition_by_treatment(g: Graph, treatment) -> GroupPartition:
    """Split all nodes into treatment / neighbours-of-treatment / rest."""
    t_idx = _as_node_array(g, treatment, "treatment")
    t_mask = np.zeros(g.n, dtype=bool)
    t_mask[t_idx] = True
    touched = (g.to_csr() @ t_mask.astype(np.float64)) > 0
    nb_mask = touched & ~t_mask
    rest_mask = ~t_mask & ~nb_mask
    return GroupPartition(
        treatment=np.sort(t_idx),
        neighbours=np.flatnonzero(nb_mask).astype(np.int64),
        rest=np.flatnonzero(rest_mask).astype(np.int64),
    )


def within_group_edge_fraction(g: Graph, group) -> float:
    """Fraction of (group node, neighbour) incidences staying inside the group."""
    idx = _as_node_array(g, group, "group")
    mask = np.zeros(g.n, dtype=bool)
    mask[idx] = True
    inside = g.to_csr() @ mask.astype(np.float64)
    numer = float(inside[mask].sum())
    denom = float(g.degrees[idx].sum())
    if denom == 0.0:
        return 0.0
    return numer / denom


def format_edge_list(g: Graph) -> str:
    """Edge-list text format: header plus one "u v" line per edge, u < v."""
    p = g.params
    if p is None:
        header = f"# n={g.n}"
    else:
        header = f"# n={p.n} k={p.k} p={p.p:g} seed={p.seed}"
    u, v = g.edges()
    lines = [header]
    lines.extend(f"{a} {b}" for a, b in zip(u.tolist(), v.tolist()))
    return "\n".join(lines) + "\n"


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_edge_list(g))
