"""Minimum-weight matching decoder for one lattice.

Two routes share the same check graph.  The reference route computes all
defect-pair shortest paths and runs an exact blossom matching, keeping a
witness path per pair so the correction chain can be rebuilt.  The batch
route hands the same weighted graph to PyMatching and only returns the
predicted homology flip, which is all the Monte Carlo needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx
import numpy as np
import pymatching
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .lattice import Chain, Lattice3D, boundary, edge_crossing_matrix, homology_class
from .noise import EdgeLayout, EffectiveEdgeNoise, edge_layout, edge_probabilities

# Cost of an edge that can never flip.  Large enough to dominate any path on
# desk-scale lattices, finite so the matcher still sees a complete graph.
SENTINEL_WEIGHT = 1.0e6
# csgraph drops explicit zeros, so p = 1/2 edges keep a tiny positive cost
_MIN_WEIGHT = 1.0e-9


def edge_weight(p: float | np.ndarray) -> np.ndarray:
    """ln((1-p)/p) with p capped at 1/2 and p = 0 mapped to the sentinel."""
    p = np.minimum(np.asarray(p, dtype=float), 0.5)
    with np.errstate(divide="ignore"):
        w = np.where(p > 0, np.log((1.0 - p) / np.where(p > 0, p, 1.0)), SENTINEL_WEIGHT)
    return np.maximum(w, _MIN_WEIGHT)


@dataclass(frozen=True)
class Syndrome:
    """Violated checks: the endpoints of the error chain.

    Each vertex of one lattice is an elementary cell of the other, so these
    are the closed check surfaces with odd parity.
    """

    defects: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.defects)


def extract_syndrome(lattice: Lattice3D, error: Chain) -> Syndrome:
    if error.dim != 1:
        raise ValueError("syndromes are defined for 1-chains")
    return Syndrome(tuple(int(i) for i in boundary(lattice, error).ids))


@dataclass(frozen=True)
class CheckGraph:
    """Weighted vertex graph with one entry per distinct vertex pair.

    ``supports[k]`` lists the edge positions (into ``layout.edges``) flipped
    by taking graph edge ``k``: a single lattice edge, or the two edges of a
    correlated pair for a diagonal.
    """

    layout: EdgeLayout
    u: np.ndarray
    v: np.ndarray
    weight: np.ndarray
    supports: tuple[tuple[int, ...], ...]
    csgraph: sp.csr_matrix = field(repr=False)
    index: dict = field(repr=False)


def build_check_graph(lattice: Lattice3D, eff: EffectiveEdgeNoise) -> CheckGraph:
    layout = edge_layout(lattice, eff.corr_pairs)
    best: dict[tuple[int, int], tuple[float, tuple[int, ...]]] = {}

    def offer(a: int, b: int, w: float, support: tuple[int, ...]) -> None:
        if a == b:
            return
        key = (a, b) if a < b else (b, a)
        if key not in best or w < best[key][0]:
            best[key] = (w, support)

    single = edge_weight(edge_probabilities(layout, eff))
    for k, (a, b) in enumerate(layout.endpoints):
        offer(int(a), int(b), float(single[k]), (k,))
    if eff.has_correlations:
        w_corr = float(edge_weight(eff.p_corr))
        for ia, ib in layout.pairs:
            for ea, eb in zip(ia, ib):
                ends = set(layout.endpoints[ea].tolist()) ^ set(layout.endpoints[eb].tolist())
                if len(ends) == 2:
                    a, b = sorted(ends)
                    offer(a, b, w_corr, (int(ea), int(eb)))

    keys = sorted(best)
    u = np.array([k[0] for k in keys], dtype=np.int64)
    v = np.array([k[1] for k in keys], dtype=np.int64)
    weight = np.array([best[k][0] for k in keys])
    supports = tuple(best[k][1] for k in keys)
    n = layout.n_vertices
    csgraph = sp.csr_matrix((weight, (u, v)), shape=(n, n))
    return CheckGraph(layout, u, v, weight, supports, csgraph, {k: i for i, k in enumerate(keys)})


@dataclass(frozen=True)
class MatchingGraph:
    """Complete graph on the defects with shortest-path distances.

    ``predecessors`` (one row per node, from Dijkstra) is the witness that
    lets the correction chain be rebuilt; it is absent for hand-made graphs.
    """

    nodes: tuple[int, ...]
    weights: np.ndarray
    predecessors: np.ndarray | None = field(default=None, repr=False)
    check_graph: CheckGraph | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.nodes), len(self.nodes)):
            raise ValueError("weight matrix does not match the node list")
        if not np.allclose(w, w.T):
            raise ValueError("weights must be symmetric")
        object.__setattr__(self, "weights", w)

    def witness_path(self, i: int, j: int) -> list[int]:
        """Check-graph edge indices on the recorded shortest path from node i to node j."""
        if self.predecessors is None or self.check_graph is None:
            raise ValueError("graph carries no witness paths")
        g = self.check_graph
        pos = {int(x): k for k, x in enumerate(g.layout.vertices)}
        src, dst = pos[self.nodes[i]], pos[self.nodes[j]]
        pred = self.predecessors[i]
        out = []
        cur = dst
        while cur != src:
            prev = int(pred[cur])
            if prev < 0:
                raise ValueError("no path between defects")
            out.append(g.index[(prev, cur) if prev < cur else (cur, prev)])
            cur = prev
        return out[::-1]


def build_matching_graph(
    lattice: Lattice3D, syndrome: Syndrome, eff: EffectiveEdgeNoise, check_graph: CheckGraph | None = None
) -> MatchingGraph:
    if len(syndrome) % 2:
        raise ValueError("a syndrome on a closed lattice has even size")
    g = check_graph if check_graph is not None else build_check_graph(lattice, eff)
    if not syndrome.defects:
        return MatchingGraph((), np.zeros((0, 0)), np.zeros((0, g.layout.n_vertices), dtype=np.int32), g)
    idx = np.searchsorted(g.layout.vertices, np.array(syndrome.defects))
    dist, pred = dijkstra(g.csgraph, directed=False, indices=idx, return_predecessors=True)
    weights = dist[:, idx]
    weights = 0.5 * (weights + weights.T)
    return MatchingGraph(syndrome.defects, weights, pred, g)


def mwpm(graph: MatchingGraph) -> list[tuple[int, int]]:
    """Exact minimum-weight perfect matching, as pairs of node indices.

    Nodes are inserted in index order so ties resolve the same way on every
    run.
    """
    n = len(graph.nodes)
    if n % 2:
        raise ValueError("perfect matching needs an even number of nodes")
    if n == 0:
        return []
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            g.add_edge(i, j, weight=float(graph.weights[i, j]))
    pairs = nx.min_weight_matching(g)
    return sorted(tuple(sorted(p)) for p in pairs)


def matching_weight(graph: MatchingGraph, pairs: list[tuple[int, int]]) -> float:
    return float(sum(graph.weights[i, j] for i, j in pairs))


@dataclass(frozen=True)
class DecodeOutcome:
    correction: Chain
    residual_class: tuple[int, int, int]
    success: bool
    syndrome: Syndrome | None = None
    pairing: tuple[tuple[int, int], ...] = ()
    weight: float = 0.0

    def dump(self) -> str:
        lines = [f"syndrome {' '.join(map(str, self.syndrome.defects)) if self.syndrome else ''}".rstrip()]
        nodes = self.syndrome.defects if self.syndrome else ()
        lines += [f"match {nodes[i]} {nodes[j]}" for i, j in self.pairing]
        lines.append("residual {} {} {}".format(*self.residual_class))
        return "\n".join(lines)


def decode(
    lattice: Lattice3D, error: Chain, eff: EffectiveEdgeNoise, check_graph: CheckGraph | None = None
) -> DecodeOutcome:
    syndrome = extract_syndrome(lattice, error)
    graph = build_matching_graph(lattice, syndrome, eff, check_graph)
    pairs = mwpm(graph)
    g = graph.check_graph
    flips = np.zeros(g.layout.n_edges, dtype=bool)
    for i, j in pairs:
        for k in graph.witness_path(i, j):
            flips[list(g.supports[k])] ^= True
    bits = np.zeros(lattice.n_cells, dtype=bool)
    bits[g.layout.edges[flips]] = True
    correction = Chain(lattice, 1, bits)
    residual = homology_class(lattice, error + correction)
    return DecodeOutcome(correction, residual, residual == (0, 0, 0), syndrome, tuple(pairs), matching_weight(graph, pairs))


class BatchDecoder:
    """PyMatching over the same check graph, returning homology flips only.

    Each graph edge carries the crossing parities of the lattice edges it
    flips as observables, so the decoder predicts the homology class of
    the correction directly.
    """

    def __init__(self, lattice: Lattice3D, eff: EffectiveEdgeNoise):
        self.lattice = lattice
        self.eff = eff
        self.check_graph = g = build_check_graph(lattice, eff)
        self.crossing = edge_crossing_matrix(lattice).T.astype(np.uint8)  # (n_edges, 3)
        m = pymatching.Matching()
        for k in range(len(g.weight)):
            obs = np.bitwise_xor.reduce(self.crossing[list(g.supports[k])], axis=0)
            m.add_edge(
                int(g.u[k]),
                int(g.v[k]),
                fault_ids={a for a in range(3) if obs[a]},
                weight=float(g.weight[k]),
                merge_strategy="smallest-weight",
            )
        self.matching = m
        self.boundary = g.layout.endpoints
        self._edge_matching = None

    def syndromes(self, flips: np.ndarray) -> np.ndarray:
        """(shots, n_vertices) parity of flipped edges at each vertex."""
        n = self.check_graph.layout.n_vertices
        out = np.zeros((flips.shape[0], n), dtype=np.uint8)
        shot, edge = np.nonzero(flips)
        for side in range(2):
            np.add.at(out, (shot, self.boundary[edge, side]), 1)
        return out & 1

    def error_classes(self, flips: np.ndarray) -> np.ndarray:
        return (flips.astype(np.uint8) @ self.crossing) & 1

    def residual_classes(self, flips: np.ndarray) -> np.ndarray:
        """(shots, 3) homology class of error plus correction."""
        predicted = self.matching.decode_batch(self.syndromes(flips))
        return self.error_classes(flips) ^ predicted.astype(np.uint8)

    def corrections(self, flips: np.ndarray) -> np.ndarray:
        """(shots, n_edges) correction chains, from a matcher that reports graph edges."""
        if self._edge_matching is None:
            g = self.check_graph
            m = pymatching.Matching()
            for k in range(len(g.weight)):
                m.add_edge(int(g.u[k]), int(g.v[k]), fault_ids={k}, weight=float(g.weight[k]), merge_strategy="smallest-weight")
            support = np.zeros((len(g.weight), g.layout.n_edges), dtype=np.uint8)
            for k, sup in enumerate(g.supports):
                support[k, list(sup)] ^= 1
            self._edge_matching, self._support = m, support
        used = self._edge_matching.decode_batch(self.syndromes(flips))
        return ((used.astype(np.int64) @ self._support) & 1).astype(bool)

    def decode_weights(self, flips: np.ndarray) -> np.ndarray:
        _, weights = self.matching.decode_batch(self.syndromes(flips), return_weights=True)
        return weights
