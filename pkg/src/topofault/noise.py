"""Error model reduced to Z-flips on the edges of the primal and dual lattices.

Every primitive error source (preparation, Hadamard, Λ(Z), measurement) is
a partially depolarizing channel.  Seen from the X-measurements in the bulk
only its Z component matters, which leaves independent flips on single
edges plus jointly flipped pairs of edges inside faces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .lattice import TIME_AXIS, Chain, Lattice3D

# Each entry is a pair of edge midpoints relative to the base vertex (0, 0, 0)
# of an elementary cell, on the doubled grid.  One pair per face orientation;
# both edges lie in the boundary of that face and share a corner, so the
# decoder can absorb the pair as one diagonal step.  The same table is used on
# the primal and the dual lattice.
DEFAULT_CORRELATED_PAIRS: tuple[tuple[tuple[int, int, int], tuple[int, int, int]], ...] = (
    ((1, 0, 0), (2, 1, 0)),  # xy face (horizontal)
    ((1, 0, 0), (2, 0, 1)),  # xz face (time-like)
    ((0, 1, 0), (0, 2, 1)),  # yz face (time-like)
)


def compose_flip(p: float, q: float) -> float:
    """Flip probability of two independent flips applied in sequence."""
    return p + q - 2.0 * p * q


def compose_flips(*ps: float) -> float:
    return reduce(compose_flip, ps, 0.0)


def _check_probability(name: str, value: float, upper: float = 1.0) -> None:
    if not 0.0 <= value <= upper:
        raise ValueError(f"{name} must lie in [0, {upper}], got {value}")


@dataclass(frozen=True)
class NoiseParams:
    p_P: float
    p_1: float
    p_2: float
    p_M: float
    redundant_gates: bool = True

    def __post_init__(self) -> None:
        for name in ("p_P", "p_1", "p_2", "p_M"):
            _check_probability(name, getattr(self, name))

    @classmethod
    def uniform(cls, p: float, redundant_gates: bool = True) -> "NoiseParams":
        return cls(p, p, p, p, redundant_gates)

    @property
    def is_uniform(self) -> bool:
        return self.p_P == self.p_1 == self.p_2 == self.p_M

    @property
    def p(self) -> float:
        """The single noise parameter; only meaningful for uniform noise."""
        if not self.is_uniform:
            raise ValueError("non-uniform noise has no single parameter")
        return self.p_2


@dataclass(frozen=True)
class EffectiveEdgeNoise:
    p_timelike: float
    p_spacelike: float
    p_corr: float = 0.0
    corr_pairs: tuple = ()

    def __post_init__(self) -> None:
        for name in ("p_timelike", "p_spacelike", "p_corr"):
            _check_probability(name, getattr(self, name))
        pairs = tuple((tuple(a), tuple(b)) for a, b in self.corr_pairs)
        for a, b in pairs:
            _validate_pair(a, b)
        object.__setattr__(self, "corr_pairs", pairs)

    @property
    def has_correlations(self) -> bool:
        return self.p_corr > 0 and bool(self.corr_pairs)

    def edge_probability(self, axis: int) -> float:
        return self.p_timelike if axis == TIME_AXIS else self.p_spacelike


def _validate_pair(a: tuple[int, ...], b: tuple[int, ...]) -> None:
    if len(a) != 3 or len(b) != 3:
        raise ValueError("pair offsets must be coordinate triples")
    if sum(v & 1 for v in a) != 1 or sum(v & 1 for v in b) != 1:
        raise ValueError(f"pair {a, b} does not consist of two edges")
    ends = lambda e: {tuple(e[k] + (s if k == ax else 0) for k in range(3))
                      for ax in range(3) if e[ax] & 1 for s in (-1, 1)}
    if not ends(a) & ends(b) or a == b:
        raise ValueError(f"edges {a} and {b} do not share a corner")


def effective_channels(params: NoiseParams, corr_pairs=DEFAULT_CORRELATED_PAIRS) -> EffectiveEdgeNoise:
    """Per-edge Z-flip rates for the full gate-level error model.

    A Λ(Z) error leaves a Z on a given qubit with probability 8/15 of its
    rate; one-qubit depolarizing errors (preparation, Hadamard, measurement)
    with probability 2/3.  Time-like edges collect two Λ(Z) factors plus
    preparation and measurement, space-like edges three Λ(Z) factors and two
    Hadamards.  Pairs flipped by a single Λ(Z) error occur at 8 p_2 / 15.
    """
    two = 8.0 * params.p_2 / 15.0
    one = 2.0 * params.p_1 / 3.0
    prep = 2.0 * params.p_P / 3.0
    meas = 2.0 * params.p_M / 3.0
    return EffectiveEdgeNoise(
        p_timelike=compose_flips(two, two, prep, meas),
        p_spacelike=compose_flips(two, two, two, one, one),
        p_corr=two,
        corr_pairs=tuple(corr_pairs),
    )


def iid_noise(p: float) -> EffectiveEdgeNoise:
    _check_probability("p", p, 0.5)
    return EffectiveEdgeNoise(p_timelike=p, p_spacelike=p)


@dataclass(frozen=True)
class ErrorSample:
    """Error chains on both lattices.

    The dual lattice is the primal one shifted by (1, 1, 1), so dual errors
    are stored as edges in that shifted frame; :func:`topofault.lattice.dual`
    maps them to the primal faces that carry them physically.
    """

    primal_errors: Chain
    dual_errors: Chain


@dataclass(frozen=True)
class EdgeLayout:
    """Edge indexing shared by the sampler and the decoders.

    ``edges`` holds the 1-cell ids in increasing order; everything else is
    expressed in positions into that array.
    """

    edges: np.ndarray
    axis: np.ndarray
    endpoints: np.ndarray  # (n_edges, 2) vertex positions
    vertices: np.ndarray
    pairs: tuple[tuple[np.ndarray, np.ndarray], ...] = field(default=())

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)


def edge_layout(lattice: Lattice3D, corr_pairs=()) -> EdgeLayout:
    edges = lattice.cell_ids(1)
    vertices = lattice.cell_ids(0)
    coords = lattice.coords[edges]
    axis = np.argmax(coords & 1, axis=1)
    lo = coords.copy()
    hi = coords.copy()
    rows = np.arange(len(edges))
    lo[rows, axis] -= 1
    hi[rows, axis] += 1
    endpoints = np.stack(
        [np.searchsorted(vertices, lattice.ids_of(lo)), np.searchsorted(vertices, lattice.ids_of(hi))], axis=1
    )
    pairs = []
    base = lattice.coords[vertices]
    for a, b in corr_pairs:
        ia = np.searchsorted(edges, lattice.ids_of(base + np.array(a)))
        ib = np.searchsorted(edges, lattice.ids_of(base + np.array(b)))
        pairs.append((ia, ib))
    return EdgeLayout(edges, axis, endpoints, vertices, tuple(pairs))


def edge_probabilities(layout: EdgeLayout, eff: EffectiveEdgeNoise) -> np.ndarray:
    return np.where(layout.axis == TIME_AXIS, eff.p_timelike, eff.p_spacelike)


def sample_flips(layout: EdgeLayout, eff: EffectiveEdgeNoise, rng: np.random.Generator, shots: int) -> np.ndarray:
    """(shots, n_edges) boolean flips for one lattice."""
    probs = edge_probabilities(layout, eff)
    flips = rng.random((shots, layout.n_edges)) < probs
    if eff.p_corr > 0:
        for ia, ib in layout.pairs:
            joint = rng.random((shots, len(ia))) < eff.p_corr
            # within one orientation every edge occurs at most once per column
            flips[:, ia] ^= joint
            flips[:, ib] ^= joint
    return flips


def sample_errors(lattice: Lattice3D, eff: EffectiveEdgeNoise, rng: np.random.Generator) -> ErrorSample:
    layout = edge_layout(lattice, eff.corr_pairs)
    chains = []
    for _ in range(2):
        flips = sample_flips(layout, eff, rng, 1)[0]
        bits = np.zeros(lattice.n_cells, dtype=bool)
        bits[layout.edges[flips]] = True
        chains.append(Chain(lattice, 1, bits))
    return ErrorSample(*chains)


def substream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for one independent unit of work.

    The stream depends only on ``seed`` and ``key``, never on scheduling,
    so parallel and serial runs draw identical numbers.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
