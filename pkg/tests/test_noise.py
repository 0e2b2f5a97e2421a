import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topofault.distill import input_error_constant
from topofault.lattice import TIME_AXIS, LatticeSpec, build_lattice
from topofault.noise import (
    DEFAULT_CORRELATED_PAIRS,
    EffectiveEdgeNoise,
    NoiseParams,
    compose_flip,
    compose_flips,
    edge_layout,
    effective_channels,
    iid_noise,
    sample_errors,
    sample_flips,
    substream,
)

prob = st.floats(0.0, 1.0, allow_nan=False)


def test_compose_flip_examples():
    assert compose_flip(0.0, 0.3) == 0.3
    assert compose_flip(0.5, 0.3) == 0.5
    assert compose_flip(0.1, 0.2) == pytest.approx(0.26, abs=1e-15)


def xor_oracle(*ps):
    """Flip probability of an odd number of independent flips, by enumeration."""
    total = 0.0
    for bits in np.ndindex(*(2,) * len(ps)):
        if sum(bits) % 2:
            total += math.prod(p if b else 1 - p for p, b in zip(ps, bits))
    return total


@settings(max_examples=300)
@given(prob, prob, prob)
def test_compose_flip_is_associative_and_commutative(p, q, r):
    assert compose_flip(p, q) == pytest.approx(compose_flip(q, p), abs=1e-12)
    assert compose_flip(compose_flip(p, q), r) == pytest.approx(compose_flip(p, compose_flip(q, r)), abs=1e-12)
    assert compose_flips(p, q, r) == pytest.approx(xor_oracle(p, q, r), abs=1e-12)


def test_zero_rates_give_zero_noise():
    eff = effective_channels(NoiseParams.uniform(0.0))
    assert (eff.p_timelike, eff.p_spacelike, eff.p_corr) == (0.0, 0.0, 0.0)


def test_two_qubit_only():
    p = 0.01
    eff = effective_channels(NoiseParams(0.0, 0.0, p, 0.0))
    a = 8 * p / 15
    assert eff.p_timelike == pytest.approx(2 * a - 2 * a * a, rel=1e-14)
    assert eff.p_spacelike == pytest.approx(xor_oracle(a, a, a), rel=1e-14)
    assert eff.p_corr == pytest.approx(a, rel=1e-14)


def test_uniform_regression_pins():
    # enumerated with xor_oracle at p = 7.5e-3: a = 4e-3, one-qubit terms 5e-3
    eff = effective_channels(NoiseParams.uniform(7.5e-3))
    assert eff.p_timelike == pytest.approx(0.0177594368, rel=1e-12)
    assert eff.p_spacelike == pytest.approx(0.0216173613056, rel=1e-12)
    assert eff.p_corr == pytest.approx(0.004, rel=1e-12)
    assert eff.p_timelike == pytest.approx(xor_oracle(0.004, 0.004, 0.005, 0.005), rel=1e-12)
    assert eff.p_spacelike == pytest.approx(xor_oracle(0.004, 0.004, 0.004, 0.005, 0.005), rel=1e-12)


@settings(max_examples=300)
@given(st.lists(st.floats(0.0, 0.1), min_size=4, max_size=4), st.integers(0, 3), st.floats(0.0, 0.05))
def test_effective_channels_monotone(rates, which, bump):
    lo = effective_channels(NoiseParams(*rates))
    up = list(rates)
    up[which] += bump
    hi = effective_channels(NoiseParams(*up))
    for name in ("p_timelike", "p_spacelike", "p_corr"):
        assert getattr(hi, name) >= getattr(lo, name) - 1e-15


def test_redundant_gate_flag_only_moves_input_constant():
    # removing the redundant gates touches only qubits next to defects
    on = effective_channels(NoiseParams.uniform(0.004, redundant_gates=True))
    off = effective_channels(NoiseParams.uniform(0.004, redundant_gates=False))
    assert on == off
    assert input_error_constant(True) == 6
    assert input_error_constant(False) == pytest.approx(68 / 15)


def test_iid_noise():
    assert iid_noise(0.0).p_timelike == 0.0 and not iid_noise(0.0).has_correlations
    eff = iid_noise(0.029)
    assert eff.p_timelike == eff.p_spacelike == 0.029
    with pytest.raises(ValueError):
        iid_noise(0.6)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        NoiseParams(-0.1, 0, 0, 0)
    with pytest.raises(ValueError):
        EffectiveEdgeNoise(0.1, 1.2)
    with pytest.raises(ValueError):
        EffectiveEdgeNoise(0.1, 0.1, 0.01, (((1, 0, 0), (5, 1, 0)),))


def test_correlated_pairs_share_a_corner_on_both_lattices():
    lat = build_lattice(LatticeSpec.cubic(3))
    layout = edge_layout(lat, DEFAULT_CORRELATED_PAIRS)
    for ia, ib in layout.pairs:
        for ea, eb in zip(ia, ib):
            assert len(set(layout.endpoints[ea]) & set(layout.endpoints[eb])) == 1


def test_zero_noise_samples_are_empty():
    lat = build_lattice(LatticeSpec.cubic(3))
    eff = effective_channels(NoiseParams.uniform(0.0))
    for k in range(5):
        s = sample_errors(lat, eff, substream(1, k))
        assert not s.primal_errors and not s.dual_errors


def test_certain_timelike_flips():
    lat = build_lattice(LatticeSpec.cubic(3))
    s = sample_errors(lat, EffectiveEdgeNoise(1.0, 0.0), substream(2))
    layout = edge_layout(lat)
    timelike = set(layout.edges[layout.axis == TIME_AXIS].tolist())
    assert set(s.primal_errors.ids.tolist()) == timelike
    assert set(s.dual_errors.ids.tolist()) == timelike


def test_marginal_flip_frequency():
    lat = build_lattice(LatticeSpec.cubic(2))
    layout = edge_layout(lat)
    flips = sample_flips(layout, EffectiveEdgeNoise(0.1, 0.0), substream(3), 100_000)
    k = int(np.flatnonzero(layout.axis == TIME_AXIS)[0])
    n = flips.shape[0]
    sigma = math.sqrt(0.1 * 0.9 / n)
    assert abs(flips[:, k].mean() - 0.1) < 3 * sigma
    assert not flips[:, layout.axis != TIME_AXIS].any()


def test_correlated_marginals():
    # one time-like and one space-like pair touch each z-edge: two joint events plus the single channel
    lat = build_lattice(LatticeSpec.cubic(2))
    eff = EffectiveEdgeNoise(0.02, 0.0, 0.05, DEFAULT_CORRELATED_PAIRS)
    layout = edge_layout(lat, eff.corr_pairs)
    flips = sample_flips(layout, eff, substream(4), 200_000)
    counts = np.zeros(layout.n_edges, dtype=int)
    for ia, ib in layout.pairs:
        np.add.at(counts, ia, 1)
        np.add.at(counts, ib, 1)
    for k in range(layout.n_edges):
        p_single = 0.02 if layout.axis[k] == TIME_AXIS else 0.0
        expected = compose_flips(p_single, *[0.05] * counts[k])
        sigma = math.sqrt(expected * (1 - expected) / flips.shape[0])
        assert abs(flips[:, k].mean() - expected) < 4 * sigma + 1e-12


def test_substreams_are_reproducible_and_distinct():
    a = substream(7, 1, 2).random(5)
    assert np.array_equal(a, substream(7, 1, 2).random(5))
    assert not np.array_equal(a, substream(7, 1, 3).random(5))
    assert not np.array_equal(a, substream(8, 1, 2).random(5))
