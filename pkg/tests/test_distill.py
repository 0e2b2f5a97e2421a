import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topofault.distill import (
    CODES,
    CssCode,
    SWEEP_HEADER,
    DistillResult,
    avg_y_states,
    distill_threshold,
    encoded_x_supports,
    exact_distillation,
    input_error_constant,
    rm15,
    simulate_distillation,
    steane7,
    sweep_csv,
    transversal_conditions,
    undetected_logical_count,
)


def label_oracle(bits: int, w: int) -> int:
    """Odd-weight patterns passing all X checks when qubit j carries the label j in binary.

    Both codes have the labels 1..2^bits - 1 as columns of their X check matrix.
    """
    labels = range(1, 2**bits)
    count = 0
    for combo in itertools.combinations(labels, w):
        x = 0
        for j in combo:
            x ^= j
        count += x == 0 and w % 2 == 1
    return count


def test_code_parameters():
    a, y = rm15(), steane7()
    assert (a.n, a.k, len(a.x_stabilizers), len(a.z_stabilizers)) == (15, 1, 4, 10)
    assert (y.n, y.k, len(y.x_stabilizers), len(y.z_stabilizers)) == (7, 1, 3, 3)
    for code in (a, y):
        assert not ((code.hx.astype(int) @ code.hz.T) % 2).any()
        assert code.z_distance() == code.d == 3


def test_logicals_commute_with_stabilizers():
    for code in (rm15(), steane7()):
        lz = np.zeros(code.n, dtype=np.int64)
        lz[list(code.logical_z)] = 1
        assert not ((code.hx.astype(int) @ lz) % 2).any()
        assert not ((code.hz.astype(int) @ code.lx) % 2).any()
        assert int(code.lx.astype(int) @ lz) % 2 == 1


@pytest.mark.parametrize("name,bits,expected", [("rm15", 4, 35), ("steane7", 3, 7)])
def test_undetected_counts(name, bits, expected):
    code = CODES[name]()
    assert undetected_logical_count(code, 1) == 0
    assert undetected_logical_count(code, 2) == 0
    assert undetected_logical_count(code, 3) == expected == label_oracle(bits, 3)
    for w in range(4, 8):
        assert undetected_logical_count(code, w) == label_oracle(bits, w)


def test_transversality():
    assert transversal_conditions(rm15())
    assert not transversal_conditions(steane7())


def test_zero_input_error():
    r = simulate_distillation(rm15(), 0.0, 1000, seed=1)
    assert r.accept_prob == 1.0 and r.eps_out == 0.0
    assert exact_distillation(rm15(), Fraction(0)) == (1, 0)


def test_counting_sanity():
    r = simulate_distillation(steane7(), 0.05, 20_000, seed=2)
    rejected = r.trials - r.accepted
    assert r.accepted + rejected == r.trials
    assert r.accept_prob == pytest.approx(r.accepted / r.trials)


def test_exact_rational_leading_term():
    eps = Fraction(1, 1000)
    acc, out = exact_distillation(rm15(), eps)
    assert isinstance(out, Fraction)
    assert out == pytest.approx(35 * float(eps) ** 3, rel=0.05)


@pytest.mark.parametrize("code", [rm15(), steane7()], ids=["rm15", "steane7"])
def test_coefficient_slope(code):
    eps = np.geomspace(1e-3, 1e-2, 6)
    out = [exact_distillation(code, float(e))[1] for e in eps]
    assert np.polyfit(np.log(eps), np.log(out), 1)[0] == pytest.approx(3.0, abs=0.1)


def test_rm15_monte_carlo_at_one_percent():
    r = simulate_distillation(rm15(), 0.01, 2_000_000, seed=3)
    acc4, out4 = exact_distillation(rm15(), 0.01, max_weight=4)
    assert r.eps_out == pytest.approx(35e-6, rel=0.30)
    assert abs(r.eps_out - out4) < 3 * r.eps_out_sigma
    assert r.accept_prob == pytest.approx(1 - 15 * 0.01, abs=0.02)


def test_steane7_monte_carlo():
    r = simulate_distillation(steane7(), 0.02, 2_000_000, seed=4)
    assert abs(r.eps_out - 7 * 0.02**3) < 3 * r.eps_out_sigma


@pytest.mark.parametrize("eps", [0.005, 0.01, 0.02])
@pytest.mark.parametrize("code", [rm15(), steane7()], ids=["rm15", "steane7"])
def test_monte_carlo_matches_truncated_enumeration(code, eps):
    r = simulate_distillation(code, eps, 1_000_000, seed=int(eps * 1000))
    _, exact4 = exact_distillation(code, eps, max_weight=4)
    assert abs(r.eps_out - exact4) < 3 * r.eps_out_sigma


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-4, 0.02))
def test_truncation_is_a_good_approximation(eps):
    for code in (rm15(), steane7()):
        full = exact_distillation(code, eps)[1]
        trunc = exact_distillation(code, eps, max_weight=4)[1]
        assert trunc <= full * (1 + 1e-12)
        assert trunc == pytest.approx(full, rel=0.05)


def test_thresholds():
    assert distill_threshold(35, 6) == pytest.approx(1 / (6 * math.sqrt(35)), rel=1e-6)
    assert distill_threshold(7, 6) == pytest.approx(1 / (6 * math.sqrt(7)), rel=1e-6)
    assert distill_threshold(35, 6) == pytest.approx(2.8e-2, abs=0.05e-2)
    assert distill_threshold(7, 6) == pytest.approx(6.3e-2, abs=0.05e-2)
    assert distill_threshold(35, input_error_constant(False)) > distill_threshold(35, 6)
    with pytest.raises(ValueError):
        distill_threshold(1, 6)


def test_y_budget():
    assert len(np.unique(encoded_x_supports(rm15()), axis=0)) == 32
    assert avg_y_states() == Fraction(1705, 512)
    assert avg_y_states(minimise=False) == Fraction(15, 2)


def test_invalid_inputs_and_csv():
    with pytest.raises(ValueError):
        simulate_distillation(rm15(), 0.5, 10, seed=1)
    with pytest.raises(ValueError):
        DistillResult(1.2, 0.0, 10)
    with pytest.raises(ValueError):
        CssCode("bad", 3, 1, 1, (frozenset({0, 1}),), (frozenset({1, 2}),), frozenset({0}), frozenset({0}))
    text = sweep_csv([("rm15", 0.01, DistillResult(0.86, 3.6e-5, 100, 86, 0))])
    assert text.splitlines()[0].split(",") == SWEEP_HEADER
