from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topofault.topo import (
    RULES,
    Braid,
    Color,
    EventWord,
    MalformedWordError,
    MeasZ,
    PrepX,
    PrepZ,
    StabLoop,
    channel_of,
    cnot_channel,
    equivalence_search,
    equivalent,
    identity_channel,
    parse_word,
    parse_words,
    rewrite,
    same_diagram,
    swap_channel,
    word,
)
from topofault.topo.events import Meas, Prep
from topofault.topo.library import (
    bare,
    cnot_word,
    cnot_zero_control_word,
    double_braid,
    swap_word,
    triple_cnot_word,
    with_stab_loop,
    zero_and_identity_word,
)
from topofault.topo.rewrite import RULES_BY_NAME, RewriteRule, is_normal

from wordgen import plant, random_word

WORDS = Path(__file__).resolve().parents[1] / "words"
P, D = Color.PRIMAL, Color.DUAL


# -- dense state-vector oracle ---------------------------------------------------


class StateVector:
    """Choi state of a word by direct simulation, one named qubit per tensor axis."""

    def __init__(self) -> None:
        self.names: list = []
        self.psi = np.ones((), dtype=complex)

    def add(self, name, basis: str) -> None:
        v = np.array([1, 0], dtype=complex) if basis == "Z" else np.array([1, 1], dtype=complex) / np.sqrt(2)
        self.psi = np.multiply.outer(self.psi, v)
        self.names.append(name)

    def bell(self, a, b) -> None:
        self.psi = np.multiply.outer(self.psi, np.eye(2, dtype=complex) / np.sqrt(2))
        self.names += [a, b]

    def cnot(self, c, t) -> None:
        i, j = self.names.index(c), self.names.index(t)
        psi = self.psi.copy()
        sl = [slice(None)] * psi.ndim
        sl[i] = 1
        block = psi[tuple(sl)]
        jj = j - (j > i)
        psi[tuple(sl)] = np.flip(block, axis=jj)
        self.psi = psi

    def measure(self, q, basis: str) -> None:
        i = self.names.index(q)
        psi = np.moveaxis(self.psi, i, 0)
        if basis == "X":
            psi = np.tensordot(np.array([[1, 1], [1, -1]]) / np.sqrt(2), psi, axes=(1, 0))
        branch = psi[0] if np.linalg.norm(psi[0]) > 1e-9 else psi[1]
        self.psi = branch / np.linalg.norm(branch)
        self.names.pop(i)

    def expectation(self, ops: dict) -> complex:
        mats = {"X": np.array([[0, 1], [1, 0]]), "Z": np.diag([1, -1]), "Y": np.array([[0, -1j], [1j, 0]])}
        phi = self.psi
        for q, p in ops.items():
            i = self.names.index(q)
            phi = np.moveaxis(np.tensordot(mats[p], phi, axes=(1, i)), 0, i)
        return np.vdot(self.psi, phi)


def simulate(w: EventWord) -> StateVector:
    sv = StateVector()
    for q in w.inputs:
        sv.bell(("ref", q), q)
    for ev in w.events:
        if isinstance(ev, Prep):
            sv.add(ev.q, ev.basis)
        elif isinstance(ev, Braid):
            sv.cnot(ev.dual, ev.primal)
        elif isinstance(ev, Meas):
            sv.measure(ev.q, ev.basis)
    return sv


def assert_channel_matches_simulation(w: EventWord) -> None:
    ch = channel_of(w)
    sv = simulate(w)
    names = [("ref", q) for q in ch.inputs] + list(ch.outputs)
    n = len(names)
    assert len(ch.stabilizers) == n
    for row in ch.stabilizers:
        ops = {}
        for i, q in enumerate(names):
            x, z = int(row[i]), int(row[n + i])
            if x or z:
                ops[q] = "Y" if x and z else "X" if x else "Z"
        assert abs(sv.expectation(ops)) == pytest.approx(1.0, abs=1e-9)


# -- events ----------------------------------------------------------------------


def test_malformed_words_are_rejected():
    with pytest.raises(MalformedWordError):
        word([MeasZ("p"), Braid("d", "p")])
    with pytest.raises(MalformedWordError):
        EventWord((("p", P), ("q", P)), (Braid("p", "q"),))
    with pytest.raises(MalformedWordError):
        word([Braid("d", "p"), PrepZ("p")])
    with pytest.raises(MalformedWordError):
        EventWord((("p", P),), (StabLoop(D, "p"),))
    with pytest.raises(MalformedWordError):
        parse_word("braid d\n")
    with pytest.raises(MalformedWordError, match="line 2"):
        parse_word("prepZ a\nfrobnicate a\n")


def test_parse_round_trip():
    w = cnot_word()
    back = parse_word(w.to_text())
    assert back.events == w.events and set(back.registers) == set(w.registers)
    assert w.inputs == ("c", "t") and w.outputs == ("c2", "t")
    assert w.is_internal("a") and not w.is_internal("c")


def test_word_files_parse():
    for path in sorted(WORDS.glob("*.topo")):
        words = parse_words(path.read_text())
        assert 1 <= len(words) <= 2


# -- semantics -------------------------------------------------------------------


def test_braid_symplectic_matrix():
    s = channel_of(word([Braid("d", "p")])).symplectic()
    assert s.tolist() == [[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 1, 1]]


def test_channel_examples():
    assert channel_of(cnot_word()) == cnot_channel("c", "t", "c2")
    assert channel_of(cnot_word()).is_unitary
    assert channel_of(swap_word()) == swap_channel("a", "b", "a2", "b1")
    assert channel_of(bare(("p", P))) == identity_channel("p")
    assert equivalent(double_braid(), bare(("d", D), ("p", P)))
    assert equivalent(with_stab_loop(cnot_word(), "t"), cnot_word())
    assert equivalent(cnot_zero_control_word(), zero_and_identity_word())
    assert equivalent(triple_cnot_word(), swap_word())
    assert not equivalent(word([Braid("d", "p")]), bare(("d", D), ("p", P)))
    ok, msg = equivalent(cnot_word(), bare(("c", P)), explain=True)
    assert not ok and "signature" in msg


def test_braids_commute():
    a = word([Braid("d", "p"), Braid("e", "p"), Braid("d", "q")])
    b = word([Braid("d", "q"), Braid("d", "p"), Braid("e", "p")])
    assert equivalent(a, b)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_channel_matches_dense_simulation(seed):
    assert_channel_matches_simulation(random_word(np.random.default_rng(seed), max_regs=3))


def test_library_channels_match_dense_simulation():
    for w in (cnot_word(), cnot_zero_control_word(), swap_word(), triple_cnot_word()):
        assert_channel_matches_simulation(w)


# -- rewriting -------------------------------------------------------------------


def test_rewrite_removes_double_monodromy_and_stab_loops():
    r = rewrite(double_braid())
    assert r.status == "fixpoint" and r.word.events == ()
    assert [s.rule for s in r.trace] == ["DoubleMonodromy"]
    r = rewrite(with_stab_loop(cnot_word(), "t", 3))
    assert r.trace[0].rule == "StabLoopRemoval" and same_diagram(r.word, cnot_word())


def test_rewrite_cnot_with_zero_control():
    r = rewrite(cnot_zero_control_word())
    assert r.status == "fixpoint" and len(r.trace) <= 4
    assert same_diagram(r.word, zero_and_identity_word())
    assert r.format_trace().startswith("1. PointRemoval")


def test_rewrite_triple_cnot_to_swap():
    r = rewrite(triple_cnot_word())
    assert r.status == "fixpoint" and len(r.trace) <= 32
    assert same_diagram(r.word, swap_word())
    assert equivalent(r.word, swap_word())


def test_rewrite_budget():
    r = rewrite(triple_cnot_word(), max_steps=2)
    assert r.status == "budget" and len(r.trace) == 2
    with pytest.raises(ValueError):
        rewrite(cnot_word(), max_steps=-1)


def test_search_examples():
    s = equivalence_search(cnot_word(), cnot_word())
    assert s.found and s.length == 0 and s.semantically_equal
    s = equivalence_search(double_braid(), bare(("d", D), ("p", P)))
    assert s.found and s.length == 1 and s.forward[0].rule == "DoubleMonodromy"
    s = equivalence_search(word([Braid("d", "p")]), bare(("d", D), ("p", P)))
    assert not s.found and not s.semantically_equal
    s = equivalence_search(triple_cnot_word(), swap_word(), depth=12)
    assert s.found and s.semantically_equal and s.length <= 12


def test_search_reports_semantic_truth_when_rules_run_out():
    # equal channels, but no rule applies to an open strand prepared off its native basis
    w1 = word([PrepX("p"), Braid("d", "p")])
    w2 = word([PrepX("p")], dual=["d"])
    s = equivalence_search(w1, w2, depth=4)
    assert s.semantically_equal and not s.found


@pytest.mark.parametrize("name", [r.name for r in RULES])
@settings(max_examples=1000, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_rule_soundness(name, seed):
    rule = RULES_BY_NAME[name]
    w = plant(name, np.random.default_rng(seed))
    sites = rule.sites(w)
    assert sites
    for site in sites:
        out = rule.apply(w, site)
        assert equivalent(w, out), f"{name} at {site}:\n{w.to_text()}"
        if name != "ReidII_III" and is_normal(w):
            assert is_normal(out)


def test_soundness_check_catches_a_bad_rule():
    # dropping one braid is not a valid move; the checker must notice on random words
    drop_one = RewriteRule(
        "DropBraid",
        lambda w: [i for i, e in enumerate(w.events) if isinstance(e, Braid)],
        lambda w, i: EventWord(w.registers, w.events[:i] + w.events[i + 1 :]),
    )
    caught = 0
    for seed in range(200):
        w = random_word(np.random.default_rng(seed))
        caught += any(not equivalent(w, drop_one.apply(w, s)) for s in drop_one.sites(w))
    assert caught > 100
