"""Rewrite rules of the topological calculus on event words.

Braids always pair a dual control with a primal target, so all braids
commute and only their parity per register pair matters.  Reading a dual
strand as a Z-spider and a primal strand as an X-spider, with one edge per
odd braid pair, the rules below are spider fusion, copy, Hopf and
bialgebra moves on that graph.  A strand is *internal* when it is
prepared and measured in the basis native to its color; only internal
strands may disappear.

Every rule except ``ReidII_III`` expects the normal order
preparations | braids and stab loops | measurements, which ``ReidII_III``
produces.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable

import networkx as nx

from .channel import equivalent
from .events import Braid, Color, EventWord, Meas, MeasX, MeasZ, Prep, PrepX, PrepZ, StabLoop


def is_normal(w: EventWord) -> bool:
    stage = 0
    for ev in w.events:
        s = 0 if isinstance(ev, Prep) else 2 if isinstance(ev, Meas) else 1
        if s < stage:
            return False
        stage = s
    return True


def normal_form(w: EventWord) -> EventWord:
    preps = [e for e in w.events if isinstance(e, Prep)]
    mid = [e for e in w.events if isinstance(e, (Braid, StabLoop))]
    meas = [e for e in w.events if isinstance(e, Meas)]
    return EventWord(w.registers, tuple(preps + mid + meas))


def braid_counts(w: EventWord) -> Counter:
    return Counter((e.dual, e.primal) for e in w.braids())


def neighbours(w: EventWord) -> dict[str, list[str]]:
    """Opposite-color registers linked an odd number of times, in register order."""
    counts = braid_counts(w)
    order = {q: i for i, (q, _) in enumerate(w.registers)}
    out: dict[str, list[str]] = {q: [] for q, _ in w.registers}
    for (d, p), n in counts.items():
        if n % 2:
            out[d].append(p)
            out[p].append(d)
    for q in out:
        out[q].sort(key=order.__getitem__)
    return out


def _braid_events_of(w: EventWord, q: str) -> int:
    return sum(1 for e in w.braids() if q in (e.dual, e.primal))


def _drop_registers(w: EventWord, regs: Iterable[str], events: list | None = None) -> EventWord:
    regs = set(regs)
    events = list(w.events) if events is None else events
    kept = [e for e in events if not (isinstance(e, (Prep, Meas, StabLoop)) and e.q in regs)]
    kept = [e for e in kept if not (isinstance(e, Braid) and (e.dual in regs or e.primal in regs))]
    return EventWord(tuple(r for r in w.registers if r[0] not in regs), tuple(kept))


# -- rules ---------------------------------------------------------------------


@dataclass(frozen=True)
class RewriteRule:
    name: str
    sites: Callable[[EventWord], list]
    apply: Callable[[EventWord, object], EventWord]
    describe: Callable[[object], str] = field(default=lambda site: str(site))


def _reid_sites(w: EventWord) -> list:
    return [] if is_normal(w) else ["normalise"]


def _reid_apply(w: EventWord, site) -> EventWord:
    return normal_form(w)


def _stab_sites(w: EventWord) -> list:
    return [i for i, e in enumerate(w.events) if isinstance(e, StabLoop)]


def _stab_apply(w: EventWord, i: int) -> EventWord:
    return EventWord(w.registers, w.events[:i] + w.events[i + 1 :])


def _double_sites(w: EventWord) -> list:
    seen: dict[Braid, int] = {}
    out = []
    for i, e in enumerate(w.events):
        if isinstance(e, Braid):
            if e in seen:
                out.append((seen.pop(e), i))
            else:
                seen[e] = i
    return out


def _double_apply(w: EventWord, site: tuple[int, int]) -> EventWord:
    i, j = site
    return EventWord(w.registers, tuple(e for k, e in enumerate(w.events) if k not in (i, j)))


def _point_sites(w: EventWord) -> list:
    if not is_normal(w):
        return []
    nb = neighbours(w)
    out = []
    for q, _ in w.registers:
        if not w.is_internal(q):
            continue
        n_events = _braid_events_of(w, q)
        if n_events == 0:
            out.append((q,))
        elif n_events == 1 and len(nb[q]) == 1 and w.is_internal(nb[q][0]):
            out.append((q, nb[q][0]))
    return out


def _point_apply(w: EventWord, site: tuple[str, ...]) -> EventWord:
    # an isolated closed strand, or a one-legged strand copied through its
    # closed partner: both vanish together with every braid of the partner
    return _drop_registers(w, site)


def _crossing_sites(w: EventWord) -> list:
    if not is_normal(w):
        return []
    nb = neighbours(w)
    out = []
    for q, _ in w.registers:
        if not w.is_internal(q) or _braid_events_of(w, q) != 2 or len(nb[q]) != 2:
            continue
        t1, t2 = nb[q]
        internal = [w.is_internal(t1), w.is_internal(t2)]
        if not any(internal):
            continue
        keep, gone = (t1, t2) if internal[1] else (t2, t1)
        out.append((q, keep, gone))
    return out


def _crossing_apply(w: EventWord, site: tuple[str, str, str]) -> EventWord:
    s, keep, gone = site
    events = []
    for e in w.events:
        if isinstance(e, Braid) and gone in (e.dual, e.primal):
            e = Braid(keep, e.primal) if e.dual == gone else Braid(e.dual, keep)
        events.append(e)
    # the closed strand between two same-color strands is a plain wire
    return _drop_registers(w, (s, gone), events)


def _contraction_sites(w: EventWord) -> list:
    if not is_normal(w):
        return []
    nb = neighbours(w)
    duals = [q for q, c in w.registers if c is Color.DUAL]
    out, seen = [], set()
    for i, x1 in enumerate(duals):
        for x2 in duals[i + 1 :]:
            common = [p for p in nb[x1] if p in set(nb[x2])]
            if len(common) < 2:
                continue
            xs = tuple(x for x in duals if set(common) <= set(nb[x]))
            key = (xs, tuple(common))
            if key not in seen:
                seen.add(key)
                out.append(key)
    return out


def _contraction_apply(w: EventWord, site: tuple[tuple[str, ...], tuple[str, ...]]) -> EventWord:
    xs, ps = site
    new_p, new_d = w.fresh("jp"), w.fresh("jd")
    pairs = {(x, p) for x in xs for p in ps}
    preps = [e for e in w.events if isinstance(e, Prep)] + [PrepZ(new_p), PrepX(new_d)]
    mid = [e for e in w.events if isinstance(e, (Braid, StabLoop)) and not (isinstance(e, Braid) and (e.dual, e.primal) in pairs)]
    mid += [Braid(x, new_p) for x in xs] + [Braid(new_d, p) for p in ps] + [Braid(new_d, new_p)]
    meas = [e for e in w.events if isinstance(e, Meas)] + [MeasZ(new_p), MeasX(new_d)]
    regs = w.registers + ((new_p, Color.PRIMAL), (new_d, Color.DUAL))
    return EventWord(regs, tuple(preps + mid + meas))


REID = RewriteRule("ReidII_III", _reid_sites, _reid_apply, lambda s: "reorder to preparations | braids | measurements")
STAB_LOOP_REMOVAL = RewriteRule("StabLoopRemoval", _stab_sites, _stab_apply, lambda i: f"event {i}")
DOUBLE_MONODROMY = RewriteRule("DoubleMonodromy", _double_sites, _double_apply, lambda s: f"events {s[0]} and {s[1]}")
POINT_REMOVAL = RewriteRule("PointRemoval", _point_sites, _point_apply, lambda s: " ".join(s))
SAME_COLOR_CROSSING = RewriteRule(
    "SameColorCrossing", _crossing_sites, _crossing_apply, lambda s: f"{s[0]} fuses {s[2]} into {s[1]}"
)
LOOP_CONTRACTION = RewriteRule(
    "LoopContraction", _contraction_sites, _contraction_apply, lambda s: f"duals {','.join(s[0])} x primals {','.join(s[1])}"
)

# cancellations first, then reordering, fusion, and finally the junction move
RULES: tuple[RewriteRule, ...] = (
    STAB_LOOP_REMOVAL,
    DOUBLE_MONODROMY,
    REID,
    POINT_REMOVAL,
    SAME_COLOR_CROSSING,
    LOOP_CONTRACTION,
)
RULES_BY_NAME = {r.name: r for r in RULES}


@dataclass(frozen=True)
class Step:
    rule: str
    detail: str
    word: EventWord


@dataclass(frozen=True)
class RewriteResult:
    word: EventWord
    trace: tuple[Step, ...]
    status: str  # "fixpoint" or "budget"

    def format_trace(self) -> str:
        return "\n".join(f"{i}. {s.rule}: {s.detail}" for i, s in enumerate(self.trace, start=1))


def rewrite(w: EventWord, rules: Iterable[RewriteRule] = RULES, max_steps: int = 32) -> RewriteResult:
    if max_steps < 0:
        raise ValueError("max_steps must be nonnegative")
    rules = tuple(rules)
    trace: list[Step] = []
    while len(trace) < max_steps:
        for rule in rules:
            sites = rule.sites(w)
            if sites:
                w = rule.apply(w, sites[0])
                trace.append(Step(rule.name, rule.describe(sites[0]), w))
                break
        else:
            return RewriteResult(w, tuple(trace), "fixpoint")
    status = "fixpoint" if not any(r.sites(w) for r in rules) else "budget"
    return RewriteResult(w, tuple(trace), status)


# -- comparison up to renaming of closed strands --------------------------------


def strand_graph(w: EventWord) -> nx.Graph:
    """Registers as nodes, braid counts as edges.

    Open registers keep their names in the label; registers that are both
    prepared and measured are anonymous.
    """
    g = nx.Graph()
    inputs, outputs = set(w.inputs), set(w.outputs)
    loops = Counter(e.q for e in w.events if isinstance(e, StabLoop))
    for q, c in w.registers:
        p, m = w.prep_of(q), w.meas_of(q)
        head = f"in:{q}" if q in inputs else f"prep{p.basis}"
        tail = f"out:{q}" if q in outputs else f"meas{m.basis}"
        g.add_node(q, label=f"{c.value}|{head}|{tail}|{loops[q]}")
    for (d, p), n in braid_counts(w).items():
        g.add_edge(d, p, label=str(n))
    return g


def word_hash(w: EventWord) -> str:
    return nx.weisfeiler_lehman_graph_hash(strand_graph(normal_form(w)), node_attr="label", edge_attr="label")


def same_diagram(w1: EventWord, w2: EventWord) -> bool:
    g1, g2 = strand_graph(normal_form(w1)), strand_graph(normal_form(w2))
    match = lambda a, b: a["label"] == b["label"]
    return nx.is_isomorphic(g1, g2, node_match=match, edge_match=match)


# -- bounded search ------------------------------------------------------------


@dataclass(frozen=True)
class SearchResult:
    found: bool
    forward: tuple[Step, ...] = ()
    backward: tuple[Step, ...] = ()
    semantically_equal: bool = False

    @property
    def length(self) -> int:
        return len(self.forward) + len(self.backward)

    def format_trace(self) -> str:
        lines = [f"{i}. {s.rule}: {s.detail}" for i, s in enumerate(self.forward, start=1)]
        if self.backward:
            lines.append("-- from the second word:")
            lines += [f"{i}. {s.rule}: {s.detail}" for i, s in enumerate(self.backward, start=1)]
        return "\n".join(lines)


def _successors(w: EventWord, rules: tuple[RewriteRule, ...]):
    for rule in rules:
        for site in rule.sites(w):
            yield Step(rule.name, rule.describe(site), rule.apply(w, site))


def equivalence_search(w1: EventWord, w2: EventWord, depth: int = 8, rules: Iterable[RewriteRule] = RULES) -> SearchResult:
    """Bidirectional breadth-first search for a common rewrite descendant.

    Words are identified up to renaming of closed strands.  The result
    always reports the semantic verdict, which is the ground truth.
    """
    rules = tuple(rules)
    truth = bool(equivalent(w1, w2))
    if same_diagram(w1, w2):
        return SearchResult(True, semantically_equal=truth)
    # per side: hash -> list of (word, path)
    # diagrams are compared in normal order, so start both sides there
    starts = []
    for w in (w1, w2):
        path = () if is_normal(w) else (Step(REID.name, REID.describe(None), normal_form(w)),)
        starts.append((normal_form(w), path))
    sides = [{word_hash(w): [(w, path)]} for w, path in starts]
    frontiers = [[start] for start in starts]

    def meet(w, path, side):
        other = sides[1 - side]
        for ow, opath in other.get(word_hash(w), []):
            if same_diagram(w, ow):
                fwd, bwd = (path, opath) if side == 0 else (opath, path)
                return SearchResult(True, tuple(fwd), tuple(bwd), truth)
        return None

    hit = meet(*starts[0], 0)
    if hit:
        return hit
    levels = [0, 0]
    while levels[0] + levels[1] < depth and (frontiers[0] or frontiers[1]):
        # grow the cheaper side
        side = 0 if frontiers[0] and (not frontiers[1] or len(frontiers[0]) <= len(frontiers[1])) else 1
        levels[side] += 1
        nxt = []
        for w, path in frontiers[side]:
            for step in _successors(w, rules):
                h = word_hash(step.word)
                bucket = sides[side].setdefault(h, [])
                if any(same_diagram(step.word, ow) for ow, _ in bucket):
                    continue
                new_path = path + (step,)
                bucket.append((step.word, new_path))
                hit = meet(step.word, new_path, side)
                if hit:
                    if not truth:
                        raise AssertionError("rewrite derivation between inequivalent words")
                    return hit
                nxt.append((step.word, new_path))
        frontiers[side] = nxt
    return SearchResult(False, semantically_equal=truth)
