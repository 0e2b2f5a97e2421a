"""Event words: topological circuits as sequences of defect events.

Each register is a logical qubit carried by a primal or dual defect.  A
register that is never prepared is an input, one that is never measured is
an output.  A braid moves a dual defect around a primal one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Union


class Color(str, enum.Enum):
    PRIMAL = "primal"
    DUAL = "dual"

    @property
    def other(self) -> "Color":
        return Color.DUAL if self is Color.PRIMAL else Color.PRIMAL


class MalformedWordError(ValueError):
    pass


@dataclass(frozen=True)
class Prep:
    basis: str
    q: str

    def __str__(self) -> str:
        return f"prep{self.basis} {self.q}"


@dataclass(frozen=True)
class Meas:
    basis: str
    q: str

    def __str__(self) -> str:
        return f"meas{self.basis} {self.q}"


@dataclass(frozen=True)
class Braid:
    dual: str
    primal: str

    def __str__(self) -> str:
        return f"braid {self.dual} {self.primal}"


@dataclass(frozen=True)
class StabLoop:
    color: Color
    q: str

    def __str__(self) -> str:
        return f"stabloop {self.color.value} {self.q}"


Event = Union[Prep, Meas, Braid, StabLoop]


def PrepZ(q: str) -> Prep:
    return Prep("Z", q)


def PrepX(q: str) -> Prep:
    return Prep("X", q)


def MeasZ(q: str) -> Meas:
    return Meas("Z", q)


def MeasX(q: str) -> Meas:
    return Meas("X", q)


def registers_of(event: Event) -> tuple[str, ...]:
    if isinstance(event, Braid):
        return (event.dual, event.primal)
    return (event.q,)


@dataclass(frozen=True)
class EventWord:
    registers: tuple[tuple[str, Color], ...]
    events: tuple[Event, ...]

    def __post_init__(self) -> None:
        regs = tuple((name, Color(c)) for name, c in self.registers)
        object.__setattr__(self, "registers", regs)
        object.__setattr__(self, "events", tuple(self.events))
        colors = dict(regs)
        if len(colors) != len(regs):
            raise MalformedWordError("duplicate register")
        started, ended = set(), set()
        for i, ev in enumerate(self.events):
            for q in registers_of(ev):
                if q not in colors:
                    raise MalformedWordError(f"event {i} ({ev}) uses undeclared register {q}")
                if q in ended:
                    raise MalformedWordError(f"event {i} ({ev}) acts on measured register {q}")
            if isinstance(ev, Prep):
                if ev.basis not in "XZ" or ev.q in started:
                    raise MalformedWordError(f"event {i} ({ev}): preparation must open a register")
            elif isinstance(ev, Meas):
                if ev.basis not in "XZ":
                    raise MalformedWordError(f"event {i} ({ev}): unknown basis")
                ended.add(ev.q)
            elif isinstance(ev, Braid):
                if colors[ev.dual] is not Color.DUAL or colors[ev.primal] is not Color.PRIMAL:
                    raise MalformedWordError(f"event {i} ({ev}) must link a dual and a primal register")
            elif isinstance(ev, StabLoop):
                if colors[ev.q] is not Color(ev.color):
                    raise MalformedWordError(f"event {i} ({ev}): color mismatch")
            else:
                raise MalformedWordError(f"unknown event {ev!r}")
            started.update(registers_of(ev))

    # -- structure -------------------------------------------------------------

    @property
    def colors(self) -> dict[str, Color]:
        return dict(self.registers)

    def prep_of(self, q: str) -> Prep | None:
        return next((e for e in self.events if isinstance(e, Prep) and e.q == q), None)

    def meas_of(self, q: str) -> Meas | None:
        return next((e for e in self.events if isinstance(e, Meas) and e.q == q), None)

    @property
    def inputs(self) -> tuple[str, ...]:
        prepared = {e.q for e in self.events if isinstance(e, Prep)}
        return tuple(sorted(q for q, _ in self.registers if q not in prepared))

    @property
    def outputs(self) -> tuple[str, ...]:
        measured = {e.q for e in self.events if isinstance(e, Meas)}
        return tuple(sorted(q for q, _ in self.registers if q not in measured))

    def is_internal(self, q: str) -> bool:
        """Prepared and measured in the basis native to the defect color.

        Such a register is a closed strand whose only effect is through its
        braids.
        """
        native = "Z" if self.colors[q] is Color.PRIMAL else "X"
        p, m = self.prep_of(q), self.meas_of(q)
        return p is not None and m is not None and p.basis == native and m.basis == native

    def braids(self) -> list[Braid]:
        return [e for e in self.events if isinstance(e, Braid)]

    def with_events(self, events: Iterable[Event], drop: Iterable[str] = (), add: Iterable[tuple[str, Color]] = ()) -> "EventWord":
        drop = set(drop)
        regs = [r for r in self.registers if r[0] not in drop] + list(add)
        return EventWord(tuple(regs), tuple(events))

    def fresh(self, stem: str) -> str:
        taken = {q for q, _ in self.registers}
        i = 0
        while f"{stem}{i}" in taken:
            i += 1
        return f"{stem}{i}"

    # -- text ------------------------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for color in Color:
            names = [q for q, c in self.registers if c is color]
            if names:
                lines.append(f"{color.value} {' '.join(names)}")
        lines += [str(e) for e in self.events]
        return "\n".join(lines) + "\n"

    def __str__(self) -> str:
        return "; ".join(str(e) for e in self.events) or "(empty)"


def word(events: Iterable[Event], primal: Iterable[str] = (), dual: Iterable[str] = ()) -> EventWord:
    """Build a word, inferring colors from braids and stab loops.

    Registers named only in preparations or measurements default to primal
    unless listed in ``dual``.
    """
    events = list(events)
    colors: dict[str, Color] = {q: Color.PRIMAL for q in primal}
    colors.update({q: Color.DUAL for q in dual})
    for ev in events:
        if isinstance(ev, Braid):
            colors.setdefault(ev.dual, Color.DUAL)
            colors.setdefault(ev.primal, Color.PRIMAL)
        elif isinstance(ev, StabLoop):
            colors.setdefault(ev.q, Color(ev.color))
    order: list[str] = list(colors)
    for ev in events:
        for q in registers_of(ev):
            if q not in colors:
                colors[q] = Color.PRIMAL
                order.append(q)
    return EventWord(tuple((q, colors[q]) for q in order), tuple(events))


def parse_word(text: str) -> EventWord:
    """Parse the line format: ``prepZ q3``, ``braid d1 p2``, ``measX q3``,
    ``stabloop primal q2``, and optional ``primal a b`` / ``dual x`` declarations."""
    events: list[Event] = []
    primal: list[str] = []
    dual: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *args = line.split()
        key = head.lower()
        try:
            if key in ("primal", "dual"):
                (primal if key == "primal" else dual).extend(args)
            elif key in ("prepz", "prepx", "measz", "measx"):
                (q,) = args
                basis = key[-1].upper()
                events.append(Prep(basis, q) if key.startswith("prep") else Meas(basis, q))
            elif key == "braid":
                d, p = args
                events.append(Braid(d, p))
            elif key == "stabloop":
                color, q = args
                events.append(StabLoop(Color(color.lower()), q))
            else:
                raise MalformedWordError(f"unknown event '{head}'")
        except ValueError as exc:
            if isinstance(exc, MalformedWordError):
                raise MalformedWordError(f"line {lineno}: {exc}") from None
            raise MalformedWordError(f"line {lineno}: cannot parse '{line}'") from None
    return word(events, primal, dual)


def parse_words(text: str) -> list[EventWord]:
    """Several words separated by lines of ``===``."""
    chunks, cur = [], []
    for line in text.splitlines():
        if line.strip().startswith("==="):
            chunks.append("\n".join(cur))
            cur = []
        else:
            cur.append(line)
    chunks.append("\n".join(cur))
    return [parse_word(c) for c in chunks if c.strip()]
