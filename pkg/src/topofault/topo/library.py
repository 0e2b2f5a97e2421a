"""Standard event words used in the identities of the topological calculus."""

from __future__ import annotations

from .events import Braid, EventWord, MeasX, MeasZ, PrepX, PrepZ, StabLoop, Color, word


def double_braid(d: str = "d", p: str = "p") -> EventWord:
    return word([Braid(d, p), Braid(d, p)])


def bare(*regs: tuple[str, Color]) -> EventWord:
    """Registers passing through untouched."""
    return EventWord(tuple(regs), ())


def cnot_events(c: str, t: str, c_out: str, ancilla: str) -> list:
    """CNOT between two primal registers, mediated by a dual loop.

    The loop (prepared in X) encircles the incoming control, a fresh output
    control and the target; measuring it projects onto X_c X_c' X_t = +1
    (up to sign), and measuring the old control in Z completes the transfer
    of the control onto ``c_out``.
    """
    return [
        PrepX(ancilla),
        PrepZ(c_out),
        Braid(ancilla, c),
        Braid(ancilla, c_out),
        Braid(ancilla, t),
        MeasX(ancilla),
        MeasZ(c),
    ]


def cnot_word(c: str = "c", t: str = "t", c_out: str = "c2", ancilla: str = "a") -> EventWord:
    return word(cnot_events(c, t, c_out, ancilla))


def cnot_zero_control_word(c: str = "c", t: str = "t", c_out: str = "c2", ancilla: str = "a") -> EventWord:
    """The CNOT word with its control prepared in |0>."""
    return word([PrepZ(c)] + cnot_events(c, t, c_out, ancilla))


def zero_and_identity_word(t: str = "t", c_out: str = "c2") -> EventWord:
    """Target untouched, fresh control output in |0>."""
    return word([PrepZ(c_out)], primal=[t])


def teleport_events(src: str, dst: str, ancilla: str) -> list:
    return [PrepX(ancilla), PrepZ(dst), Braid(ancilla, src), Braid(ancilla, dst), MeasX(ancilla), MeasZ(src)]


def triple_cnot_word(a: str = "a", b: str = "b") -> EventWord:
    """CNOT(a->b), CNOT(b->a), CNOT(a->b), each renaming its control register."""
    events = (
        cnot_events(a, b, f"{a}1", "x1")
        + cnot_events(b, f"{a}1", f"{b}1", "x2")
        + cnot_events(f"{a}1", f"{b}1", f"{a}2", "x3")
    )
    return word(events)


def swap_word(a: str = "a", b: str = "b") -> EventWord:
    """Teleport ``a`` onto ``b1`` and ``b`` onto ``a2``: the outputs of :func:`triple_cnot_word` swapped."""
    return word(teleport_events(b, f"{a}2", "y1") + teleport_events(a, f"{b}1", "y2"))


def with_stab_loop(w: EventWord, q: str, position: int | None = None) -> EventWord:
    events = list(w.events)
    color = w.colors[q]
    idx = len(events) if position is None else position
    events.insert(idx, StabLoop(color, q))
    return EventWord(w.registers, tuple(events))
