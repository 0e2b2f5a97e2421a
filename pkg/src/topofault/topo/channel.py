"""Clifford semantics of event words, modulo Pauli byproducts.

A word is turned into the stabilizer group of its Choi state: every input
register starts maximally entangled with a reference qubit, events act on
the group, and measured registers are traced out.  Signs are never
tracked, so two words agree exactly when their channels differ at most by
outcome-dependent Pauli corrections.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .events import Braid, EventWord, Meas, Prep, StabLoop


def _rref(m: np.ndarray) -> np.ndarray:
    """Reduced row echelon form over GF(2), zero rows removed."""
    m = m.copy() % 2
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if m[i, c]), None)
        if pivot is None:
            continue
        m[[r, pivot]] = m[[pivot, r]]
        for i in range(rows):
            if i != r and m[i, c]:
                m[i] ^= m[r]
        r += 1
        if r == rows:
            break
    return m[:r]


def _solve(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Some x with x @ a = b over GF(2), or None."""
    g, n = a.shape
    aug = np.concatenate([a.T, b[:, None]], axis=1).astype(np.uint8)
    red = _rref(aug)
    for row in red:
        if not row[:-1].any() and row[-1]:
            return None
    x = np.zeros(g, dtype=np.uint8)
    for row in red:
        lead = int(np.flatnonzero(row[:-1])[0])
        x[lead] = row[-1]
    return x


class _Tableau:
    """Stabilizer generators as binary (x | z) rows over named qubits."""

    def __init__(self) -> None:
        self.qubits: list = []
        self.x = np.zeros((0, 0), dtype=np.uint8)
        self.z = np.zeros((0, 0), dtype=np.uint8)

    def col(self, q) -> int:
        return self.qubits.index(q)

    def add_qubit(self, q) -> None:
        self.qubits.append(q)
        self.x = np.pad(self.x, ((0, 0), (0, 1)))
        self.z = np.pad(self.z, ((0, 0), (0, 1)))

    def add_row(self, xs: dict, zs: dict) -> None:
        rx = np.zeros(len(self.qubits), dtype=np.uint8)
        rz = np.zeros(len(self.qubits), dtype=np.uint8)
        for q in xs:
            rx[self.col(q)] = 1
        for q in zs:
            rz[self.col(q)] = 1
        self.x = np.vstack([self.x, rx])
        self.z = np.vstack([self.z, rz])

    def cnot(self, control, target) -> None:
        c, t = self.col(control), self.col(target)
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def measure_and_discard(self, q, basis: str) -> None:
        j = self.col(q)
        # component that anticommutes with the measured Pauli
        anti_col = self.x[:, j] if basis == "Z" else self.z[:, j]
        anti = np.flatnonzero(anti_col)
        px = np.zeros(len(self.qubits), dtype=np.uint8)
        pz = np.zeros(len(self.qubits), dtype=np.uint8)
        (pz if basis == "Z" else px)[j] = 1
        if len(anti):
            r0 = anti[0]
            for r in anti[1:]:
                self.x[r] ^= self.x[r0]
                self.z[r] ^= self.z[r0]
            self.x[r0], self.z[r0] = px, pz
        else:
            self.x = np.vstack([self.x, px])
            self.z = np.vstack([self.z, pz])
        # every remaining row now carries I or the measured Pauli on q
        on_q = np.flatnonzero(self.x[:, j] | self.z[:, j])
        for r in on_q:
            self.x[r] ^= px
            self.z[r] ^= pz
        keep = [k for k in range(len(self.qubits)) if k != j]
        self.qubits.pop(j)
        self.x, self.z = self.x[:, keep], self.z[:, keep]
        self._reduce()

    def _reduce(self) -> None:
        n = len(self.qubits)
        m = _rref(np.concatenate([self.x, self.z], axis=1))
        self.x, self.z = m[:, :n], m[:, n:]


@dataclass(frozen=True, eq=False)
class CliffordChannel:
    """Choi stabilizer group of a channel from ``inputs`` to ``outputs``.

    Columns are ordered as reference copies of the inputs followed by the
    outputs, x block then z block; rows are in reduced echelon form, so
    equal channels have equal matrices.
    """

    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    stabilizers: np.ndarray

    @property
    def n_qubits(self) -> int:
        return len(self.inputs) + len(self.outputs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CliffordChannel):
            return NotImplemented
        return (
            self.inputs == other.inputs
            and self.outputs == other.outputs
            and np.array_equal(self.stabilizers, other.stabilizers)
        )

    def __hash__(self) -> int:
        return hash((self.inputs, self.outputs, self.stabilizers.tobytes()))

    @property
    def is_unitary(self) -> bool:
        if len(self.inputs) != len(self.outputs):
            return False
        ref, _ = self._split()
        return len(_rref(ref)) == 2 * len(self.inputs)

    def _split(self) -> tuple[np.ndarray, np.ndarray]:
        """Reference part and output part of each generator, each as (x | z)."""
        k, n = len(self.inputs), self.n_qubits
        s = self.stabilizers
        ref = np.concatenate([s[:, :k], s[:, n : n + k]], axis=1)
        out = np.concatenate([s[:, k:n], s[:, n + k :]], axis=1)
        return ref, out

    def image(self, pauli: np.ndarray) -> np.ndarray | None:
        """Output Pauli (x | z) correlated with input Pauli ``pauli`` (x | z), if determined."""
        ref, out = self._split()
        coeffs = _solve(ref, np.asarray(pauli, dtype=np.uint8) % 2)
        if coeffs is None:
            return None
        return (coeffs @ out) % 2

    def symplectic(self) -> np.ndarray:
        """Matrix S with images of input X_i (rows 0..k-1) and Z_i (rows k..2k-1)."""
        k = len(self.inputs)
        rows = []
        for i in range(2 * k):
            e = np.zeros(2 * k, dtype=np.uint8)
            e[i] = 1
            img = self.image(e)
            if img is None:
                raise ValueError("channel is not unitary")
            rows.append(img)
        return np.array(rows, dtype=np.uint8)

    def describe(self) -> str:
        names = [f"r:{q}" for q in self.inputs] + list(self.outputs)
        n = len(names)
        lines = []
        for row in self.stabilizers:
            ops = []
            for i, q in enumerate(names):
                p = {(0, 0): "", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(int(row[i]), int(row[n + i]))]
                if p:
                    ops.append(f"{p}{q}")
            lines.append(" ".join(ops))
        return "\n".join(lines)


def _finish(tab: _Tableau, inputs: tuple[str, ...], outputs: tuple[str, ...]) -> CliffordChannel:
    order = [("ref", q) for q in inputs] + list(outputs)
    perm = [tab.col(q) for q in order]
    m = np.concatenate([tab.x[:, perm], tab.z[:, perm]], axis=1)
    m = _rref(m)
    if m.shape[0] != len(order):
        raise AssertionError("Choi state lost purity")
    return CliffordChannel(inputs, outputs, m)


def channel_of(w: EventWord) -> CliffordChannel:
    tab = _Tableau()
    for q in w.inputs:
        tab.add_qubit(("ref", q))
        tab.add_qubit(q)
        tab.add_row({("ref", q): 1, q: 1}, {})
        tab.add_row({}, {("ref", q): 1, q: 1})
    for ev in w.events:
        if isinstance(ev, Prep):
            tab.add_qubit(ev.q)
            if ev.basis == "Z":
                tab.add_row({}, {ev.q: 1})
            else:
                tab.add_row({ev.q: 1}, {})
        elif isinstance(ev, Braid):
            # dual control, primal target
            tab.cnot(ev.dual, ev.primal)
        elif isinstance(ev, Meas):
            tab.measure_and_discard(ev.q, ev.basis)
        elif isinstance(ev, StabLoop):
            # measures an operator in the code's stabilizer: no action on encoded states
            pass
    return _finish(tab, w.inputs, w.outputs)


def equivalent(w1: EventWord, w2: EventWord, explain: bool = False):
    """Channel equality modulo Pauli byproducts.

    With ``explain`` the result is ``(bool, message)``.
    """
    if (w1.inputs, w1.outputs) != (w2.inputs, w2.outputs):
        msg = f"signature mismatch: {w1.inputs}->{w1.outputs} vs {w2.inputs}->{w2.outputs}"
        return (False, msg) if explain else False
    same = channel_of(w1) == channel_of(w2)
    msg = "equal channels" if same else "channels differ"
    return (same, msg) if explain else same


# -- reference channels --------------------------------------------------------


def channel_from_images(
    inputs: tuple[str, ...],
    outputs: tuple[str, ...],
    images: dict[tuple[str, str], dict[str, str]],
    prepared: dict[str, str] | None = None,
) -> CliffordChannel:
    """Channel whose input Pauli ``(basis, q)`` maps to the output Pauli ``{register: basis}``.

    ``prepared`` fixes outputs that are fresh stabilizer states, e.g. ``{"c": "Z"}``.
    """
    tab = _Tableau()
    for q in inputs:
        tab.add_qubit(("ref", q))
    for q in outputs:
        tab.add_qubit(q)
    for q in inputs:
        for basis in "XZ":
            img = images[(basis, q)]
            xs = {("ref", q): 1} if basis == "X" else {}
            zs = {("ref", q): 1} if basis == "Z" else {}
            for r, b in img.items():
                if b in "XY":
                    xs[r] = 1
                if b in "ZY":
                    zs[r] = 1
            tab.add_row(xs, zs)
    for q, b in (prepared or {}).items():
        tab.add_row({q: 1} if b == "X" else {}, {q: 1} if b == "Z" else {})
    return _finish(tab, tuple(sorted(inputs)), tuple(sorted(outputs)))


def identity_channel(*regs: str) -> CliffordChannel:
    return channel_from_images(regs, regs, {(b, q): {q: b} for q in regs for b in "XZ"})


def cnot_channel(control: str, target: str, control_out: str | None = None) -> CliffordChannel:
    c2 = control_out or control
    images = {
        ("X", control): {c2: "X", target: "X"},
        ("Z", control): {c2: "Z"},
        ("X", target): {target: "X"},
        ("Z", target): {c2: "Z", target: "Z"},
    }
    return channel_from_images((control, target), (c2, target), images)


def swap_channel(a: str, b: str, a_out: str | None = None, b_out: str | None = None) -> CliffordChannel:
    """State of ``a`` ends up on ``b_out`` and state of ``b`` on ``a_out``."""
    a2, b2 = a_out or a, b_out or b
    images = {("X", a): {b2: "X"}, ("Z", a): {b2: "Z"}, ("X", b): {a2: "X"}, ("Z", b): {a2: "Z"}}
    return channel_from_images((a, b), (a2, b2), images)
