"""Magic-state distillation at the level of code combinatorics.

Inputs carry independent Z-flips.  A round accepts when the X-type checks
see nothing, and fails when the surviving flip pattern acts as a logical
operator.  Everything here is small enough to enumerate exactly, which is
how the Monte Carlo is checked.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations

import numpy as np

from .noise import substream

# initial ancilla error per unit physical error rate
INPUT_CONSTANT = 6.0
INPUT_CONSTANT_NO_REDUNDANT = 68.0 / 15.0


def input_error_constant(redundant_gates: bool = True) -> float:
    return INPUT_CONSTANT if redundant_gates else INPUT_CONSTANT_NO_REDUNDANT


def _rows(supports, n: int) -> np.ndarray:
    m = np.zeros((len(supports), n), dtype=np.uint8)
    for i, s in enumerate(supports):
        m[i, list(s)] = 1
    return m


def _span(rows: np.ndarray) -> np.ndarray:
    """All GF(2) combinations of the rows (with repeats if dependent)."""
    k, n = rows.shape
    coeffs = (np.arange(2**k)[:, None] >> np.arange(k)) & 1
    return (coeffs @ rows) & 1


@dataclass(frozen=True)
class CssCode:
    name: str
    n: int
    k: int
    d: int
    x_stabilizers: tuple[frozenset[int], ...]
    z_stabilizers: tuple[frozenset[int], ...]
    logical_x: frozenset[int]
    logical_z: frozenset[int]

    def __post_init__(self) -> None:
        hx, hz = self.hx, self.hz
        if np.any((hx.astype(int) @ hz.T.astype(int)) & 1):
            raise ValueError("X and Z stabilizers do not commute")
        lx, lz = _rows([self.logical_x], self.n)[0], _rows([self.logical_z], self.n)[0]
        if np.any((hz @ lx) & 1) or np.any((hx @ lz) & 1):
            raise ValueError("logical operators do not commute with the stabilizers")
        if not int(lx @ lz) & 1:
            raise ValueError("logical X and Z must anticommute")
        if self.z_distance() != self.d:
            raise ValueError(f"declared distance {self.d} does not match {self.z_distance()}")

    @cached_property
    def hx(self) -> np.ndarray:
        return _rows(self.x_stabilizers, self.n)

    @cached_property
    def hz(self) -> np.ndarray:
        return _rows(self.z_stabilizers, self.n)

    @cached_property
    def lx(self) -> np.ndarray:
        return _rows([self.logical_x], self.n)[0]

    @cached_property
    def weight_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Per weight w: number of Z patterns accepted, and accepted with a logical flip."""
        patterns = ((np.arange(2**self.n)[:, None] >> np.arange(self.n)) & 1).astype(np.uint8)
        weights = patterns.sum(axis=1)
        accepted = ~np.any((patterns.astype(np.int64) @ self.hx.T) & 1, axis=1)
        flipped = accepted & (((patterns.astype(np.int64) @ self.lx) & 1) == 1)
        acc = np.bincount(weights[accepted], minlength=self.n + 1)
        bad = np.bincount(weights[flipped], minlength=self.n + 1)
        return acc, bad

    def z_distance(self) -> int:
        """Minimum weight of an undetected Z pattern with logical action."""
        _, bad = self.weight_table
        nz = np.flatnonzero(bad)
        return int(nz[0]) if len(nz) else 0

    def dump(self) -> str:
        lines = [f"# {self.name} [[{self.n},{self.k},{self.d}]]", "X"]
        lines += [" ".join(map(str, r)) for r in self.hx]
        lines.append("Z")
        lines += [" ".join(map(str, r)) for r in self.hz]
        return "\n".join(lines) + "\n"


def rm15() -> CssCode:
    """Punctured Reed-Muller code on the 15 nonzero points of GF(2)^4.

    X checks are the four coordinate functions (weight 8); Z checks add
    their pairwise products (weight 4).  Both logicals are the all-ones
    vector.
    """
    points = range(1, 16)
    linear = [frozenset(j for j, x in enumerate(points) if (x >> i) & 1) for i in range(4)]
    quadratic = [a & b for a, b in combinations(linear, 2)]
    ones = frozenset(range(15))
    return CssCode("rm15", 15, 1, 3, tuple(linear), tuple(linear + quadratic), ones, ones)


def steane7() -> CssCode:
    points = range(1, 8)
    rows = tuple(frozenset(j for j, x in enumerate(points) if (x >> i) & 1) for i in range(3))
    ones = frozenset(range(7))
    return CssCode("steane7", 7, 1, 3, rows, rows, ones, ones)


CODES = {"rm15": rm15, "steane7": steane7}


def transversal_conditions(code: CssCode) -> bool:
    """X-check weights divisible by 8 with even pairwise and triple overlaps."""
    rows = [set(s) for s in code.x_stabilizers]
    if any(len(r) % 8 for r in rows):
        return False
    if any(len(a & b) % 2 for a, b in combinations(rows, 2)):
        return False
    return not any(len(a & b & c) % 2 for a, b, c in combinations(rows, 3))


def undetected_logical_count(code: CssCode, w: int) -> int:
    """Weight-w Z patterns with trivial X syndrome that flip the logical qubit."""
    if not 0 <= w <= code.n:
        raise ValueError("weight out of range")
    count = 0
    for support in combinations(range(code.n), w):
        e = np.zeros(code.n, dtype=np.int64)
        e[list(support)] = 1
        if not np.any((code.hx @ e) & 1) and (code.lx @ e) & 1:
            count += 1
    return count


@dataclass(frozen=True)
class DistillResult:
    accept_prob: float
    eps_out: float
    trials: int
    accepted: int = 0
    failures: int = 0

    def __post_init__(self) -> None:
        if not (0 <= self.accept_prob <= 1 and 0 <= self.eps_out <= 1):
            raise ValueError("probabilities out of range")

    @property
    def eps_out_sigma(self) -> float:
        if self.accepted == 0:
            return 0.0
        q = self.eps_out
        return math.sqrt(max(q * (1 - q), 1.0 / self.accepted) / self.accepted)


def simulate_distillation(code: CssCode, eps_in: float, trials: int, seed: int, chunk: int = 200_000) -> DistillResult:
    if not 0 <= eps_in <= 0.2:
        raise ValueError("eps_in must lie in [0, 0.2]")
    accepted = failures = 0
    for c, start in enumerate(range(0, trials, chunk)):
        shots = min(chunk, trials - start)
        rng = substream(seed, code.n, c)
        e = (rng.random((shots, code.n)) < eps_in).astype(np.int64)
        ok = ~np.any((e @ code.hx.T) & 1, axis=1)
        bad = ok & (((e @ code.lx) & 1) == 1)
        accepted += int(ok.sum())
        failures += int(bad.sum())
    return DistillResult(
        accept_prob=accepted / trials,
        eps_out=failures / accepted if accepted else 0.0,
        trials=trials,
        accepted=accepted,
        failures=failures,
    )


def exact_distillation(code: CssCode, eps_in: float | Fraction, max_weight: int | None = None):
    """(accept_prob, eps_out) from the weight enumeration, optionally truncated.

    Passing a Fraction gives an exact rational result.
    """
    acc, bad = code.weight_table
    top = code.n if max_weight is None else max_weight
    one = Fraction(1) if isinstance(eps_in, Fraction) else 1.0
    p_acc = p_bad = 0 * one
    for w in range(top + 1):
        pw = one * eps_in**w * (1 - eps_in) ** (code.n - w)
        p_acc += int(acc[w]) * pw
        p_bad += int(bad[w]) * pw
    return p_acc, p_bad / p_acc


def distill_threshold(c: float, a: float) -> float:
    """Physical rate at which a*p hits the unstable fixed point of eps -> c eps^3."""
    if c <= 1 or a <= 0:
        raise ValueError("need c > 1 and a > 0")
    return 1.0 / (a * math.sqrt(c))


def encoded_x_supports(code: CssCode) -> np.ndarray:
    """Supports of X-type operators acting as encoded gates: stabilizers and the logical coset."""
    stab = _span(code.hx)
    return np.concatenate([stab, stab ^ code.lx[None, :].astype(np.uint8)])


def avg_y_states(code: CssCode | None = None, minimise: bool = True) -> Fraction:
    """Mean number of phase corrections per round, exact.

    Each of the n transversal pi/8 rotations independently needs a
    corrective pi/4 rotation with probability 1/2.  A correction pattern K
    may be replaced by K + J for any encoded X-type operator J, so only the
    lightest representative has to be applied.
    """
    code = code or rm15()
    n = code.n
    ks = np.arange(2**n, dtype=np.int64)
    if minimise:
        js = encoded_x_supports(code).astype(np.int64) @ (1 << np.arange(n, dtype=np.int64))
    else:
        js = np.zeros(1, dtype=np.int64)
    best = np.full(len(ks), n + 1, dtype=np.int64)
    table = np.array([bin(i).count("1") for i in range(1 << 8)], dtype=np.int64)
    for j in np.unique(js):
        x = ks ^ j
        weight = sum(table[(x >> s) & 0xFF] for s in range(0, n, 8))
        best = np.minimum(best, weight)
    return Fraction(int(best.sum()), 2**n)


SWEEP_HEADER = ["code", "eps_in", "trials", "accept", "eps_out"]


def sweep_csv(rows: list[tuple[str, float, DistillResult]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for name, eps, res in rows:
        w.writerow([name, eps, res.trials, res.accept_prob, res.eps_out])
    return buf.getvalue()
