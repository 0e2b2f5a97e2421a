"""Operational overhead of CSS gates and of distilled pi/8 rotations.

Everything here is analytic: gate failure from the shortest error cycles,
overhead as cell count times the expected number of repetitions, and the
distillation recursion for ancilla cost and error.  The only numerics are
integer searches over the scale factor and defect thickness.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

OPS_PER_CELL = 16
# decay rate of logical failure used when none is supplied (time-like value)
DEFAULT_KAPPA = 0.85
Y_PER_A_ROUND = Fraction(1705, 512)
LAMBDA_CAP = 4000


class SearchExhaustedError(RuntimeError):
    pass


class NonConvergentError(RuntimeError):
    def __init__(self, level: int, message: str):
        super().__init__(f"level {level}: {message}")
        self.level = level


@dataclass(frozen=True)
class GateGeometry:
    name: str
    volume: float
    length: float

    def __post_init__(self) -> None:
        if self.volume < 1 or self.length < 1:
            raise ValueError("volume and length must be at least 1")


GATE_GEOMETRY = {
    "cnot": GateGeometry("cnot", 12, 22),
    "uz": GateGeometry("uz", 2, 3),
    "ux": GateGeometry("ux", 4, 4),
    "y": GateGeometry("y", 120, 120),
    "a": GateGeometry("a", 336, 362),
}


def compact_geometry(n_a: int = 15, k_a: int = 1, n_y: int = 7, k_y: int = 1) -> dict[str, GateGeometry]:
    """Standard gate geometry with the compact distillation volumes 9(n/k+1) and 6(n/k+1).

    Only volumes are known for the compact circuits, so lengths keep their
    standard values.
    """
    out = dict(GATE_GEOMETRY)
    out["a"] = GateGeometry("a", 9 * (n_a / k_a + 1), GATE_GEOMETRY["a"].length)
    out["y"] = GateGeometry("y", 6 * (n_y / k_y + 1), GATE_GEOMETRY["y"].length)
    return out


def gate_failure(length: float, lam: float, d: float, kappa: float) -> float:
    """Failure probability from wrapping cycles (length 4(d+1)) and relative cycles (length lam-d)."""
    if not lam > d >= 1:
        raise ValueError("need lambda > d >= 1")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    eps = lam * length * (math.exp(-4 * kappa * (d + 1)) + 2 * (d + 1) * math.exp(-kappa * (lam - d)))
    return min(max(eps, 0.0), 1.0)


def _gate_failure_grid(length: float, lam: np.ndarray, d: np.ndarray, kappa: float) -> np.ndarray:
    eps = lam * length * (np.exp(-4 * kappa * (d + 1)) + 2 * (d + 1) * np.exp(-kappa * (lam - d)))
    return np.clip(eps, 0.0, 1.0)


def best_thickness(length: float, lam: int, kappa: float) -> tuple[int, float]:
    """Defect thickness minimising gate failure at fixed lambda."""
    d = np.arange(1, lam)
    eps = _gate_failure_grid(length, float(lam), d.astype(float), kappa)
    i = int(np.argmin(eps))
    return int(d[i]), float(eps[i])


@dataclass(frozen=True)
class OverheadParams:
    levels: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not self.levels:
            raise ValueError("need at least one level")
        for lam, d in self.levels:
            if not lam > d >= 1:
                raise ValueError(f"level ({lam}, {d}) violates lambda > d >= 1")

    @property
    def l_max(self) -> int:
        return len(self.levels) - 1


@dataclass(frozen=True)
class OverheadResult:
    o3: float
    levels: tuple[tuple[int, int], ...]
    eps_top: float = 0.0
    eps_a: float = 0.0
    eps_y: float = 0.0
    omega: float = 1.0
    gate: str = ""
    search_log: tuple = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if not self.o3 >= OPS_PER_CELL:
            raise ValueError("overhead cannot drop below one elementary cell")

    @property
    def l_max(self) -> int:
        return len(self.levels) - 1

    @property
    def lambda_trace(self) -> tuple[tuple[int, int], ...]:
        return self.levels


# -- CSS gates -----------------------------------------------------------------


def css_overhead(
    geom: GateGeometry, omega: float, kappa: float = DEFAULT_KAPPA, lambda_cap: int = LAMBDA_CAP
) -> OverheadResult:
    """Minimise 16 lambda^3 V exp(eps_top Omega) over integer lambda > d >= 1."""
    if omega < 1:
        raise ValueError("omega must be at least 1")
    best = None
    lam = np.arange(2, lambda_cap + 1, dtype=float)
    # the gate failure at fixed lambda is minimised over d on a shared grid
    eps_best = np.full(len(lam), np.inf)
    d_best = np.zeros(len(lam), dtype=int)
    for start in range(0, len(lam), 256):
        block = lam[start : start + 256]
        d = np.arange(1, int(block[-1]), dtype=float)
        eps = _gate_failure_grid(geom.length, block[:, None], d[None, :], kappa)
        eps[d[None, :] >= block[:, None]] = np.inf
        idx = np.argmin(eps, axis=1)
        eps_best[start : start + len(block)] = eps[np.arange(len(block)), idx]
        d_best[start : start + len(block)] = d[idx].astype(int)
    with np.errstate(over="ignore"):
        log_o3 = math.log(OPS_PER_CELL * geom.volume) + 3 * np.log(lam) + eps_best * omega
    i = int(np.argmin(log_o3))
    if not np.isfinite(log_o3[i]):
        raise SearchExhaustedError("no feasible (lambda, d) below the cap")
    if i == len(lam) - 1:
        raise SearchExhaustedError("optimum sits at the lambda cap")
    best = OverheadResult(
        o3=float(math.exp(log_o3[i])),
        levels=((int(lam[i]), int(d_best[i])),),
        eps_top=float(eps_best[i]),
        omega=omega,
        gate=geom.name,
    )
    return best


# -- distillation --------------------------------------------------------------


@dataclass(frozen=True)
class DistillationLevel:
    o3_a: float
    o3_y: float
    eps_a: float
    eps_y: float


def distillation_recursion(
    params: OverheadParams,
    eps0: float,
    kappa: float,
    geometry: dict[str, GateGeometry] = GATE_GEOMETRY,
) -> list[DistillationLevel]:
    """Ancilla cost and error per level; level l is built with the parameters of level l-1."""
    ga, gy = geometry["a"], geometry["y"]
    state = DistillationLevel(OPS_PER_CELL, OPS_PER_CELL, eps0, eps0)
    out = [state]
    y_per_a = float(Y_PER_A_ROUND)
    for level, (lam, d) in enumerate(params.levels[:-1], start=1):
        top_a = gate_failure(ga.length, lam, d, kappa)
        top_y = gate_failure(gy.length, lam, d, kappa)
        acc_a = 1 - 15 * state.eps_a - top_a
        acc_y = 1 - 7 * state.eps_y - top_y
        if acc_a <= 0 or acc_y <= 0:
            raise NonConvergentError(level, "distillation never succeeds")
        cells = OPS_PER_CELL * lam**3
        state = DistillationLevel(
            o3_a=(15 * state.o3_a + y_per_a * state.o3_y + cells * ga.volume) / acc_a,
            o3_y=(7 * state.o3_y + cells * gy.volume) / acc_y,
            eps_a=min(35 * state.eps_a**3 + top_a, 1.0),
            eps_y=min(7 * state.eps_y**3 + top_y, 1.0),
        )
        if state.eps_a > out[-1].eps_a or state.eps_y > out[-1].eps_y:
            raise NonConvergentError(level, "ancilla error grows")
        out.append(state)
    return out


def pi8_log_overhead(
    params: OverheadParams,
    omega: float,
    p: float,
    kappa: float,
    geometry: dict[str, GateGeometry] = GATE_GEOMETRY,
    eps0_constant: float = 6.0,
) -> tuple[float, DistillationLevel, float]:
    """ln O3 of the pi/8 rotation, the top distillation level and the gadget failure."""
    top = distillation_recursion(params, eps0_constant * p, kappa, geometry)[-1]
    lam, d = params.levels[-1]
    gadget = geometry["uz"]
    eps_gate = gate_failure(gadget.length, lam, d, kappa)
    base = top.o3_a + 0.5 * top.o3_y + 24 * lam**3 * gadget.volume
    return math.log(base) + (top.eps_a + top.eps_y + eps_gate) * omega, top, eps_gate


def _smallest_lambda(length: float, target: float, kappa: float) -> tuple[int, int]:
    """Smallest lambda (with its best d) whose gate failure is at most ``target``."""
    lam = 2
    while lam < LAMBDA_CAP:
        d, eps = best_thickness(length, lam, kappa)
        if eps <= target:
            return lam, d
        lam += 1 if lam < 64 else lam // 32
    return lam, lam // 5


def _starts(
    l_max: int, omega: float, p: float, kappa: float, geometry: dict[str, GateGeometry], eps0_constant: float
) -> list[tuple[tuple[int, int], ...]]:
    """Greedy ladders: at each level the topological error is a fixed multiple
    of the cubic distillation term, so neither dominates."""
    out = []
    for balance in (0.03, 0.3, 1.0, 3.0):
        eps_a = eps_y = eps0_constant * p
        levels = []
        for _ in range(l_max):
            target = balance * 35 * eps_a**3
            lam, d = _smallest_lambda(geometry["a"].length, max(target, 1e-300), kappa)
            levels.append((lam, d))
            eps_a = 35 * eps_a**3 + gate_failure(geometry["a"].length, lam, d, kappa)
            eps_y = 7 * eps_y**3 + gate_failure(geometry["y"].length, lam, d, kappa)
        for top_target in (0.1, 1.0):
            lam, d = _smallest_lambda(geometry["uz"].length, top_target / omega, kappa)
            out.append(tuple(levels + [(lam, d)]))
    return out


def distill_overhead(
    omega: float,
    p: float,
    kappa: float = DEFAULT_KAPPA,
    geometry: dict[str, GateGeometry] = GATE_GEOMETRY,
    eps0_constant: float = 6.0,
    max_levels: int = 6,
) -> OverheadResult:
    """Minimise the pi/8 overhead over per-level (lambda, d) and the depth.

    Coordinate descent on integer grids from several geometric starting
    ladders per depth; the best local optimum wins.
    """
    if omega < 1:
        raise ValueError("omega must be at least 1")
    limit = 1 / (eps0_constant * math.sqrt(35))
    if not 0 <= p < limit:
        raise ValueError(f"p = {p} is not below the distillation threshold {limit:.4g}")

    def cost(levels) -> float:
        try:
            return pi8_log_overhead(OverheadParams(levels), omega, p, kappa, geometry, eps0_constant)[0]
        except (ValueError, NonConvergentError):
            return math.inf

    best_levels, best_cost, log = None, math.inf, []
    for l_max in range(max_levels + 1):
        for start in _starts(l_max, omega, p, kappa, geometry, eps0_constant):
            levels, c = _descend(list(start), cost)
            log.append((l_max, tuple(levels), c))
            if c < best_cost:
                best_levels, best_cost = tuple(levels), c
    if best_levels is None:
        raise SearchExhaustedError("no feasible distillation schedule")
    _, top, eps_gate = pi8_log_overhead(OverheadParams(best_levels), omega, p, kappa, geometry, eps0_constant)
    return OverheadResult(
        o3=math.exp(best_cost),
        levels=best_levels,
        eps_top=eps_gate,
        eps_a=top.eps_a,
        eps_y=top.eps_y,
        omega=omega,
        gate="pi8",
        search_log=tuple(log),
    )


def _descend(levels: list[tuple[int, int]], cost) -> tuple[list[tuple[int, int]], float]:
    current = cost(tuple(levels))
    steps = (64, 16, 4, 1)
    improved = True
    while improved:
        improved = False
        for step in steps:
            for i in range(len(levels)):
                for dl, dd in ((step, 0), (-step, 0), (0, step), (0, -step), (step, step // 5), (-step, -(step // 5))):
                    lam, d = levels[i][0] + dl, levels[i][1] + dd
                    if not lam > d >= 1:
                        continue
                    trial = levels[:i] + [(lam, d)] + levels[i + 1 :]
                    c = cost(tuple(trial))
                    if c < current - 1e-12:
                        levels, current, improved = trial, c, True
    return levels, current


# -- scaling -------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingModel:
    matrix: np.ndarray
    spectrum: tuple[float, ...]
    exponent: float
    uncoupled_exponents: tuple[float, float]
    recursion_deviation: float = 0.0


def scaling_model(
    geometry: dict[str, GateGeometry] = GATE_GEOMETRY,
    lam0: int = 30,
    d0: int = 6,
    p: float = 0.0025,
    kappa: float = DEFAULT_KAPPA,
) -> ScalingModel:
    """Linearised recursion on (O_A, O_Y, lambda^3, d, ln eps_A, ln eps_Y).

    ``recursion_deviation`` is the largest relative gap between the full
    recursion and the linear model after three levels of the coupled
    ladder starting at (lam0, d0).
    """
    m = np.zeros((6, 6))
    m[0, :3] = [15, float(Y_PER_A_ROUND), OPS_PER_CELL * geometry["a"].volume]
    m[1, 1:3] = [7, OPS_PER_CELL * geometry["y"].volume]
    m[2, 2] = 27
    m[3, 3] = m[4, 4] = m[5, 5] = 3
    # upper triangular: the spectrum is the diagonal
    spectrum = tuple(float(x) for x in np.diag(m))
    dominant = max(spectrum)
    full, linear = linear_vs_recursion(lam0, d0, 3, p, kappa, geometry, matrix=m)
    deviation = float(np.max(np.abs(full / linear - 1)))
    return ScalingModel(m, spectrum, math.log(dominant, 3), (math.log(15, 3), math.log(7, 3)), deviation)


def linear_vs_recursion(
    lam0: int,
    d0: int,
    levels: int,
    p: float,
    kappa: float = DEFAULT_KAPPA,
    geometry: dict[str, GateGeometry] = GATE_GEOMETRY,
    matrix: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """(O_A, O_Y) after ``levels`` rounds from the full recursion and from the linear model.

    Both use the coupled ladder lambda_l = 3^l lambda_0, d_l = 3^l d_0.
    """
    params = OverheadParams(tuple((lam0 * 3**l, d0 * 3**l) for l in range(levels + 1)))
    rec = distillation_recursion(params, 6 * p, kappa, geometry)[-1]
    m = scaling_model(geometry).matrix if matrix is None else matrix
    v = np.array([OPS_PER_CELL, OPS_PER_CELL, float(lam0) ** 3, d0, 0.0, 0.0])
    for _ in range(levels):
        v = m @ v
    return np.array([rec.o3_a, rec.o3_y]), v[:2]


def fit_log_power(omegas, o3) -> tuple[float, float]:
    """Exponent b of O3 = A (ln Omega + c)^b, with the offset c fitted too.

    Returns (b, c).  The offset absorbs the additive constant in the optimal
    lambda, which otherwise biases a plain log-log slope far below the
    asymptotic exponent over any practical range of Omega.
    """
    from scipy.optimize import least_squares

    x = np.log(np.asarray(omegas, dtype=float))
    y = np.log(np.asarray(o3, dtype=float))
    if len(x) < 4:
        raise ValueError("the three-parameter fit needs at least four points")

    def resid(theta):
        ln_a, b, c = theta
        return ln_a + b * np.log(x + c) - y

    lo_c = -float(x.min()) + 1e-6
    fit = least_squares(resid, x0=[0.0, 3.0, 10.0], bounds=([-np.inf, 0.0, lo_c], [np.inf, 10.0, 1e3]))
    return float(fit.x[1]), float(fit.x[2])


def naive_log_slope(omegas, o3) -> float:
    """Least-squares slope of ln O3 against ln ln Omega."""
    x = np.log(np.log(np.asarray(omegas, dtype=float)))
    return float(np.polyfit(x, np.log(np.asarray(o3, dtype=float)), 1)[0])


CSV_HEADER = ["omega", "gate", "o3", "lambdas", "ds", "l_max", "eps_a", "eps_y"]


def results_to_csv(results: list[OverheadResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow(
            [
                r.omega,
                r.gate,
                r.o3,
                ";".join(str(lam) for lam, _ in r.levels),
                ";".join(str(d) for _, d in r.levels),
                r.l_max,
                r.eps_a,
                r.eps_y,
            ]
        )
    return buf.getvalue()
