"""Logical failure rates, finite-size threshold crossings and decay fits."""

from __future__ import annotations

import csv
import io
import json
import math
import zlib
from dataclasses import asdict, dataclass, field
from enum import Enum
from functools import lru_cache
from itertools import combinations

import numpy as np

from .decoder import BatchDecoder
from .lattice import LatticeSpec, build_lattice
from .noise import EffectiveEdgeNoise, NoiseParams, effective_channels, iid_noise, sample_flips, substream

CHUNK = 2000
MIN_DECAY_FAILURES = 10


class NoCrossingError(RuntimeError):
    pass


class Direction(str, Enum):
    TIMELIKE = "timelike"
    SPACELIKE = "spacelike"


def wilson_interval(failures: int, trials: int, z: float = 1.959964) -> tuple[float, float]:
    if trials <= 0:
        return (0.0, 1.0)
    phat = failures / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if failures == 0 else max(0.0, centre - half)
    hi = 1.0 if failures == trials else min(1.0, centre + half)
    return (lo, hi)


@dataclass(frozen=True)
class FailurePoint:
    """Failure counts for one (size, noise) point.

    ``failures`` counts nontrivial residual homology on the primal lattice.
    ``axis_failures`` splits primal failures by homology component (one
    trial may count in several).
    """

    l: int
    p: float
    trials: int
    failures: int
    dual_failures: int = 0
    combined_failures: int = 0
    axis_failures: tuple[int, int, int] = (0, 0, 0)

    def __post_init__(self) -> None:
        if not 0 <= self.failures <= self.trials:
            raise ValueError("failures must lie in [0, trials]")

    @property
    def rate(self) -> float:
        return self.failures / self.trials

    @property
    def ci95(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.trials)

    def csv_row(self) -> list:
        lo, hi = self.ci95
        return [self.l, self.p, self.trials, self.failures, self.rate, lo, hi]


CSV_HEADER = ["l", "p", "trials", "failures", "rate", "ci_lo", "ci_hi"]


def points_to_csv(points: list[FailurePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for pt in points:
        w.writerow(pt.csv_row())
    return buf.getvalue()


def _resolve(noise: NoiseParams | EffectiveEdgeNoise) -> EffectiveEdgeNoise:
    return effective_channels(noise) if isinstance(noise, NoiseParams) else noise


def _noise_key(eff: EffectiveEdgeNoise) -> int:
    return zlib.crc32(repr(eff).encode())


@lru_cache(maxsize=32)
def _decoder(spec: LatticeSpec, eff: EffectiveEdgeNoise) -> BatchDecoder:
    return BatchDecoder(build_lattice(spec), eff)


def _nominal_p(noise: NoiseParams | EffectiveEdgeNoise) -> float:
    if isinstance(noise, NoiseParams):
        return noise.p if noise.is_uniform else noise.p_2
    return max(noise.p_timelike, noise.p_spacelike)


def estimate_failure(
    spec: LatticeSpec, params: NoiseParams | EffectiveEdgeNoise, trials: int, seed: int
) -> FailurePoint:
    """Sample, decode both lattices, count nontrivial residual classes.

    Trials run in chunks, each with its own counter-based stream keyed by
    (seed, lattice shape, noise, chunk index); the counts do not depend on
    how chunks are distributed.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    eff = _resolve(params)
    dec = _decoder(spec, eff)
    layout = dec.check_graph.layout
    key = (*spec.sizes, _noise_key(eff))
    primal = dual = combined = 0
    axis = np.zeros(3, dtype=np.int64)
    for chunk, start in enumerate(range(0, trials, CHUNK)):
        shots = min(CHUNK, trials - start)
        bad = []
        for side in range(2):
            rng = substream(seed, *key, chunk, side)
            res = dec.residual_classes(sample_flips(layout, eff, rng, shots))
            bad.append(res.any(axis=1))
            if side == 0:
                axis += res.astype(np.int64).sum(axis=0)
        primal += int(bad[0].sum())
        dual += int(bad[1].sum())
        combined += int((bad[0] | bad[1]).sum())
    return FailurePoint(
        l=spec.size_x,
        p=_nominal_p(params),
        trials=trials,
        failures=primal,
        dual_failures=dual,
        combined_failures=combined,
        axis_failures=tuple(int(a) for a in axis),
    )


# -- threshold -----------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdResult:
    p_c: float
    err: float
    pair_crossings: dict = field(default_factory=dict)
    points: tuple[FailurePoint, ...] = ()
    residuals: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "p_c": self.p_c,
            "err": self.err,
            "pair_crossings": {f"{a}-{b}": v for (a, b), v in self.pair_crossings.items()},
            "chi2_per_dof": self.residuals,
        }


def _fit_curve(ps: np.ndarray, rates: np.ndarray, trials: np.ndarray, p0: float, degree: int) -> np.ndarray:
    var = np.maximum(rates * (1 - rates), 1.0 / trials) / trials
    return np.polyfit(ps - p0, rates, deg=degree, w=1.0 / np.sqrt(var))


def _crossing(ca: np.ndarray, cb: np.ndarray, lo: float, hi: float, p0: float) -> float | None:
    diff = np.polysub(ca, cb)
    roots = np.roots(diff) if np.any(diff[:-1]) else np.array([])
    real = [r.real + p0 for r in roots if abs(r.imag) < 1e-12 and lo <= r.real + p0 <= hi]
    if not real:
        return None
    centre = 0.5 * (lo + hi)
    return min(real, key=lambda x: abs(x - centre))


def crossing_from_counts(
    sizes: list[int],
    p_grid: list[float],
    failures: np.ndarray,
    trials: np.ndarray,
    degree: int = 2,
) -> tuple[float, dict, dict]:
    """Aggregate crossing of fitted rate curves.

    ``failures`` and ``trials`` are indexed [size, p].  Returns the mean
    crossing, the crossing of each size pair, and chi^2 per degree of
    freedom of each size's fit.
    """
    ps = np.asarray(p_grid, dtype=float)
    p0 = float(ps.mean())
    degree = min(degree, len(ps) - 1)
    coeffs, chi2 = {}, {}
    for i, l in enumerate(sizes):
        rates = failures[i] / trials[i]
        c = _fit_curve(ps, rates, trials[i], p0, degree)
        coeffs[l] = c
        var = np.maximum(rates * (1 - rates), 1.0 / trials[i]) / trials[i]
        dof = max(len(ps) - degree - 1, 1)
        chi2[l] = float(np.sum((np.polyval(c, ps - p0) - rates) ** 2 / var) / dof)
    pairs = {}
    for a, b in combinations(sizes, 2):
        x = _crossing(coeffs[a], coeffs[b], float(ps.min()), float(ps.max()), p0)
        if x is None:
            raise NoCrossingError(f"rate curves of sizes {a} and {b} do not cross inside the grid")
        pairs[(a, b)] = x
    return float(np.mean(list(pairs.values()))), pairs, chi2


def threshold_scan(
    sizes: list[int],
    p_grid: list[float],
    trials: int,
    seed: int,
    model: str = "full",
    degree: int = 2,
    bootstrap: int = 200,
    redundant_gates: bool = True,
) -> ThresholdResult:
    """Locate the threshold as the crossing of failure-rate curves.

    ``model`` is ``"full"`` for the gate-level error model or ``"iid"`` for
    independent edge flips with rate p.
    """
    if len(sizes) < 2 or len(p_grid) < 3:
        raise ValueError("need at least two sizes and three grid points")
    points = []
    for l in sizes:
        for p in p_grid:
            noise = iid_noise(p) if model == "iid" else NoiseParams.uniform(p, redundant_gates)
            points.append(estimate_failure(LatticeSpec.cubic(l), noise, trials, seed))
    fails = np.array([pt.failures for pt in points], dtype=float).reshape(len(sizes), len(p_grid))
    tr = np.full_like(fails, float(trials))
    p_c, pairs, chi2 = crossing_from_counts(sizes, p_grid, fails, tr, degree)

    # parametric bootstrap over the binomial counts
    rng = np.random.default_rng(seed)
    rates = fails / tr
    samples = []
    for _ in range(bootstrap):
        try:
            samples.append(crossing_from_counts(sizes, p_grid, rng.binomial(trials, rates).astype(float), tr, degree)[0])
        except NoCrossingError:
            continue
    err = float(np.std(samples, ddof=1)) if len(samples) > 1 else float("nan")
    return ThresholdResult(p_c, err, pairs, tuple(points), chi2)


# -- decay ---------------------------------------------------------------------


def minimal_cycle_count(spec: LatticeSpec, axis: int) -> int:
    """Number of shortest nontrivial cycles winding along ``axis``.

    On the periodic lattice these are exactly the straight lines along the
    axis, one per site of the transverse plane.
    """
    sizes = spec.sizes
    return math.prod(sizes[a] for a in range(3) if a != axis)


@dataclass(frozen=True)
class DecayFit:
    direction: Direction
    kappa: float
    kappa_err: float
    intercept: float = 0.0
    sizes_used: tuple[int, ...] = ()
    points: tuple[FailurePoint, ...] = ()

    def summary(self) -> dict:
        return {
            "direction": self.direction.value,
            "kappa": self.kappa,
            "kappa_err": self.kappa_err,
            "intercept": self.intercept,
            "sizes_used": list(self.sizes_used),
        }


def fit_decay(ls, rates, weights=None) -> tuple[float, float, float]:
    """Weighted least squares of ln(rate) = -kappa * l + c.

    Returns (kappa, kappa_err, c).  ``weights`` are inverse variances of
    ln(rate); for counts this is the number of failures.
    """
    ls = np.asarray(ls, dtype=float)
    y = np.log(np.asarray(rates, dtype=float))
    w = np.ones_like(ls) if weights is None else np.asarray(weights, dtype=float)
    if len(ls) < 2:
        raise ValueError("need at least two sizes for a decay fit")
    a = np.stack([-ls, np.ones_like(ls)], axis=1)
    aw = a * w[:, None]
    cov = np.linalg.inv(a.T @ aw)
    beta = cov @ (aw.T @ y)
    dof = len(ls) - 2
    resid = y - a @ beta
    chi2 = float(resid @ (w * resid)) / dof if dof > 0 else 0.0
    if weights is None:
        cov = cov * chi2
    else:
        # inflate by overdispersion, never shrink below counting statistics
        cov = cov * max(chi2, 1.0)
    return float(beta[0]), float(math.sqrt(max(cov[0, 0], 0.0))), float(beta[1])


def decay_fit_from_points(points: list[FailurePoint], direction: Direction | str) -> DecayFit:
    """Fit the exponential suppression of logical failures along one direction.

    Time-like failures are windings along the time axis; space-like ones pool
    the two spatial axes.  Rates are normalised by the number of shortest
    nontrivial cycles.  Sizes with fewer than MIN_DECAY_FAILURES failures are
    left out of the fit.
    """
    direction = Direction(direction)
    axes = (2,) if direction is Direction.TIMELIKE else (0, 1)
    ls, rates, weights = [], [], []
    for pt in points:
        fails = sum(pt.axis_failures[a] for a in axes)
        if fails < MIN_DECAY_FAILURES:
            continue
        rate = fails / (pt.trials * len(axes))
        ls.append(pt.l)
        rates.append(rate / minimal_cycle_count(LatticeSpec.cubic(pt.l), axes[0]))
        weights.append(fails)
    if len(ls) < 2:
        raise ValueError("fewer than two sizes have enough failures for a decay fit")
    kappa, err, c = fit_decay(ls, rates, weights)
    return DecayFit(direction, kappa, err, c, tuple(ls), tuple(points))


def decay_fit(
    sizes: list[int],
    params: NoiseParams | EffectiveEdgeNoise,
    trials: int,
    seed: int,
    direction: Direction | str,
) -> DecayFit:
    points = [estimate_failure(LatticeSpec.cubic(l), params, trials, seed) for l in sizes]
    return decay_fit_from_points(points, direction)


def log_linearity(fit: DecayFit) -> float:
    """R^2 of the unweighted straight-line fit of ln(rate/N) against l."""
    axes = (2,) if fit.direction is Direction.TIMELIKE else (0, 1)
    ls, ys = [], []
    for pt in fit.points:
        if pt.l in fit.sizes_used:
            fails = sum(pt.axis_failures[a] for a in axes)
            ls.append(pt.l)
            ys.append(math.log(fails / (pt.trials * len(axes)) / pt.l**2))
    r = np.corrcoef(ls, ys)[0, 1]
    return float(r * r)


def to_json(obj) -> str:
    return json.dumps(obj.summary() if hasattr(obj, "summary") else asdict(obj), indent=2, sort_keys=True)
