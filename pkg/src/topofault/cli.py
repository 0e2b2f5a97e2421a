"""Command-line front end: threshold, decay, overhead, distill and rewrite runs.

Every subcommand prints a short summary; with ``--out DIR`` it also writes
``<command>.csv`` and a schema-versioned ``<command>.json`` there.  Options
may come from a JSON or TOML file given by ``--config``; flags win.
Exit status is 0 on success, 1 on a runtime failure and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import distill, montecarlo, overhead
from .lattice import LatticeSpec
from .montecarlo import Direction, NoCrossingError
from .noise import NoiseParams, iid_noise
from .topo import equivalence_search, equivalent, parse_words, rewrite

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


def parse_ints(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x.strip()]


def parse_grid(text: str) -> list[float]:
    """``a,b,c`` or an inclusive range ``start:stop:step``."""
    text = str(text)
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0 or stop < start:
            raise UsageError(f"bad range '{text}'")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(n)]
    return [float(x) for x in text.split(",") if x.strip()]


def parse_log_grid(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:n`` with n points evenly spaced in log10."""
    text = str(text)
    if ":" in text:
        start, stop, n = text.split(":")
        lo, hi, n = math.log10(float(start)), math.log10(float(stop)), int(n)
        if n < 1:
            raise UsageError(f"bad range '{text}'")
        return [10 ** (lo + (hi - lo) * i / max(n - 1, 1)) for i in range(n)]
    return [float(x) for x in text.split(",") if x.strip()]


def load_config(path: str | None, command: str) -> dict:
    """Top-level keys apply to all commands; a table named after the command overrides them."""
    if not path:
        return {}
    p = Path(path)
    raw = p.read_text()
    data = tomllib.loads(raw) if p.suffix == ".toml" else json.loads(raw)
    flat = {k: v for k, v in data.items() if not isinstance(v, dict)}
    flat.update(data.get(command, {}))
    return {k.replace("-", "_"): v for k, v in flat.items()}


def merge(args: argparse.Namespace, config: dict, defaults: dict) -> argparse.Namespace:
    for key, value in config.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    return args


def as_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).lower()
    if text in ("on", "true", "1", "yes"):
        return True
    if text in ("off", "false", "0", "no"):
        return False
    raise UsageError(f"expected on/off, got '{value}'")


def require_seed(args: argparse.Namespace) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for stochastic runs")
    return int(args.seed)


def _finite(obj):
    # strict JSON has no NaN or infinity
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def write_outputs(args: argparse.Namespace, name: str, csv_text: str | None, summary: dict) -> None:
    if not args.out:
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if csv_text is not None:
        (out / f"{name}.csv").write_text(csv_text)
    doc = {"schema": f"topofault.{name}", "schema_version": SCHEMA_VERSION, **summary}
    (out / f"{name}.json").write_text(json.dumps(_finite(doc), indent=2, sort_keys=True, allow_nan=False) + "\n")


def _config_echo(args: argparse.Namespace, keys: list[str]) -> dict:
    return {k: getattr(args, k) for k in keys}


# -- commands ------------------------------------------------------------------


def cmd_threshold(args: argparse.Namespace) -> int:
    seed = require_seed(args)
    sizes, grid = parse_ints(args.sizes), parse_grid(args.p)
    res = montecarlo.threshold_scan(
        sizes,
        grid,
        int(args.trials),
        seed,
        model=args.noise,
        degree=int(args.degree),
        bootstrap=int(args.bootstrap),
        redundant_gates=as_bool(args.redundant_gates),
    )
    print(f"p_c = {res.p_c:.5g} +- {res.err:.2g}  ({args.noise} noise, sizes {sizes})")
    for pair, v in res.pair_crossings.items():
        print(f"  crossing l={pair[0]},{pair[1]}: {v:.5g}")
    summary = {
        "config": _config_echo(args, ["sizes", "p", "trials", "seed", "noise", "redundant_gates", "degree"]),
        "result": res.summary(),
    }
    write_outputs(args, "threshold", montecarlo.points_to_csv(list(res.points)), summary)
    return 0


def cmd_decay(args: argparse.Namespace) -> int:
    seed = require_seed(args)
    sizes, p = parse_ints(args.sizes), float(args.p)
    noise = iid_noise(p) if args.noise == "iid" else NoiseParams.uniform(p, as_bool(args.redundant_gates))
    points = [montecarlo.estimate_failure(LatticeSpec.cubic(l), noise, int(args.trials), seed) for l in sizes]
    fits = {}
    for direction in Direction:
        try:
            fit = montecarlo.decay_fit_from_points(points, direction)
        except ValueError as exc:
            print(f"{direction.value}: {exc}")
            continue
        r2 = montecarlo.log_linearity(fit)
        fits[direction.value] = {**fit.summary(), "r2": r2}
        print(f"{direction.value}: kappa = {fit.kappa:.3f} +- {fit.kappa_err:.3f}  (sizes {list(fit.sizes_used)}, R^2 {r2:.3f})")
    summary = {"config": _config_echo(args, ["sizes", "p", "trials", "seed", "noise", "redundant_gates"]), "result": fits}
    write_outputs(args, "decay", montecarlo.points_to_csv(points), summary)
    return 0 if fits else 1


def cmd_overhead(args: argparse.Namespace) -> int:
    kappa = float(args.kappa)
    if args.scaling:
        model = overhead.scaling_model(kappa=kappa)
        spectrum = [int(x) if float(x).is_integer() else x for x in model.spectrum]
        print("spectrum: {" + ", ".join(str(x) for x in spectrum) + "}")
        print(f"dominant exponent log3(27) = {model.exponent:.3f}")
        summary = {
            "config": {"kappa": kappa},
            "result": {
                "matrix": model.matrix.tolist(),
                "spectrum": spectrum,
                "exponent": model.exponent,
                "recursion_deviation": model.recursion_deviation,
            },
        }
        write_outputs(args, "overhead", None, summary)
        return 0
    omegas = parse_log_grid(args.omega)
    results = []
    for omega in omegas:
        if args.gate == "pi8":
            eps0 = distill.input_error_constant(as_bool(args.redundant_gates))
            r = overhead.distill_overhead(omega, float(args.p), kappa, eps0_constant=eps0)
        else:
            r = overhead.css_overhead(overhead.GATE_GEOMETRY[args.gate], omega, kappa)
        results.append(r)
        print(f"Omega={omega:.3g}  O3={r.o3:.4g}  levels={list(r.levels)}")
    result = {"o3": [r.o3 for r in results], "levels": [r.levels for r in results]}
    if len(results) >= 4:
        b, c = overhead.fit_log_power(omegas, [r.o3 for r in results])
        slope = overhead.naive_log_slope(omegas, [r.o3 for r in results])
        result.update(exponent=b, offset=c, naive_slope=slope)
        print(f"fit O3 ~ (ln Omega + {c:.2f})^{b:.3f}; plain log-log slope {slope:.3f}")
    summary = {"config": _config_echo(args, ["gate", "omega", "p", "kappa", "redundant_gates"]), "result": result}
    write_outputs(args, "overhead", overhead.results_to_csv(results), summary)
    return 0


def cmd_distill(args: argparse.Namespace) -> int:
    if args.oracle:
        code = distill.CODES[args.oracle]()
        count = distill.undetected_logical_count(code, int(args.weight))
        print(count)
        write_outputs(args, "distill", None, {"config": {"oracle": args.oracle, "weight": int(args.weight)}, "result": {"count": count}})
        return 0
    if args.y_budget:
        value = distill.avg_y_states()
        print(f"{value} = {float(value):.6f} (identity only: {distill.avg_y_states(minimise=False)})")
        write_outputs(args, "distill", None, {"config": {}, "result": {"avg_y_states": str(value)}})
        return 0
    seed = require_seed(args)
    rows, result = [], []
    for name in args.codes.split(","):
        code = distill.CODES[name]()
        for eps in parse_grid(args.eps):
            res = distill.simulate_distillation(code, eps, int(args.trials), seed)
            accept, exact = distill.exact_distillation(code, eps)
            rows.append((name, eps, res))
            result.append({"code": name, "eps_in": eps, "eps_out": res.eps_out, "sigma": res.eps_out_sigma, "exact": exact})
            print(f"{name} eps_in={eps:g}: eps_out={res.eps_out:.4g} +- {res.eps_out_sigma:.2g} (exact {exact:.4g})")
    summary = {"config": _config_echo(args, ["codes", "eps", "trials", "seed"]), "result": result}
    write_outputs(args, "distill", distill.sweep_csv(rows), summary)
    return 0


def cmd_rewrite(args: argparse.Namespace) -> int:
    words = parse_words(Path(args.file).read_text())
    if args.check:
        if len(words) != 2:
            raise UsageError("--check needs a file with two words separated by a '===' line")
        w1, w2 = words
        same, why = equivalent(w1, w2, explain=True)
        search = equivalence_search(w1, w2, depth=int(args.depth))
        print("EQUIVALENT" if same else f"NOT EQUIVALENT ({why})")
        if search.found:
            print(search.format_trace() or "(identical diagrams)")
        else:
            print(f"no rewrite derivation within depth {args.depth}")
        result = {"equivalent": bool(same), "derivation_found": search.found, "trace": search.format_trace()}
        write_outputs(args, "rewrite", None, {"config": {"file": args.file, "depth": int(args.depth)}, "result": result})
        return 0 if same else 1
    if len(words) != 1:
        raise UsageError("expected a single word")
    res = rewrite(words[0], max_steps=int(args.max_steps))
    print(res.format_trace() or "(no rule applies)")
    print(f"-- {res.status} after {len(res.trace)} steps")
    print(res.word.to_text(), end="")
    result = {"status": res.status, "trace": res.format_trace(), "word": res.word.to_text()}
    write_outputs(args, "rewrite", None, {"config": {"file": args.file, "max_steps": int(args.max_steps)}, "result": result})
    return 0


# -- parser --------------------------------------------------------------------

DEFAULTS = {
    "threshold": {"sizes": "4,6,8", "p": "0.005:0.010:0.0005", "trials": 10000, "noise": "full", "redundant_gates": "on", "degree": 2, "bootstrap": 200},
    "decay": {"sizes": "3,4,5,6,7,8", "p": 0.0025, "trials": 100000, "noise": "full", "redundant_gates": "on"},
    "overhead": {"gate": "cnot", "omega": "1e3:1e12:10", "p": 0.0025, "kappa": overhead.DEFAULT_KAPPA, "redundant_gates": "on"},
    "distill": {"codes": "rm15,steane7", "eps": "0.01", "trials": 1_000_000, "weight": 3},
    "rewrite": {"depth": 12, "max_steps": 32},
}


def _common(p: argparse.ArgumentParser, stochastic: bool = True) -> None:
    p.add_argument("--config", help="JSON or TOML file with option values")
    p.add_argument("--out", help="directory for CSV and JSON artifacts")
    if stochastic:
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)


def _noise(p: argparse.ArgumentParser) -> None:
    p.add_argument("--noise", choices=["full", "iid"])
    p.add_argument("--redundant-gates", choices=["on", "off"], dest="redundant_gates")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topofault", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="locate the threshold crossing")
    _common(p)
    _noise(p)
    p.add_argument("--sizes", help="comma-separated lattice sizes")
    p.add_argument("--p", help="error rates: a,b,c or start:stop:step")
    p.add_argument("--degree", type=int)
    p.add_argument("--bootstrap", type=int)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("decay", help="fit the exponential suppression below threshold")
    _common(p)
    _noise(p)
    p.add_argument("--sizes")
    p.add_argument("--p", type=float)
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("overhead", help="resource overhead of logical gates")
    _common(p, stochastic=False)
    p.add_argument("--gate", choices=sorted(overhead.GATE_GEOMETRY) + ["pi8"])
    p.add_argument("--omega", help="circuit sizes: a,b,c or start:stop:n (log spaced)")
    p.add_argument("--p", type=float, help="physical error rate for pi8 gates")
    p.add_argument("--kappa", type=float)
    p.add_argument("--redundant-gates", choices=["on", "off"], dest="redundant_gates")
    p.add_argument("--scaling", action="store_true", help="print the linearised recursion spectrum")
    p.set_defaults(func=cmd_overhead)

    p = sub.add_parser("distill", help="magic state distillation statistics")
    _common(p)
    p.add_argument("--oracle", choices=sorted(distill.CODES), help="print the undetected logical count")
    p.add_argument("--weight", type=int)
    p.add_argument("--y-budget", action="store_true", dest="y_budget", help="average |Y> states per round")
    p.add_argument("--codes")
    p.add_argument("--eps", help="input error rates")
    p.set_defaults(func=cmd_distill)

    p = sub.add_parser("rewrite", help="rewrite an event word or check an identity")
    p.add_argument("file")
    p.add_argument("--check", action="store_true", help="compare the two words in the file")
    p.add_argument("--depth", type=int)
    p.add_argument("--max-steps", type=int, dest="max_steps")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_rewrite)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, args.command)
        merge(args, config, DEFAULTS[args.command])
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"topofault {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError, KeyError, NoCrossingError) as exc:
        print(f"topofault {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
