"""Command line entry point: ``tow-bandit {run,compare,bounds,sweep}``.

Exit status is 0 on success, 2 on configuration errors and 1 on runtime errors.
"""
from __future__ import annotations

import argparse
import logging
import re
import sys
from dataclasses import replace
from pathlib import Path

from . import analysis
from .errors import ConfigError
from .harness import (ExperimentConfig, bounds_report, compare, load_configs, monte_carlo,
                      run_single, sweep, validate, SWEEP_PARAMS, ASDM)
from .report import emit_csv, emit_plot_script, emit_sweep_csv, emit_voltage_csv

log = logging.getLogger("towbandit")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {text}")
    return value


def _values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.=-]+", "_", label) or "curve"


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.samples is not None:
        changes["samples"] = args.samples
    if args.plays is not None:
        changes["plays"] = args.plays
    if changes:
        config = replace(config, **changes)
    validate(config)
    return config


def _configs(args) -> list[ExperimentConfig]:
    if not args.config:
        raise ConfigError("--config is required")
    configs = []
    for path in args.config:
        configs.extend(load_configs(path))
    return [_apply_overrides(c, args) for c in configs]


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _wants(config: ExperimentConfig, kind: str, args) -> bool:
    return kind in config.outputs or (kind == "figure" and args.figure)


def _best_mean(config: ExperimentConfig) -> float:
    return max(config.env.means())


def cmd_run(args) -> int:
    configs = _configs(args)
    if len(configs) != 1:
        raise ConfigError("run takes a single algorithm; use compare for several")
    config = configs[0]
    out = _out_dir(args)
    curve = monte_carlo(config, args.workers)
    curve_path = emit_csv(curve, out / "curve.csv")
    written = [curve_path]
    if "trace" in config.outputs or "voltage" in config.outputs:
        trace = run_single(config, 0)
        if "trace" in config.outputs:
            written.append(emit_csv(trace, out / "trace.csv"))
        if "voltage" in config.outputs:
            if config.algorithm.name != ASDM:
                raise ConfigError("a voltage trace is only defined for the asdm algorithm")
            written.append(emit_voltage_csv(trace, out / "voltage.csv"))
    if "plot_script" in config.outputs:
        written.append(emit_plot_script([curve_path.name], out / "plot.gp", [curve.label],
                                        output="curve_gnuplot.png"))
    if _wants(config, "figure", args):
        from .plotting import render_curves
        written.append(render_curves([curve], out / "curve.png", _best_mean(config)))
    cum, nb = curve.at(curve.plays)
    print(f"algorithm={curve.label}")
    print(f"plays={curve.plays}")
    print(f"samples={curve.samples}")
    print(f"mean_cumulative_reward={cum:.12g}")
    print(f"mean_n_b={nb:.12g}")
    for path in written:
        log.info("wrote %s", path)
    return 0


def cmd_compare(args) -> int:
    configs = _configs(args)
    out = _out_dir(args)
    table = compare(configs, args.workers)
    written = [emit_csv(table, out / "comparison.csv")]
    curve_paths = []
    for curve in table.curves:
        path = emit_csv(curve, out / f"curve_{_slug(curve.label)}.csv")
        curve_paths.append(path)
        written.append(path)
    first = configs[0]
    if any("plot_script" in c.outputs for c in configs):
        written.append(emit_plot_script([p.name for p in curve_paths], out / "plot.gp",
                                        table.labels, output="comparison_gnuplot.png"))
    if any(_wants(c, "figure", args) for c in configs):
        from .plotting import render_curves
        written.append(render_curves(table.curves, out / "comparison.png", _best_mean(first)))
    n = table.plays
    for label, curve in zip(table.labels, table.curves):
        cum, nb = curve.at(n)
        print(f"{label}: mean_cumulative_reward={cum:.12g} mean_n_b={nb:.12g}")
    for path in written:
        log.info("wrote %s", path)
    return 0


def cmd_bounds(args) -> int:
    if args.config:
        config = _configs(args)[0]
        means = config.env.means()
        sigmas = [m.variance() ** 0.5 for m in config.machines]
        mu_a, mu_b, sigma_a, sigma_b = analysis.sorted_pair(means, sigmas)
        alg = config.algorithm
        k = alg.k if alg.k is not None and alg.k_policy == "fixed" else (mu_a + mu_b) / 2
        plays = config.plays
    else:
        missing = [n for n in ("mu_a", "mu_b", "sigma_a") if getattr(args, n) is None]
        if missing:
            raise ConfigError("bounds needs --config or --mu-a, --mu-b and --sigma-a")
        mu_a, mu_b, sigma_a = args.mu_a, args.mu_b, args.sigma_a
        sigma_b = sigma_a if args.sigma_b is None else args.sigma_b
        k = (mu_a + mu_b) / 2 if args.k is None else args.k
        plays = 1000 if args.plays is None else args.plays
    try:
        params = analysis.BoundParams(mu_a, mu_b, sigma_a, sigma_b, k)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    text = bounds_report(params, plays).to_text()
    sys.stdout.write(text)
    if args.out:
        path = _out_dir(args) / "bounds.txt"
        path.write_text(text)
        log.info("wrote %s", path)
    return 0


def cmd_sweep(args) -> int:
    configs = _configs(args)
    if len(configs) != 1:
        raise ConfigError("sweep takes a single algorithm")
    config = configs[0]
    out = _out_dir(args)
    results = sweep(config, args.param, args.values, args.workers)
    written = [emit_sweep_csv(results, out / "sweep.csv")]
    if _wants(config, "figure", args):
        from .plotting import render_sweep
        written.append(render_sweep(results, args.param, out / "sweep.png"))
    for value, curve in results:
        cum, nb = curve.at(curve.plays)
        print(f"{args.param}={value:g}: mean_cumulative_reward={cum:.12g} mean_n_b={nb:.12g}")
    for path in written:
        log.info("wrote %s", path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", action="append", metavar="PATH",
                        help="JSON experiment config (repeatable for compare)")
    common.add_argument("--out", default="out", metavar="DIR", help="output directory (default: out)")
    common.add_argument("--seed", type=_u64, metavar="U64", help="override master_seed")
    common.add_argument("--samples", type=int, metavar="N", help="override Monte Carlo sample count")
    common.add_argument("--plays", type=int, metavar="N", help="override plays per run")
    common.add_argument("--workers", type=int, metavar="N",
                        help="worker processes (default: $TOW_BANDIT_THREADS or CPU count)")
    common.add_argument("--figure", action="store_true", help="also render matplotlib figures")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="tow-bandit",
                                     description="Tug-of-war bandit decision maker experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="Monte Carlo curve for one algorithm")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("compare", parents=[common], help="aligned curves for several algorithms")
    p.set_defaults(func=cmd_compare)
    p = sub.add_parser("sweep", parents=[common], help="sweep one parameter (k, tau, ...)")
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--values", required=True, type=_values, metavar="V1,V2,...")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("bounds", parents=[common], help="closed-form regret bounds")
    p.add_argument("--mu-a", type=float)
    p.add_argument("--mu-b", type=float)
    p.add_argument("--sigma-a", type=float)
    p.add_argument("--sigma-b", type=float)
    p.add_argument("--k", type=float)
    p.set_defaults(func=cmd_bounds, out=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
