"""Command-line entry point for running tracking sweeps.

Subcommands: ``run`` executes whatever the config file describes, and the
preset subcommands (fig2, fig3, fig4, table1) run the standard result set.
Flags override the config file; outputs are CSV curves, a summary table and
a plain-text manifest of the resolved configuration.
"""

from __future__ import annotations

import argparse
import sys

from dataclasses import replace

from .harness import emit_csv, parse_config, preset, read_config_file, run_sweep

_PRESETS = ("fig2", "fig3", "fig4", "table1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamtrack",
        description="Monte Carlo beam-tracking sweeps over a vehicular mmWave link.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run",) + _PRESETS:
        p = sub.add_parser(name, help=(
            "run a custom sweep from a config file" if name == "run"
            else f"run the {name} preset sweep"))
        p.add_argument("--config", default=None,
                       help="key=value config file; flags override it")
        p.add_argument("--seed", type=int, default=None, help="master RNG seed")
        p.add_argument("--trials", type=int, default=None,
                       help="Monte Carlo trials per cell")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--filter", choices=("proposed", "baseline", "both"),
                       default=None, help="which filter(s) to run")
    return parser


def _resolve_config(args: argparse.Namespace):
    overrides = {"seed": args.seed, "n_trials": args.trials, "filter": args.filter}
    if args.command == "run":
        return parse_config(args.config, overrides)
    cfg = preset(args.command)
    if args.config is not None:
        cfg = replace(cfg, **read_config_file(args.config))
    for key, value in overrides.items():
        if value is not None:
            cfg = replace(cfg, **{key: value})
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    curves = run_sweep(cfg)
    paths = emit_csv(curves, args.out, cfg)
    for curve in curves:
        crossing = "-" if curve.crossing is None else str(curve.crossing)
        print(f"snr={curve.snr_db:g} dB  speed={curve.speed_kmh:g} km/h  "
              f"filter={curve.filter_name}  crossing_block={crossing}")
    print(f"wrote {len(paths)} files to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
