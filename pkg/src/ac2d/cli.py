"""Command line interface.

Subcommands: ``run`` executes a config file and writes the delimited outputs;
``study`` runs a spatial or temporal refinement study; ``presets`` lists or
prints the bundled experiment configurations; ``report`` renders figures from
a finished run directory; ``version`` prints the package version.

Exit codes: 0 on success, 2 for configuration errors, 3 for numeric failures.
The ``AC2D_OUTPUT_DIR`` environment variable overrides the configured output
directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .config import emit_config, parse_config
from .errors import ConfigError, NumericError
from .fileio import write_rates, write_run_outputs
from .presets import PRESETS, get_preset
from .study import run_convergence_study

OUTPUT_DIR_ENV = "AC2D_OUTPUT_DIR"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ac2d", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configuration file")
    p_run.add_argument("config", help="path to the config file")
    p_run.add_argument("--output-dir", help="override the configured output directory")

    p_study = sub.add_parser("study", help="run a refinement study")
    p_study.add_argument("config", help="path to the base config file")
    p_study.add_argument("--axis", choices=("spatial", "temporal"), required=True)
    p_study.add_argument("--levels", type=int, default=4)
    p_study.add_argument("--output-dir", help="override the configured output directory")

    p_presets = sub.add_parser("presets", help="list or print bundled presets")
    presets_sub = p_presets.add_subparsers(dest="presets_command", required=True)
    presets_sub.add_parser("list", help="list preset names")
    p_show = presets_sub.add_parser("show", help="print a preset as a config file")
    p_show.add_argument("name")

    p_report = sub.add_parser("report", help="render figures from a run directory")
    p_report.add_argument("run_dir", help="directory with diagnostics.csv")

    sub.add_parser("version", help="print the package version")
    return parser


def _resolve_output_dir(cfg, override: str | None):
    out = override or os.environ.get(OUTPUT_DIR_ENV) or cfg.output_dir
    return cfg.with_output_dir(str(out))


def _cmd_run(args) -> int:
    cfg = _resolve_output_dir(parse_config(args.config), args.output_dir)
    if cfg.solver == "full":
        from .full_rank import fr_run
        result = fr_run(cfg)
    else:
        from .dlr import dlr_run
        result = dlr_run(cfg)
    written = write_run_outputs(result, cfg, cfg.output_dir)
    for path in written:
        print(path)
    return 0


def _cmd_study(args) -> int:
    cfg = _resolve_output_dir(parse_config(args.config), args.output_dir)
    result = run_convergence_study(cfg, args.axis, args.levels)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rates_path = out / "rates.csv"
    write_rates(result.params, result.errors, result.pairwise_orders, rates_path)
    print(rates_path)
    if result.exact:
        print("exact: errors at machine noise, no order fitted")
    else:
        print(f"fitted slope: {result.slope:.3f}")
        for p, e, o in zip(result.params[1:], result.errors[1:], result.pairwise_orders):
            print(f"  param {p:g}: error {e:.4e}, pairwise order {o:.3f}")
    return 0


def _cmd_presets(args) -> int:
    if args.presets_command == "list":
        width = max(len(name) for name in PRESETS)
        for name in sorted(PRESETS):
            print(f"{name:<{width}}  {PRESETS[name].description}")
        return 0
    print(emit_config(get_preset(args.name).config), end="")
    return 0


def _cmd_report(args) -> int:
    from .plots import render_run_report
    for path in render_run_report(args.run_dir):
        print(path)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "study":
            return _cmd_study(args)
        if args.command == "presets":
            return _cmd_presets(args)
        if args.command == "report":
            return _cmd_report(args)
        if args.command == "version":
            print(__version__)
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
