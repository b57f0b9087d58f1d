"""Command-line entry point: ``carsrecon <stage> [--config FILE] [--out DIR]``."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import desk_config, full_config, load_config
from .pipeline import STAGES, StageError, run_pipeline, run_stage, validate

PRESETS = {
    "li2_desk": lambda: desk_config("li2"),
    "dli2_desk": lambda: desk_config("dli2"),
    "li2_full": lambda: full_config("li2"),
    "dli2_full": lambda: full_config("dli2"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--config", help="key = value configuration file")
    src.add_argument("--preset", choices=sorted(PRESETS), help="built-in configuration (default li2_desk)")
    common.add_argument("--out", help="output directory (overrides output.dir)")
    common.add_argument("--mode", choices=("direct", "closure"), help="signal synthesis route")
    common.add_argument("--strategy", choices=("beam", "exhaustive", "greedy"), help="sign search strategy")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="carsrecon", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "eigs": "ground-state eigenbasis",
        "synth": "synthesise the CARS signal cube",
        "invert": "recover c_g(t) up to sign from the cube",
        "signs": "resolve the signs and assemble the wavepacket",
        "potential": "invert the wavepacket for the excited-state potential",
        "pipeline": "run every stage in order",
        "validate": "run the invariant checks and print a report",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return p


def _config(args):
    overrides = {"out_dir": args.out, "synth_mode": args.mode, "strategy": args.strategy}
    if args.config:
        return load_config(args.config, **overrides)
    cfg = PRESETS[args.preset or "li2_desk"]()
    for k, v in overrides.items():
        if v is not None:
            setattr(cfg, k, v)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
    except (OSError, ValueError) as exc:
        print(f"[config] {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "validate":
            report = validate(cfg, cfg.out_dir)
            print(report.text())
            return 0 if report.ok else 1
        if args.command == "pipeline":
            manifest = run_pipeline(cfg)
        else:
            manifest = run_stage(cfg, args.command)
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    for name in STAGES:
        if name in manifest.stages:
            s = manifest.stages[name]
            print(f"{name:10s} {s['status']:6s} {s['seconds']:8.2f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
