"""Command-line interface: run, validate, dump-structure, estimate.

Exit codes: 0 success, 1 configuration error, 2 physics/integration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import runs
from .config import RunConfig, load_config
from .errors import ConfigError, DeitsimError

PRESETS = ("fig2", "phase-shift", "state-prep", "max-phase", "hot-gas", "custom")


def _resolve_config(args) -> RunConfig:
    preset = args.preset
    if preset == "custom":
        preset = None
        if not args.config:
            raise ConfigError("the custom preset needs at least one --config file")
    return load_config(*(args.config or []), preset=preset)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_run(args) -> int:
    cfg = _resolve_config(args)
    if args.tol is not None:
        cfg.values[("run", "tolerance")] = args.tol
    out = _out_dir(args)
    preset = args.preset or "custom"
    if preset == "fig2" or preset == "phase-shift":
        results = runs.run_fig2(cfg)
        runs.write_timeseries(out / "cross_dipole.csv", results["tiers"], cfg)
        runs.write_csv(out / "summary.csv", runs.summary_rows(results), cfg)
        print(f"wrote {out / 'cross_dipole.csv'} and {out / 'summary.csv'}")
    elif preset == "state-prep":
        table = runs.run_state_prep(cfg)
        runs.write_csv(out / "state_prep.csv", table["rows"], cfg)
        print(f"wrote {out / 'state_prep.csv'}")
    elif preset == "max-phase":
        table = runs.run_max_phase(cfg)
        runs.write_csv(out / "max_phase.csv", table["rows"], cfg)
        print(f"wrote {out / 'max_phase.csv'}")
    elif preset == "hot-gas":
        results = runs.run_hot_gas(cfg)
        runs.write_timeseries(out / "cross_dipole.csv", results["tiers"], cfg)
        runs.write_csv(out / "summary.csv", runs.summary_rows(results), cfg)
        print(f"wrote {out / 'cross_dipole.csv'} and {out / 'summary.csv'}")
    else:
        table = runs.run_custom(cfg, workers=args.workers)
        runs.write_csv(out / "diagnostics.csv", table["rows"], cfg)
        print(f"wrote {out / 'diagnostics.csv'}")
    return 0


def _cmd_validate(args) -> int:
    cfg = _resolve_config(args)
    findings = runs.validate_config(cfg)
    for severity, message in findings:
        print(f"{severity}: {message}")
    if not findings:
        print("info: no findings")
    return 1 if any(sev == "error" for sev, _ in findings) else 0


def _cmd_dump_structure(args) -> int:
    cfg = _resolve_config(args)
    rows = runs.dump_structure_rows(cfg)
    out = _out_dir(args)
    runs.write_csv(out / "structure.csv", rows, cfg)
    print(f"wrote {out / 'structure.csv'}")
    return 0


def _cmd_estimate(args) -> int:
    cfg = _resolve_config(args)
    table = runs.run_max_phase(cfg)
    row = table["rows"][0]
    width = max(len(k) for k in row)
    for key, value in row.items():
        print(f"{key:<{width}}  {value:.6g}" if isinstance(value, float) else f"{key:<{width}}  {value}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deitsim",
        description="Double-EIT cross-phase modulation models for the Rb-87 D1 line",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--preset", choices=PRESETS, help="named parameter preset")
        p.add_argument(
            "--config",
            action="append",
            metavar="PATH",
            help="config file; may repeat, later files override earlier ones",
        )
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--workers", type=int, default=1, help="parallel sweep workers")
        p.add_argument("--tol", type=float, default=None, help="integrator tolerance override")

    for name, fn, help_text in (
        ("run", _cmd_run, "run a preset or custom configuration"),
        ("validate", _cmd_validate, "check a configuration without running"),
        ("dump-structure", _cmd_dump_structure, "export Zeeman energies as CSV"),
        ("estimate", _cmd_estimate, "print the single-photon phase estimate table"),
    ):
        p = sub.add_parser(name, help=help_text)
        common(p)
        p.set_defaults(fn=fn)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DeitsimError as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
