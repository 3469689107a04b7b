"""Command-line entry point: ``confspace --config cfg.json --suite all --out reports``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .runner import CONFIG_SCHEMA, SUITES, ConfigError, ExperimentConfig, emit, run

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="confspace", description="Run configuration-space verification suites.")
    p.add_argument("--config", type=Path, help="JSON experiment config (defaults apply when omitted)")
    p.add_argument("--suite", choices=list(SUITES) + ["all"], help="suite to run (overrides the config)")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides the config)")
    p.add_argument("--out", type=Path, help="output directory (overrides the config)")
    p.add_argument("--format", choices=["json", "csv", "both"], help="report format (overrides the config)")
    p.add_argument("--print-schema", action="store_true", help="print the config JSON schema and exit")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.print_schema:
        print(json.dumps(CONFIG_SCHEMA, indent=2))
        return EXIT_PASS
    try:
        raw = json.loads(args.config.read_text(encoding="utf-8")) if args.config else {}
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        cfg = ExperimentConfig.from_dict(raw, seed=args.seed, suite=args.suite)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = args.out if args.out is not None else Path(cfg.out_dir)
    fmt = args.format or cfg.format
    report = run(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    for kind in ("json", "csv") if fmt == "both" else (fmt,):
        emit(report, kind, out_dir / f"report.{kind}")
    failed = [c for c in report.checks if not c.passed]
    for c in failed:
        print(f"FAIL {c.suite}/{c.name}: value={c.value} expected={c.expected} residual={c.residual}",
              file=sys.stderr)
    print(f"{len(report.checks) - len(failed)}/{len(report.checks)} checks passed; reports in {out_dir}")
    return EXIT_FAIL if failed else EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
