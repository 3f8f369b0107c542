"""Command-line entry point: run one cell, the full matrix, or catalog queries.

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from multiprocessing import get_context
from pathlib import Path

from . import catalog as catalog_mod
from .metrics import write_csv
from .run import run_cell
from .scenarios import SIZE_ORDER, ScenarioConfig, cell_matrix


class ConfigError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcnsim",
        description="Deterministic payment-channel-network routing simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", type=Path, default=None,
                       help="JSON file with ScenarioConfig fields")
        p.add_argument("--scenario", default=None)
        p.add_argument("--size", default=None, choices=list(SIZE_ORDER) + [None])
        p.add_argument("--protocol", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--payments", type=int, default=None)
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--trace", action="store_true",
                       help="write a per-run event trace log")

    run_p = sub.add_parser("run", help="execute a single scenario cell")
    add_common(run_p)

    matrix_p = sub.add_parser("matrix", help="execute the scenario matrix")
    add_common(matrix_p)
    matrix_p.add_argument("--seeds", type=int, default=1,
                          help="number of seeds (base..base+s-1)")
    matrix_p.add_argument("--jobs", type=int, default=1,
                          help="parallel worker processes")

    cat_p = sub.add_parser("catalog", help="query the protocol classification table")
    cat_p.add_argument("query", choices=["shortlist", "selected"])
    return parser


def load_config(args) -> ScenarioConfig:
    fields = {}
    if args.config is not None:
        try:
            fields = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise IOError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    cfg = ScenarioConfig()
    known = set(cfg.__dataclass_fields__)
    unknown = set(fields) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("capacity_range", "amount_range", "latency_ms"):
        if key in fields:
            fields[key] = tuple(fields[key])
    cfg = replace(cfg, **fields)
    for name in ("scenario", "size", "protocol", "seed", "payments"):
        v = getattr(args, name, None)
        if v is not None:
            cfg = replace(cfg, **{name: v})
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def out_dir(args) -> Path:
    env = os.environ.get("PCNSIM_OUT")
    if env:
        return Path(env)
    return args.out if args.out is not None else Path(".")


def _write_outputs(directory: Path, records, configs) -> None:
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IOError(f"cannot create output directory: {exc}") from exc
    write_csv(records, directory / "results.csv")
    payload = [cfg.to_dict() for cfg in configs]
    (directory / "config.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _run_one(arg):
    cfg, trace_path = arg
    if trace_path is None:
        return run_cell(cfg)
    lines = []
    record = run_cell(cfg, trace=lines.append)
    Path(trace_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return record


def cmd_run(args) -> int:
    cfg = load_config(args)
    directory = out_dir(args)
    trace_path = None
    if args.trace:
        directory.mkdir(parents=True, exist_ok=True)
        trace_path = directory / f"trace_{cfg.scenario}_{cfg.size}_{cfg.protocol}_{cfg.seed}.log"
    record = _run_one((cfg, trace_path))
    _write_outputs(directory, [record], [cfg])
    print(f"wrote {directory / 'results.csv'} (1 row)")
    return 0


def cmd_matrix(args) -> int:
    base = load_config(args)
    seeds = range(base.seed, base.seed + args.seeds)
    scenarios = [args.scenario] if args.scenario else None
    sizes = [args.size] if args.size else None
    protocols = [args.protocol] if args.protocol else None
    try:
        cells = cell_matrix(base, seeds=seeds, scenarios=scenarios, sizes=sizes,
                            protocols=protocols)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    directory = out_dir(args)
    jobs = max(1, args.jobs)
    work = [(cfg, None) for cfg in cells]
    if jobs == 1:
        records = [_run_one(w) for w in work]
    else:
        # cells are independent; collection order is fixed by the matrix order
        with get_context("spawn").Pool(processes=jobs) as pool:
            records = pool.map(_run_one, work)
    _write_outputs(directory, records, cells)
    print(f"wrote {directory / 'results.csv'} ({len(records)} rows)")
    return 0


def cmd_catalog(args) -> int:
    cat = catalog_mod.load_catalog()
    names = (catalog_mod.shortlist(cat) if args.query == "shortlist"
             else catalog_mod.selected(cat))
    for name in names:
        print(name)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "matrix":
            return cmd_matrix(args)
        if args.command == "catalog":
            return cmd_catalog(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except IOError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
