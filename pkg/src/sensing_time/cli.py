"""Command line: ``sensing-time {synth,trial,cohort,report}``."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import FILTER_ORDERS, RunConfig
from .events import EventError, read_overrides
from .ingestion import IngestionError, read_key_values
from .pipeline import (
    DegenerateCohort,
    audit_path_for,
    box_document,
    box_svg,
    format_audit,
    format_cohort_table,
    merge_rows,
    process_manifests,
    read_audit,
    read_cohort_table,
    run_cohort,
)
from .stats import EmptyGroup
from .synthgen import CohortSpec, InvalidSpec, generate_cohort, generate_trial, spec_from_mapping, write_cohort

EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_DEGENERATE = 4


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key = value run configuration file")
    g = p.add_argument_group("run configuration (overrides --config)")
    for f in dataclasses.fields(RunConfig):
        if f.name in ("input", "output"):
            continue
        kind = {"int": int, "float": float}.get(f.type, str)
        kw = {"choices": FILTER_ORDERS} if f.name == "filter_order" else {}
        g.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, type=kind, default=None, **kw)


def _config(args) -> RunConfig:
    base = RunConfig.load(args.config) if args.config else RunConfig()
    changes = {f.name: getattr(args, f.name, None) for f in dataclasses.fields(RunConfig)}
    return base.replace(**changes)


def _write_reports(report, out: Path, svg: bool = True) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    (out / "boxstats.json").write_text(box_document(report.box), encoding="utf-8")
    if svg:
        (out / "boxplot.svg").write_text(box_svg(report.box), encoding="utf-8")


def cmd_synth(args) -> int:
    values = read_key_values(args.spec) if args.spec else {}
    if args.seed is not None:
        values["seed"] = str(args.seed)
    spec = spec_from_mapping(values) if values else CohortSpec()
    if isinstance(spec, CohortSpec):
        trials = generate_cohort(spec)
    else:
        trials = [generate_trial(spec)]
    paths = write_cohort(trials, args.out)
    print(f"wrote {len(paths)} trial(s) under {args.out}")
    return 0


def _print_outcomes(outcomes) -> None:
    for o in outcomes:
        m = o.metrics
        print(f"{m.trial_id}\t{m.group}\tst_ms={m.st_ms}\tstatus={m.status}")
        for d in o.diagnostics:
            print(f"  {d}", file=sys.stderr)


def cmd_trial(args) -> int:
    config = _config(args)
    overrides = read_overrides(args.overrides) if args.overrides else []
    outcomes = process_manifests(args.manifests, config, overrides)
    _print_outcomes(outcomes)
    if args.table:
        table = Path(args.table)
        audit_file = audit_path_for(table)
        existing = read_cohort_table(table) if table.exists() else []
        new_ids = {o.metrics.trial_id for o in outcomes}
        old_audit = [e for e in read_audit(audit_file) if e.trial_id not in new_ids] if audit_file.exists() else []
        table.parent.mkdir(parents=True, exist_ok=True)
        table.write_text(format_cohort_table(merge_rows(existing, [o.metrics for o in outcomes])), encoding="utf-8")
        audit = old_audit + [e for o in outcomes for e in o.audit]
        audit_file.write_text(format_audit(audit), encoding="utf-8")
    return 0


def cmd_cohort(args) -> int:
    config = _config(args)
    rows = read_cohort_table(args.table)
    audit_file = audit_path_for(args.table)
    audit = read_audit(audit_file) if audit_file.exists() else []
    report = run_cohort(rows, config, audit)
    _write_reports(report, Path(args.out), svg=not args.no_svg)
    print(f"wrote report for {len(report.valid_rows())} valid trials to {args.out}")
    return 0


def cmd_report(args) -> int:
    config = _config(args)
    root = Path(args.input)
    manifests = sorted(root.rglob(args.pattern))
    if not manifests:
        print(f"error: no {args.pattern} under {root}", file=sys.stderr)
        return EXIT_INPUT
    overrides = read_overrides(args.overrides) if args.overrides else []
    outcomes = process_manifests(manifests, config, overrides)
    for o in outcomes:
        for d in o.diagnostics:
            print(d, file=sys.stderr)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [o.metrics for o in outcomes]
    audit = [e for o in outcomes for e in o.audit]
    (out / "cohort.csv").write_text(format_cohort_table(rows), encoding="utf-8")
    (out / "cohort.audit.csv").write_text(format_audit(audit), encoding="utf-8")
    report = run_cohort(rows, config, audit)
    _write_reports(report, out, svg=not args.no_svg)
    print(f"processed {len(rows)} trials; outputs in {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sensing-time", description="Sensing-time metrics and cohort statistics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic trials with ground truth")
    p.add_argument("spec", nargs="?", type=Path, help="key = value scenario or cohort spec")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("trial", help="process trial manifests and append rows to a cohort table")
    p.add_argument("manifests", nargs="+", type=Path)
    p.add_argument("--table", type=Path, help="cohort CSV to create or update")
    p.add_argument("--overrides", type=Path, help="manual corrections CSV")
    _add_config_flags(p)
    p.set_defaults(func=cmd_trial)

    p = sub.add_parser("cohort", help="run the statistics battery on a cohort table")
    p.add_argument("table", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--no-svg", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_cohort)

    p = sub.add_parser("report", help="process every manifest under a directory and analyse the cohort")
    p.add_argument("input", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--pattern", default="manifest.txt")
    p.add_argument("--overrides", type=Path)
    p.add_argument("--no-svg", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (IngestionError, InvalidSpec, EventError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DegenerateCohort, EmptyGroup) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
