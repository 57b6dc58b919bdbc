"""Command-line front end.

Exit codes: 0 success, 1 validation findings, 2 input or usage errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .ingest import IngestError, load_dataset, pair_documents
from .matching import match_groups
from .metrics import evaluate_pairs
from .model import EvalConfig, MissingDocPolicy, validate_document
from .report import render_csv, render_table, report_to_dict, to_json
from .rpa import MissingConfidenceError, default_grid, knee_point, sweep, to_csv

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_INPUT = 2


class UsageError(Exception):
    pass


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _config(args) -> EvalConfig:
    policy = MissingDocPolicy.TREAT_AS_EMPTY if args.missing_doc == "empty" else MissingDocPolicy.ERROR
    return EvalConfig(normalization=args.normalize, missing_doc_policy=policy, infer_group_type=args.infer_group_type)


def _manifest(args, config: EvalConfig, warnings: dict[str, int], extra: Optional[dict] = None) -> dict:
    config_echo = {
        "normalization": config.normalization.value,
        "missing_doc_policy": config.missing_doc_policy.value,
        "infer_group_type": config.infer_group_type,
    }
    if extra:
        config_echo.update(extra)
    return {
        "tool": "kieval",
        "version": __version__,
        "config": config_echo,
        "inputs": {
            "gt": {"path": args.gt, "sha256": _sha256(args.gt)},
            "pred": {"path": args.pred, "sha256": _sha256(args.pred)},
        },
        "timestamp": None if args.no_timestamp else datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "warnings": warnings,
    }


def _load_pair(args, config: EvalConfig):
    gt = load_dataset(args.gt, config)
    pred = load_dataset(args.pred, config)
    problems = []
    for ds in (gt, pred):
        for doc in ds.documents:
            problems.extend(f"{ds.source_path}: {p}" for p in validate_document(doc))
    if problems:
        raise IngestError("invalid input:\n  " + "\n  ".join(problems))
    warnings = {"unknown_fields": gt.unknown_fields + pred.unknown_fields}
    return gt, pred, pair_documents(gt, pred, config), warnings


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_evaluate(args) -> int:
    config = _config(args)
    _, _, pairs, warnings = _load_pair(args, config)
    if warnings["unknown_fields"]:
        print(f"warning: {warnings['unknown_fields']} unknown JSON field(s) ignored", file=sys.stderr)
    report = evaluate_pairs(pairs, keep_per_doc=args.per_doc, jobs=args.jobs)
    data = report_to_dict(report, _manifest(args, config, warnings))
    if args.format == "json":
        text = to_json(data)
    elif args.format == "csv":
        text = render_csv(data, per_type=args.per_type)
    else:
        text = render_table(data, per_type=args.per_type)
    _emit(text, args.out)
    return EXIT_OK


def _grid_from_args(args) -> tuple[float, ...]:
    if args.tau_list is not None:
        items = [s for s in args.tau_list.split(",") if s.strip()]
        if not items:
            raise UsageError("--tau-list must name at least one threshold")
        try:
            grid = tuple(float(s) for s in items)
        except ValueError as exc:
            raise UsageError(f"--tau-list: {exc}") from exc
    else:
        if args.tau_steps < 1:
            raise UsageError("--tau-steps must be at least 1")
        grid = default_grid(args.tau_min, args.tau_max, args.tau_steps)
    try:
        EvalConfig(tau_grid=grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return grid


def cmd_sweep(args) -> int:
    grid = _grid_from_args(args)
    config = _config(args)
    _, _, pairs, warnings = _load_pair(args, config)
    matches = [match_groups(pred, gt) for gt, pred in pairs]
    points = sweep(matches, grid)
    _emit(to_csv(points), args.out)

    knee = knee_point(points, args.auto_rate_floor) if args.auto_rate_floor is not None else None
    summary = {
        "manifest": _manifest(
            args, config, warnings, {"tau_grid": list(grid), "auto_rate_floor": args.auto_rate_floor}
        ),
        "points": len(points),
        "auto_rate_floor": args.auto_rate_floor,
        "knee": None
        if knee is None
        else {"tau": knee.tau, "auto_rate": knee.auto_rate, "kieval_aligned_tau": knee.kieval_aligned_tau},
    }
    text = json.dumps(summary, indent=2) + "\n"
    if args.summary:
        Path(args.summary).write_text(text, encoding="utf-8")
    else:
        sys.stderr.write(text)
    return EXIT_OK


def cmd_validate(args) -> int:
    config = EvalConfig(infer_group_type=args.infer_group_type)
    dataset = load_dataset(args.path, config)
    problems = [p for doc in dataset.documents for p in validate_document(doc)]
    for p in problems:
        print(p)
    if dataset.unknown_fields:
        print(f"warning: {dataset.unknown_fields} unknown JSON field(s) ignored", file=sys.stderr)
    return EXIT_FINDINGS if problems else EXIT_OK


def cmd_report(args) -> int:
    try:
        data = json.loads(Path(args.report).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise IngestError(f"{args.report}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if args.format == "csv":
        text = render_csv(data, per_type=args.per_type)
    else:
        text = render_table(data, per_type=args.per_type)
    _emit(text, args.out)
    return EXIT_OK


def _add_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gt", required=True, help="ground-truth dataset JSON")
    p.add_argument("--pred", required=True, help="prediction dataset JSON")
    p.add_argument("--normalize", choices=["none", "trim", "casefold", "trim+casefold"], default="none")
    p.add_argument("--missing-doc", choices=["error", "empty"], default="error")
    p.add_argument("--infer-group-type", action="store_true", help="infer a missing group_type from the entity-type prefix")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp so reports are byte-stable")
    p.add_argument("--out", help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kieval", description="Group-aware evaluation of key information extraction.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    _add_inputs(p)
    p.add_argument("--format", choices=["json", "csv", "table"], default="json")
    p.add_argument("--per-doc", action="store_true")
    p.add_argument("--per-type", action="store_true")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for per-document evaluation")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="automation rate vs post-review accuracy over confidence thresholds")
    _add_inputs(p)
    p.add_argument("--tau-min", type=float, default=0.0)
    p.add_argument("--tau-max", type=float, default=1.0)
    p.add_argument("--tau-steps", type=int, default=101)
    p.add_argument("--tau-list", help="comma-separated thresholds, overrides --tau-min/max/steps")
    p.add_argument("--auto-rate-floor", type=float, help="report the largest tau whose auto rate reaches this value")
    p.add_argument("--summary", help="write the JSON summary here (default: stderr)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="check a dataset file")
    p.add_argument("path")
    p.add_argument("--infer-group-type", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report", help="re-render a saved JSON report")
    p.add_argument("report")
    p.add_argument("--format", choices=["csv", "table"], default="table")
    p.add_argument("--per-type", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"kieval: error: {exc}", file=sys.stderr)
    except MissingConfidenceError as exc:
        print(f"kieval: error: {exc}", file=sys.stderr)
    except (IngestError, OSError) as exc:
        print(f"kieval: error: {exc}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
