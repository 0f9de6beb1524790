"""Command-line interface: report, detect, simulate, validate, serve.

Exit codes: 0 success, 1 I/O failure (unreadable or missing files), 2 usage
or validation failure (bad flags, malformed data, unknown tags, missing
embeddings). Machine-readable JSON goes to --out; the human rendering (or
JSON with --format json) goes to stdout. Outputs are byte-identical across
runs with identical inputs and seeds.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .audit import AuditState, audit_snapshot
from .cluster import detect_hidden_strata
from .errors import StrataError
from .io import load_evaluation_set, load_schema, save_evaluation_set
from .model import validate_against_schema
from .synth import generate_planted, load_plant_config

__all__ = ["main", "entry"]


def _dump_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_out(obj: dict, out: str | None) -> None:
    if out:
        Path(out).write_text(_dump_json(obj), encoding="utf-8")


def _add_data_args(parser: argparse.ArgumentParser, schema_required: bool) -> None:
    parser.add_argument("--data", required=True, help="evaluation set (CSV or JSONL)")
    parser.add_argument(
        "--schema",
        required=schema_required,
        help="subclass schema JSON" + ("" if schema_required else " (optional)"),
    )
    parser.add_argument("--embeddings", help="sidecar embedding CSV keyed by id")


def _add_output_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("table", "json"), default="table")
    parser.add_argument("--out", help="write the JSON result to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strata",
        description="Measure hidden stratification in classifier evaluation sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    report = sub.add_parser("report", help="stratified per-subclass performance report")
    _add_data_args(report, schema_required=True)
    report.add_argument("--audit-log", help="JSONL tag event log to merge over ingested tags")
    report.add_argument("--threshold", type=float, default=0.5)
    report.add_argument("--alpha", type=float, default=0.05)
    report.add_argument("--bootstrap", type=int, default=1000, metavar="B")
    report.add_argument("--seed", type=int, default=0)
    _add_output_args(report)

    detect = sub.add_parser("detect", help="k-means slice discovery over embeddings")
    _add_data_args(detect, schema_required=False)
    detect.add_argument("--ks", default="2,3,4,5", help="comma-separated k values")
    detect.add_argument("--min-size", type=int, default=100)
    detect.add_argument("--threshold", type=float, default=0.5)
    detect.add_argument("--seed", type=int, default=0)
    detect.add_argument("--max-iter", type=int, default=300)
    detect.add_argument("--tol", type=float, default=1e-6)
    detect.add_argument("--normalize", action="store_true", help="z-score embeddings first")
    _add_output_args(detect)

    simulate = sub.add_parser("simulate", help="generate a planted-strata evaluation set")
    simulate.add_argument("--config", required=True, help="planted-set config JSON")
    simulate.add_argument("--out", required=True, help="output evaluation set path")
    simulate.add_argument("--truth-out", help="ground-truth sidecar CSV (default: <out>.truth.csv)")
    simulate.add_argument("--seed", type=int, help="override the config seed")
    simulate.add_argument("--data-format", choices=("csv", "jsonl"))

    validate = sub.add_parser("validate", help="check a set against a schema")
    _add_data_args(validate, schema_required=True)
    _add_output_args(validate)

    serve = sub.add_parser("serve", help="run the local audit service (backs the workbench UI)")
    _add_data_args(serve, schema_required=True)
    serve.add_argument("--audit-log", help="JSONL event log (created if missing, appended to)")
    serve.add_argument("--threshold", type=float, default=0.5)
    serve.add_argument("--alpha", type=float, default=0.05)
    serve.add_argument("--bootstrap", type=int, default=1000, metavar="B")
    serve.add_argument("--seed", type=int, default=0)
    serve.add_argument("--ks", default="2,3,4,5")
    serve.add_argument("--min-size", type=int, default=100)
    serve.add_argument("--bind", default="127.0.0.1:8237", help="host:port to listen on")
    serve.add_argument("--ui-dir", help="directory with the built workbench UI to serve at /")

    return parser


def _parse_ks(raw: str) -> tuple[int, ...]:
    try:
        ks = tuple(int(part) for part in raw.split(",") if part.strip())
    except ValueError:
        raise StrataError(f"--ks expects comma-separated integers, got {raw!r}") from None
    if not ks:
        raise StrataError("--ks expects at least one k")
    return ks


def cmd_report(args: argparse.Namespace) -> int:
    evalset = load_evaluation_set(args.data, embeddings=args.embeddings)
    schema = load_schema(args.schema)
    state = AuditState(evalset)
    if args.audit_log and Path(args.audit_log).exists():
        state = AuditState.load(args.audit_log, evalset)
    report = audit_snapshot(
        evalset, state, schema,
        threshold=args.threshold, alpha=args.alpha, b=args.bootstrap, seed=args.seed,
    )
    _write_out(report.to_json_dict(), args.out)
    if args.format == "json":
        sys.stdout.write(_dump_json(report.to_json_dict()))
    else:
        print(report.render_table())
    return 0


def cmd_detect(args: argparse.Namespace) -> int:
    evalset = load_evaluation_set(args.data, embeddings=args.embeddings)
    schema = load_schema(args.schema) if args.schema else None
    finding = detect_hidden_strata(
        evalset,
        schema,
        ks=_parse_ks(args.ks),
        min_size=args.min_size,
        threshold=args.threshold,
        seed=args.seed,
        max_iter=args.max_iter,
        tol=args.tol,
        normalize=args.normalize,
    )
    _write_out(finding.to_json_dict(), args.out)
    if args.format == "json":
        sys.stdout.write(_dump_json(finding.to_json_dict()))
    else:
        print(finding.render_table())
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_plant_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    evalset, truth = generate_planted(config)
    save_evaluation_set(evalset, args.out, format=args.data_format)
    truth_path = args.truth_out or f"{args.out}.truth.csv"
    with open(truth_path, "w", encoding="utf-8") as handle:
        handle.write("id,tag\n")
        for record_id, tag in truth.items():
            handle.write(f"{record_id},{tag}\n")
    print(f"wrote {len(evalset)} records to {args.out}, truth map to {truth_path}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    evalset = load_evaluation_set(args.data, embeddings=args.embeddings)
    schema = load_schema(args.schema)
    report = validate_against_schema(evalset, schema)
    _write_out(report.to_json_dict(), args.out)
    if args.format == "json":
        sys.stdout.write(_dump_json(report.to_json_dict()))
    else:
        print(f"unknown tags: {len(report.unknown_tags)}")
        for record_id, tag in report.unknown_tags[:20]:
            print(f"  {record_id}: {tag}")
        print(f"exclusivity violations: {len(report.exclusivity_violations)}")
        for record_id, axis, tags in report.exclusivity_violations[:20]:
            print(f"  {record_id}: {axis} has {', '.join(tags)}")
        print(f"untagged positives: {report.untagged_positive_count}")
        for axis, fraction in report.coverage.items():
            print(f"coverage[{axis}] = {fraction:.3f}")
    return 0 if report.clean else 2


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import Session, SessionConfig, create_app

    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise StrataError(f"--bind expects host:port, got {args.bind!r}")
    config = SessionConfig(
        data=Path(args.data),
        schema=Path(args.schema),
        embeddings=Path(args.embeddings) if args.embeddings else None,
        audit_log=Path(args.audit_log) if args.audit_log else None,
        threshold=args.threshold,
        alpha=args.alpha,
        bootstrap_b=args.bootstrap,
        seed=args.seed,
        ks=_parse_ks(args.ks),
        min_size=args.min_size,
        ui_dir=Path(args.ui_dir) if args.ui_dir else None,
    )
    app = create_app(Session(config))
    uvicorn.run(app, host=host, port=int(port), log_level="info")
    return 0


_COMMANDS = {
    "report": cmd_report,
    "detect": cmd_detect,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except StrataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
