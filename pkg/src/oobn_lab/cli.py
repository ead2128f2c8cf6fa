"""Command-line front door: validate, infer, scenario, sensitivity, learn,
calibrate and serve.

Exit codes: 0 success, 1 validation/query failure, 2 usage error. Every
failure path emits a machine-readable JSON diagnostic, never a bare
traceback. Reports print with 6 significant decimals by default;
``--precision full`` switches to full double precision.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .errors import (
    InvalidEvidence,
    OobnLabError,
    SchemaError,
    UnknownPreset,
    UnknownVariable,
)
from .learning import Column, Dataset, chow_liu_tree, mle_cpts
from .network import build_network, network_from_json, network_to_dict
from .reporting import DEFAULT_PRECISION, render_report
from .stateless import load_bundle
from .stateless.bundle import DEFAULT_BUNDLE_PATH, save_bundle
from .stateless.calibrate import calibrate
from .stateless.pipeline import BinSpec, discretize, ingest_block_witness_csv
from .stateless.reports import (
    build_infer_report,
    build_model_report,
    build_sensitivity_report,
)
from .stateless.bundle import run_scenario

USAGE_ERRORS = (InvalidEvidence, UnknownPreset, UnknownVariable)


def _bundle_path(args) -> Path:
    if args.bundle:
        return Path(args.bundle)
    env = os.environ.get("OOBN_LAB_BUNDLE")
    if env:
        return Path(env)
    return DEFAULT_BUNDLE_PATH


def _precision(args) -> int | None:
    if args.precision == "full":
        return None
    return int(args.precision)


def _parse_evidence(pairs: list[str]) -> dict[str, str]:
    evidence: dict[str, str] = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise InvalidEvidence(
                f"evidence must be VARIABLE=state, got {pair!r}", value=pair
            )
        name, state = pair.split("=", 1)
        if not name or not state:
            raise InvalidEvidence(
                f"evidence must be VARIABLE=state, got {pair!r}", value=pair
            )
        if name in evidence:
            raise InvalidEvidence(f"variable {name!r} bound twice", variable=name)
        evidence[name] = state
    return evidence


def _emit(report: dict, args) -> None:
    print(render_report(report, _precision(args)))


def _fail(exc: OobnLabError, code: int) -> int:
    print(json.dumps(exc.to_dict(), sort_keys=True), file=sys.stderr)
    return code


# -- subcommands ------------------------------------------------------------------


def cmd_validate(args) -> int:
    path = Path(args.path) if args.path else _bundle_path(args)
    diagnostics: list[dict] = []
    try:
        bundle = load_bundle(path)
    except OobnLabError as exc:
        diagnostics.append(exc.to_dict())
        for line in diagnostics:
            print(json.dumps(line, sort_keys=True))
        return 1
    print(json.dumps(
        {
            "status": "ok",
            "bundle_hash": bundle.bundle_hash,
            "variables": len(bundle.network),
            "templates": len(bundle.library.templates),
            "presets": sorted(bundle.presets),
        },
        sort_keys=True,
    ))
    return 0


def cmd_infer(args) -> int:
    bundle = load_bundle(_bundle_path(args))
    evidence = _parse_evidence(args.evidence)
    _emit(build_infer_report(bundle, evidence), args)
    return 0


def cmd_scenario(args) -> int:
    bundle = load_bundle(_bundle_path(args))
    extra = _parse_evidence(args.evidence)
    if args.preset:
        report = run_scenario(bundle, args.preset, compare=args.compare,
                              extra_evidence=extra)
    else:
        report = run_scenario(bundle, extra, compare=args.compare)
    _emit(report, args)
    return 0


def cmd_sensitivity(args) -> int:
    bundle = load_bundle(_bundle_path(args))
    if "=" not in args.hypothesis:
        raise InvalidEvidence(
            f"--hypothesis must be VARIABLE=state, got {args.hypothesis!r}",
            value=args.hypothesis,
        )
    h_var, h_state = args.hypothesis.split("=", 1)
    evidence = _parse_evidence(args.evidence)
    scenario = None
    if args.scenario and args.scenario != "none":
        preset = bundle.preset(args.scenario)
        evidence = {**preset.evidence, **evidence}
        scenario = args.scenario
    report = build_sensitivity_report(
        bundle,
        (h_var, h_state),
        evidence,
        scenario=scenario,
        include_parameters=not args.evidence_sensitivity,
        include_evidence_ranges=True,
        top=args.top,
    )
    _emit(report, args)
    return 0


def _load_sidecar(path: Path) -> list:
    doc = json.loads(path.read_text(encoding="utf-8"))
    if "columns" not in doc:
        raise SchemaError("sidecar needs a 'columns' list", path=str(path))
    return doc["columns"]


def _dataset_from_csv(args) -> Dataset:
    text = Path(args.data).read_text(encoding="utf-8")
    if args.block_witness:
        bundle = load_bundle(_bundle_path(args))
        return ingest_block_witness_csv(text, bundle.bins())
    if not args.sidecar:
        raise SchemaError("--sidecar is required unless --block-witness is set")
    import csv
    import io

    specs = _load_sidecar(Path(args.sidecar))
    reader = csv.DictReader(io.StringIO(text))
    records = list(reader)
    columns: list[Column] = []
    label_rows: list[list[str]] = [[] for _ in records]
    for spec in specs:
        name = spec["name"]
        if name not in (reader.fieldnames or []):
            from .errors import MissingColumn

            raise MissingColumn(f"CSV is missing column {name!r}", column=name)
        raw = [record[name] for record in records]
        if "bins" in spec:
            bins = BinSpec.from_dict(spec["bins"])
            labels, _ = discretize([float(v) for v in raw], bins)
            columns.append(Column(name, bins.labels))
        else:
            labels = raw
            columns.append(Column(name, tuple(spec["states"])))
        for row, label in zip(label_rows, labels):
            row.append(label)
    return Dataset.from_rows(columns, label_rows)


def cmd_learn(args) -> int:
    dataset = _dataset_from_csv(args)
    if args.chow_liu:
        if not args.root:
            raise SchemaError("--chow-liu requires --root")
        edges = chow_liu_tree(dataset, args.root)
        report = {
            "schema": "chow-liu/1",
            "root": args.root,
            "edges": [list(e) for e in edges],
        }
        _emit(report, args)
        return 0
    if not args.structure:
        raise SchemaError("learn needs --structure or --chow-liu")
    structure = network_from_json(Path(args.structure).read_text(encoding="utf-8"))
    cpts = mle_cpts(structure, dataset, smoothing=args.smoothing)
    fitted = build_network(
        [structure.variable(n) for n in structure.variable_names],
        structure.edges,
        cpts,
    )
    doc = network_to_dict(fitted)
    if args.out:
        Path(args.out).write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        print(json.dumps({"status": "ok", "out": str(args.out),
                          "rows": len(dataset)}, sort_keys=True))
    else:
        _emit(doc, args)
    return 0


def cmd_calibrate(args) -> int:
    bundle = load_bundle(_bundle_path(args))
    targets = None
    if args.targets:
        targets = json.loads(Path(args.targets).read_text(encoding="utf-8"))
    calibrated, report = calibrate(bundle, targets=targets,
                                   max_sweeps=args.max_sweeps)
    if args.out:
        save_bundle(calibrated, args.out)
    if args.report:
        Path(args.report).write_text(
            render_report(report.to_dict(), precision=None) + "\n", encoding="utf-8"
        )
    _emit(report.to_dict(), args)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    bundle = load_bundle(_bundle_path(args))
    app = create_app(bundle, precision=_precision(args))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_model(args) -> int:
    bundle = load_bundle(_bundle_path(args))
    _emit(build_model_report(bundle), args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oobn-lab",
        description="Object-oriented Bayesian network engine with the bundled "
                    "Stateless Ethereum model.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--bundle",
        help="model bundle path (default: $OOBN_LAB_BUNDLE, then the shipped bundle)",
    )
    parser.add_argument(
        "--precision", default=str(DEFAULT_PRECISION),
        help="decimal digits in reports, or 'full' (default: %(default)s)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a bundle loads and flattens")
    p.add_argument("path", nargs="?", help="bundle path (defaults to --bundle)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("infer", help="posterior of every variable under evidence")
    p.add_argument("--evidence", nargs="*", metavar="VAR=state", default=[])
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("scenario", help="run a preset or ad-hoc what-if scenario")
    p.add_argument("preset", nargs="?", help="preset name (omit for ad-hoc evidence)")
    p.add_argument("--evidence", nargs="*", metavar="VAR=state", default=[])
    p.add_argument("--compare", metavar="PRESET",
                   help="baseline preset for absolute/relative change columns")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("sensitivity", help="parameter and evidence sensitivity")
    p.add_argument("--hypothesis", required=True, metavar="VAR=state")
    p.add_argument("--scenario", help="preset supplying the evidence ('none' for empty)")
    p.add_argument("--evidence", nargs="*", metavar="VAR=state", default=[])
    p.add_argument("--evidence-sensitivity", action="store_true",
                   help="skip the (slower) per-parameter ranking")
    p.add_argument("--top", type=int, default=None,
                   help="keep only the top N ranked parameters")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("learn", help="estimate CPTs or a Chow-Liu skeleton from CSV")
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--sidecar", help="JSON declaring states/bins per column")
    p.add_argument("--block-witness", action="store_true",
                   help="interpret the CSV with the bundle's block/witness schema")
    p.add_argument("--structure", help="network JSON supplying the fixed structure")
    p.add_argument("--smoothing", type=float, default=1.0)
    p.add_argument("--chow-liu", action="store_true")
    p.add_argument("--root", help="root variable for --chow-liu")
    p.add_argument("--out", help="write the fitted network JSON here")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("calibrate", help="tune elicited cells toward bundle targets")
    p.add_argument("--targets", help="JSON file overriding the bundle's target list")
    p.add_argument("--max-sweeps", type=int, default=200)
    p.add_argument("--out", help="write the calibrated bundle here")
    p.add_argument("--report", help="write the residual report here")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("model", help="print the model structure document")
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("serve", help="serve the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8348)
    p.add_argument("--read-only", action="store_true", default=True,
                   help="kept for config parity; the service never mutates")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except USAGE_ERRORS as exc:
        return _fail(exc, 2)
    except OobnLabError as exc:
        return _fail(exc, 1)


if __name__ == "__main__":
    sys.exit(main())
