"""Command-line driver: validate, assess, what-if, prioritize, graph, report, serve.

Standard output carries data (tables, JSON, DOT); standard error carries
diagnostics, so the command pipes cleanly. Exit codes are stable: 0 ok,
1 validation findings, 2 parse/schema error, 3 usage error, 4 internal.
"""

from __future__ import annotations

import argparse
import enum
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from ragrisk.catalog import (
    ParseError,
    SchemaError,
    ValidationError,
    Workspace,
    load_workspace,
)
from ragrisk.engine import assess, display_round
from ragrisk.flows import build_surface_graph, export_dot
from ragrisk.model import Control, Finding
from ragrisk.pyramid import coverage_matrix, prioritize
from ragrisk.report import (
    assessment_payload,
    build_report,
    coverage_payload,
    display_signed,
    priority_payload,
    rational_payload,
    render_json,
    render_markdown,
)

WORKSPACE_ENV_VAR = "RAGRISK_WORKSPACE"


class ExitCode(enum.IntEnum):
    OK = 0
    FINDINGS = 1
    PARSE = 2
    USAGE = 3
    INTERNAL = 4


class UsageError(Exception):
    """Bad invocation: unknown flags, missing workspace, bogus ids."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise UsageError(message)


def _workspace_dir(args: argparse.Namespace) -> Path:
    if args.workspace:
        return Path(args.workspace)
    from_env = os.environ.get(WORKSPACE_ENV_VAR)
    if from_env:
        return Path(from_env)
    raise UsageError(
        f"no workspace directory given; pass a path or set {WORKSPACE_ENV_VAR}"
    )


def _add_workspace_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "workspace",
        nargs="?",
        help=f"workspace directory (default: ${WORKSPACE_ENV_VAR})",
    )


def _render_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip()]
    for row in rows:
        lines.append(
            "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
        )
    return "\n".join(lines)


def _parse_control_selection(ws: Workspace, text: str) -> list[Control]:
    if text == "all":
        return list(ws.controls)
    if text == "none":
        return []
    wanted = [part.strip() for part in text.split(",") if part.strip()]
    if not wanted:
        raise UsageError("empty control selection; use ids, 'all' or 'none'")
    known = set(ws.control_ids())
    unknown = sorted(set(wanted) - known)
    if unknown:
        raise UsageError("unknown control id(s): " + ", ".join(unknown))
    wanted_set = set(wanted)
    return [control for control in ws.controls if control.id in wanted_set]


def _parse_id_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _print_findings(findings: Sequence[Finding], stream) -> None:
    for finding in findings:
        print(
            f"{finding.severity}: {finding.code} at {finding.path}: "
            f"{finding.message}",
            file=stream,
        )


def cmd_validate(args: argparse.Namespace) -> int:
    root = _workspace_dir(args)
    try:
        load_workspace(root)
        findings: list[Finding] = []
    except ValidationError as exc:
        findings = exc.findings
    if args.format == "json":
        document = {
            "findings": [
                {
                    "code": f.code,
                    "severity": f.severity,
                    "path": f.path,
                    "message": f.message,
                }
                for f in findings
            ],
            "count": len(findings),
        }
        print(json.dumps(document, indent=2, ensure_ascii=False))
    else:
        _print_findings(findings, sys.stdout)
        noun = "finding" if len(findings) == 1 else "findings"
        print(f"{len(findings)} {noun}")
    return ExitCode.OK if not findings else ExitCode.FINDINGS


def cmd_assess(args: argparse.Namespace) -> int:
    ws = load_workspace(_workspace_dir(args))
    selection = _parse_control_selection(ws, args.controls)
    inherent = [assess(threat, []) for threat in ws.threats]
    residual = [assess(threat, selection) for threat in ws.threats]
    if args.format == "json":
        document = {
            "enabled_controls": sorted(control.id for control in selection),
            "assessments": [assessment_payload(a) for a in residual],
        }
        print(json.dumps(document, indent=2, ensure_ascii=False))
        return ExitCode.OK
    rows = []
    for a_inherent, a_residual in zip(inherent, residual):
        rows.append(
            [
                a_inherent.threat_id,
                "inherent",
                display_round(a_inherent.likelihood_score),
                display_round(a_inherent.impact_score),
                display_round(a_inherent.severity_score),
                a_inherent.severity_label.value,
            ]
        )
        if selection:
            rows.append(
                [
                    a_residual.threat_id,
                    "residual",
                    display_round(a_residual.likelihood_score),
                    display_round(a_residual.impact_score),
                    display_round(a_residual.severity_score),
                    a_residual.severity_label.value,
                ]
            )
    headers = ["Threat", "Set", "Likelihood", "Impact", "Severity", "Label"]
    table = _render_table(headers, rows)
    if args.format == "md":
        lines = ["| " + " | ".join(headers) + " |"]
        lines.append("| " + " | ".join("---" for _ in headers) + " |")
        lines.extend("| " + " | ".join(row) + " |" for row in rows)
        print("\n".join(lines))
    else:
        print(table)
    return ExitCode.OK


def _signed_with_plus(value: Fraction) -> str:
    text = display_signed(value)
    return f"+{text}" if value > 0 else text


def cmd_whatif(args: argparse.Namespace) -> int:
    ws = load_workspace(_workspace_dir(args))
    enable = _parse_id_list(args.enable)
    disable = _parse_id_list(args.disable)
    conflict = sorted(set(enable) & set(disable))
    if conflict:
        raise UsageError(
            "control id(s) in both --enable and --disable: " + ", ".join(conflict)
        )
    known = set(ws.control_ids())
    unknown = sorted((set(enable) | set(disable)) - known)
    if unknown:
        raise UsageError("unknown control id(s): " + ", ".join(unknown))
    enabled_ids = (known - set(disable)) | set(enable)
    modified_controls = [c for c in ws.controls if c.id in enabled_ids]
    baseline = [assess(threat, list(ws.controls)) for threat in ws.threats]
    modified = [assess(threat, modified_controls) for threat in ws.threats]
    if args.format == "json":
        document = {
            "baseline_controls": sorted(known),
            "enabled_controls": sorted(enabled_ids),
            "baseline": [assessment_payload(a) for a in baseline],
            "assessments": [assessment_payload(a) for a in modified],
            "severity_deltas": [
                {
                    "threat_id": b.threat_id,
                    "delta": rational_payload(m.severity_score - b.severity_score),
                }
                for b, m in zip(baseline, modified)
            ],
        }
        print(json.dumps(document, indent=2, ensure_ascii=False))
        return ExitCode.OK
    rows = []
    for b, m in zip(baseline, modified):
        rows.append(
            [
                b.threat_id,
                display_round(b.severity_score),
                b.severity_label.value,
                display_round(m.severity_score),
                m.severity_label.value,
                _signed_with_plus(m.severity_score - b.severity_score),
            ]
        )
    headers = [
        "Threat",
        "Severity (all)",
        "Label",
        "Severity (what-if)",
        "Label",
        "Delta",
    ]
    print(_render_table(headers, rows))
    return ExitCode.OK


def cmd_prioritize(args: argparse.Namespace) -> int:
    ws = load_workspace(_workspace_dir(args))
    priorities = prioritize(list(ws.controls), list(ws.threats))
    names = {c.id: c.name for c in ws.controls}
    if args.format == "json":
        document = {
            "priorities": [priority_payload(p, names) for p in priorities],
            "coverage": coverage_payload(coverage_matrix(list(ws.controls)), names),
        }
        print(json.dumps(document, indent=2, ensure_ascii=False))
        return ExitCode.OK
    rows = [
        [
            str(position),
            f"{names[p.control_id]} ({p.control_id})",
            f"{p.top_layer.value} ({p.top_layer_rank})",
            display_signed(p.severity_reduction),
        ]
        for position, p in enumerate(priorities, start=1)
    ]
    print(_render_table(["Rank", "Control", "Top layer", "Reduction"], rows))
    return ExitCode.OK


def cmd_graph(args: argparse.Namespace) -> int:
    ws = load_workspace(_workspace_dir(args))
    sys.stdout.write(export_dot(build_surface_graph(ws)))
    return ExitCode.OK


def cmd_report(args: argparse.Namespace) -> int:
    ws = load_workspace(_workspace_dir(args))
    selection = _parse_control_selection(ws, args.controls)
    bundle = build_report(ws, [control.id for control in selection])
    text = render_json(bundle) if args.format == "json" else render_markdown(bundle)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8", newline="\n")
        print(f"wrote {args.output}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return ExitCode.OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from ragrisk.service import create_app

    ws = load_workspace(_workspace_dir(args))
    app = create_app(ws, allow_origin=args.allow_origin, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return ExitCode.OK


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="ragrisk",
        description=(
            "Threat-modeling-as-code: score adversarial risk for an AI "
            "retrieval architecture and explore mitigating controls."
        ),
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    p = subparsers.add_parser("validate", help="check workspace structure")
    _add_workspace_argument(p)
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.set_defaults(handler=cmd_validate)

    p = subparsers.add_parser("assess", help="score inherent and residual risk")
    _add_workspace_argument(p)
    p.add_argument(
        "--controls",
        default="all",
        help="comma-separated control ids, or 'all' / 'none' (default: all)",
    )
    p.add_argument("--format", choices=["table", "json", "md"], default="table")
    p.set_defaults(handler=cmd_assess)

    p = subparsers.add_parser(
        "what-if", help="toggle controls against the full baseline"
    )
    _add_workspace_argument(p)
    p.add_argument("--enable", default="", help="comma-separated control ids")
    p.add_argument("--disable", default="", help="comma-separated control ids")
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.set_defaults(handler=cmd_whatif)

    p = subparsers.add_parser("prioritize", help="rank controls by pyramid layer")
    _add_workspace_argument(p)
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.set_defaults(handler=cmd_prioritize)

    p = subparsers.add_parser("graph", help="export the attack-surface graph")
    _add_workspace_argument(p)
    p.add_argument("--format", choices=["dot"], default="dot")
    p.set_defaults(handler=cmd_graph)

    p = subparsers.add_parser("report", help="render a full assessment report")
    _add_workspace_argument(p)
    p.add_argument(
        "--controls",
        default="all",
        help="comma-separated control ids, or 'all' / 'none' (default: all)",
    )
    p.add_argument("--format", choices=["md", "json"], default="md")
    p.add_argument("-o", "--output", help="write to a file instead of stdout")
    p.set_defaults(handler=cmd_report)

    p = subparsers.add_parser("serve", help="start the HTTP API")
    _add_workspace_argument(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--allow-origin", help="origin allowed for CORS, if any")
    p.add_argument(
        "--ui-dir", help="directory of built dashboard assets served under /ui/"
    )
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return ExitCode.USAGE
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return ExitCode.USAGE
    except (ParseError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitCode.PARSE
    except ValidationError as exc:
        _print_findings(exc.findings, sys.stderr)
        print(str(exc), file=sys.stderr)
        return ExitCode.FINDINGS
    except Exception as exc:  # noqa: BLE001 - map anything else to exit 4
        print(f"internal error: {exc}", file=sys.stderr)
        return ExitCode.INTERNAL


def run() -> None:
    sys.exit(main())
