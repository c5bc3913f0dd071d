"""Assessment reports: inherent vs residual, prioritization, coverage.

Two renderings of the same bundle exist: Markdown for humans and JSON for
machines. Every number in the JSON carries both the 2-decimal display
string and the exact numerator/denominator pair, so downstream consumers
never have to re-round an already rounded value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any, Iterable, Mapping

from ragrisk.catalog import Workspace
from ragrisk.engine import assess, display_round
from ragrisk.model import PyramidLayer, RiskAssessment
from ragrisk.pyramid import ControlPriority, coverage_matrix, layer_rank, prioritize


class UnknownControlIdError(Exception):
    """An enabled-control id does not exist in the workspace catalog."""

    def __init__(self, control_ids: list[str]):
        self.control_ids = control_ids
        super().__init__(
            "unknown control id(s): " + ", ".join(sorted(control_ids))
        )


@dataclass(frozen=True)
class ThreatReport:
    threat_id: str
    threat_name: str
    inherent: RiskAssessment
    residual: RiskAssessment
    likelihood_delta: Fraction
    impact_delta: Fraction
    severity_delta: Fraction


@dataclass(frozen=True)
class ReportBundle:
    title: str
    schema_version: str
    generated_at: str
    enabled_controls: tuple[str, ...]
    threats: tuple[ThreatReport, ...]
    priorities: tuple[ControlPriority, ...]
    coverage: Mapping[PyramidLayer, list[str]]
    control_names: Mapping[str, str]


def display_signed(value: Fraction) -> str:
    if value < 0:
        return "-" + display_round(-value)
    return display_round(value)


def rational_payload(value: Fraction) -> dict[str, Any]:
    return {
        "display": display_signed(value),
        "exact": {"num": value.numerator, "den": value.denominator},
    }


def assessment_payload(assessment: RiskAssessment) -> dict[str, Any]:
    """JSON-ready view of one assessment; shared by the CLI and the API."""
    return {
        "threat_id": assessment.threat_id,
        "enabled_controls": list(assessment.enabled_controls),
        "residual_likelihood": assessment.residual_likelihood.as_dict(),
        "residual_impact": assessment.residual_impact.as_dict(),
        "likelihood_score": rational_payload(assessment.likelihood_score),
        "impact_score": rational_payload(assessment.impact_score),
        "severity_score": rational_payload(assessment.severity_score),
        "severity_label": assessment.severity_label.value,
    }


def priority_payload(
    priority: ControlPriority, control_names: Mapping[str, str]
) -> dict[str, Any]:
    return {
        "control_id": priority.control_id,
        "control_name": control_names.get(priority.control_id, priority.control_id),
        "top_layer": priority.top_layer.value,
        "top_layer_rank": priority.top_layer_rank,
        "severity_reduction": rational_payload(priority.severity_reduction),
    }


def coverage_payload(
    coverage: Mapping[PyramidLayer, list[str]], control_names: Mapping[str, str]
) -> list[dict[str, Any]]:
    return [
        {
            "layer": layer.value,
            "rank": layer_rank(layer),
            "controls": [
                {"id": control_id, "name": control_names.get(control_id, control_id)}
                for control_id in ids
            ],
        }
        for layer, ids in coverage.items()
    ]


def build_report(
    ws: Workspace,
    enabled: Iterable[str],
    generated_at: str | None = None,
) -> ReportBundle:
    """Assess every threat with and without the enabled controls.

    ``generated_at`` can be injected for reproducible output; it defaults
    to the current UTC time in RFC 3339 form.
    """
    enabled_ids = set(enabled)
    catalog_ids = set(ws.control_ids())
    unknown = sorted(enabled_ids - catalog_ids)
    if unknown:
        raise UnknownControlIdError(unknown)
    enabled_controls = [c for c in ws.controls if c.id in enabled_ids]
    timestamp = generated_at or datetime.now(timezone.utc).isoformat(
        timespec="seconds"
    )
    threats = []
    for threat in ws.threats:
        inherent = assess(threat, [])
        residual = assess(threat, enabled_controls)
        threats.append(
            ThreatReport(
                threat_id=threat.id,
                threat_name=threat.name,
                inherent=inherent,
                residual=residual,
                likelihood_delta=inherent.likelihood_score
                - residual.likelihood_score,
                impact_delta=inherent.impact_score - residual.impact_score,
                severity_delta=inherent.severity_score - residual.severity_score,
            )
        )
    return ReportBundle(
        title=ws.meta.title,
        schema_version=ws.meta.schema_version,
        generated_at=timestamp,
        enabled_controls=tuple(sorted(enabled_ids)),
        threats=tuple(threats),
        priorities=tuple(prioritize(list(ws.controls), list(ws.threats))),
        coverage=coverage_matrix(list(ws.controls)),
        control_names={c.id: c.name for c in ws.controls},
    )


def _named(control_id: str, names: Mapping[str, str]) -> str:
    name = names.get(control_id)
    return f"{name} ({control_id})" if name else control_id


def render_markdown(bundle: ReportBundle) -> str:
    """Human-readable report: one table per threat, ranking, coverage.

    The timestamp sits alone on one line so snapshot tests can mask it.
    """
    lines: list[str] = [f"# {bundle.title}", ""]
    lines.append(f"Generated: {bundle.generated_at}")
    lines.append("")
    if bundle.enabled_controls:
        lines.append(
            f"Enabled controls ({len(bundle.enabled_controls)}): "
            + ", ".join(bundle.enabled_controls)
        )
    else:
        lines.append("Enabled controls: none")
    lines.append("")
    lines.append("## Threats")
    lines.append("")
    if not bundle.threats:
        lines.append("No threat scenarios in this workspace.")
        lines.append("")
    for entry in bundle.threats:
        inherent, residual = entry.inherent, entry.residual
        lines.append(f"### {entry.threat_name} ({entry.threat_id})")
        lines.append("")
        lines.append(
            f"Severity: {display_round(inherent.severity_score)} "
            f"({inherent.severity_label.value}) → "
            f"{display_round(residual.severity_score)} "
            f"({residual.severity_label.value})"
        )
        lines.append("")
        lines.append("| Measure | Inherent | Residual | Delta |")
        lines.append("| --- | --- | --- | --- |")
        lines.append(
            f"| Likelihood | {display_round(inherent.likelihood_score)} "
            f"| {display_round(residual.likelihood_score)} "
            f"| {display_signed(entry.likelihood_delta)} |"
        )
        lines.append(
            f"| Impact | {display_round(inherent.impact_score)} "
            f"| {display_round(residual.impact_score)} "
            f"| {display_signed(entry.impact_delta)} |"
        )
        lines.append(
            f"| Severity | {display_round(inherent.severity_score)} "
            f"| {display_round(residual.severity_score)} "
            f"| {display_signed(entry.severity_delta)} |"
        )
        lines.append("")
    lines.append("## Control prioritization")
    lines.append("")
    lines.append("| Rank | Control | Top layer | Severity reduction |")
    lines.append("| --- | --- | --- | --- |")
    for position, priority in enumerate(bundle.priorities, start=1):
        lines.append(
            f"| {position} | {_named(priority.control_id, bundle.control_names)} "
            f"| {priority.top_layer.value} ({priority.top_layer_rank}) "
            f"| {display_signed(priority.severity_reduction)} |"
        )
    lines.append("")
    lines.append("## Layer coverage")
    lines.append("")
    lines.append("| Layer | Controls |")
    lines.append("| --- | --- |")
    for layer, ids in bundle.coverage.items():
        cell = (
            ", ".join(_named(control_id, bundle.control_names) for control_id in ids)
            if ids
            else "(none)"
        )
        lines.append(f"| {layer.value} ({layer_rank(layer)}) | {cell} |")
    lines.append("")
    return "\n".join(lines)


def _threat_payload(entry: ThreatReport) -> dict[str, Any]:
    return {
        "threat_id": entry.threat_id,
        "threat_name": entry.threat_name,
        "inherent": assessment_payload(entry.inherent),
        "residual": assessment_payload(entry.residual),
        "deltas": {
            "likelihood": rational_payload(entry.likelihood_delta),
            "impact": rational_payload(entry.impact_delta),
            "severity": rational_payload(entry.severity_delta),
        },
    }


def render_json(bundle: ReportBundle) -> str:
    document = {
        "title": bundle.title,
        "schema_version": bundle.schema_version,
        "generated_at": bundle.generated_at,
        "enabled_controls": list(bundle.enabled_controls),
        "threats": [_threat_payload(entry) for entry in bundle.threats],
        "priorities": [
            priority_payload(priority, bundle.control_names)
            for priority in bundle.priorities
        ],
        "coverage": coverage_payload(bundle.coverage, bundle.control_names),
    }
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"
