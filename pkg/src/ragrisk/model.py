"""Core domain types and structural validation for threat-model workspaces.

A workspace is made of three catalogs: the system model (architecture),
the threat scenarios (adversary techniques plus inherent factor scores),
and the controls (factor adjustments plus pyramid layer membership).
Everything here is an immutable dataclass so loaded workspaces can be
shared freely across threads and requests without locking.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

ID_PATTERN = re.compile(r"^[a-z0-9_\-]+$")
CWE_PATTERN = re.compile(r"^CWE-\d+$")
ATLAS_PATTERN = re.compile(r"^AML\.T\d+(\.\d+)*$")
OWASP_LLM_PATTERN = re.compile(r"^LLM\d{2}$")

LIKELIHOOD_FACTORS: tuple[str, ...] = (
    "skill_level",
    "motive",
    "opportunity",
    "size",
    "ease_of_discovery",
    "ease_of_exploit",
    "awareness",
    "intrusion_detection",
)

IMPACT_FACTORS: tuple[str, ...] = (
    "loss_of_confidentiality",
    "loss_of_integrity",
    "loss_of_availability",
    "loss_of_accountability",
    "financial_damage",
    "reputation_damage",
    "non_compliance",
    "privacy_violation",
)

ALL_FACTORS: tuple[str, ...] = LIKELIHOOD_FACTORS + IMPACT_FACTORS

FACTOR_MIN = 0
FACTOR_MAX = 9


class ComponentKind(str, Enum):
    USER_INTERFACE = "user_interface"
    INGESTION_PIPELINE = "ingestion_pipeline"
    EMBEDDING_MODEL = "embedding_model"
    VECTOR_STORE = "vector_store"
    RETRIEVAL_API = "retrieval_api"
    GENERATIVE_MODEL = "generative_model"
    DOCUMENT_SOURCE = "document_source"
    EXTERNAL_SOURCE = "external_source"
    MONITORING = "monitoring"
    OTHER = "other"


class Exposure(str, Enum):
    EXTERNAL = "external"
    INTERNAL = "internal"
    TRUSTED = "trusted"


class ActorClass(str, Enum):
    """Who is driving an attack flow.

    Insiders and unwitting insiders usually share an entry point; they are
    kept distinct so catalogs can override one without the other.
    """

    EXTERNAL = "external"
    INSIDER = "insider"
    UNWITTING_INSIDER = "unwitting_insider"


class Framework(str, Enum):
    ATLAS = "ATLAS"
    OWASP_LLM = "OWASP_LLM"


TECHNIQUE_ID_PATTERNS: dict[Framework, re.Pattern[str]] = {
    Framework.ATLAS: ATLAS_PATTERN,
    Framework.OWASP_LLM: OWASP_LLM_PATTERN,
}


class PyramidLayer(str, Enum):
    """AI Security Pyramid of Pain layers, bottom (1) to top (6).

    A higher rank means the control forces a larger change in how the
    adversary operates, so it hurts them more to work around.
    """

    DATA_INTEGRITY = "data_integrity"
    AI_SYSTEM_PERFORMANCE = "ai_system_performance"
    ADVERSARIAL_TOOLS = "adversarial_tools"
    ADVERSARIAL_INPUTS = "adversarial_inputs"
    DATA_PROVENANCE = "data_provenance"
    TTPS = "ttps"


LAYER_RANKS: dict[PyramidLayer, int] = {
    PyramidLayer.DATA_INTEGRITY: 1,
    PyramidLayer.AI_SYSTEM_PERFORMANCE: 2,
    PyramidLayer.ADVERSARIAL_TOOLS: 3,
    PyramidLayer.ADVERSARIAL_INPUTS: 4,
    PyramidLayer.DATA_PROVENANCE: 5,
    PyramidLayer.TTPS: 6,
}


class SeverityLabel(str, Enum):
    NOTE = "Note"
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"
    CRITICAL = "Critical"


@dataclass(frozen=True)
class Component:
    id: str
    name: str
    kind: ComponentKind
    exposure: Exposure


@dataclass(frozen=True)
class DataFlow:
    """A directed data flow between two components.

    Self-loops are legal but must be marked ``loopback`` so they cannot
    appear by accident (typically a typo in one endpoint).
    """

    id: str
    source: str
    target: str
    data_kind: str
    loopback: bool = False


@dataclass(frozen=True)
class TrustBoundary:
    id: str
    name: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class SystemModel:
    id: str
    name: str
    components: tuple[Component, ...]
    data_flows: tuple[DataFlow, ...]
    trust_boundaries: tuple[TrustBoundary, ...]

    def component_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.components)


@dataclass(frozen=True)
class WeaknessRef:
    cwe_id: str
    title: str
    note: str | None = None


@dataclass(frozen=True)
class TechniqueRef:
    framework: Framework
    technique_id: str
    name: str


@dataclass(frozen=True)
class FlowStep:
    index: int
    stage: str
    technique: TechniqueRef | None = None
    target: str | None = None


@dataclass(frozen=True)
class AttackFlow:
    """An ordered adversary playbook with per-actor entry points.

    ``entry_points`` maps an actor class to the 1-based step index where
    that actor joins the flow; earlier steps are considered already
    behind them (an insider does not need reconnaissance).
    """

    id: str
    steps: tuple[FlowStep, ...]
    entry_points: Mapping[ActorClass, int] = field(default_factory=dict)


@dataclass(frozen=True)
class LikelihoodFactors:
    """The eight OWASP likelihood factors, each scored 0 (best) to 9 (worst)."""

    skill_level: int = 0
    motive: int = 0
    opportunity: int = 0
    size: int = 0
    ease_of_discovery: int = 0
    ease_of_exploit: int = 0
    awareness: int = 0
    intrusion_detection: int = 0

    def as_dict(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in LIKELIHOOD_FACTORS}

    def total(self) -> int:
        return sum(self.as_dict().values())


@dataclass(frozen=True)
class ImpactFactors:
    """The eight OWASP impact factors (technical and business pooled)."""

    loss_of_confidentiality: int = 0
    loss_of_integrity: int = 0
    loss_of_availability: int = 0
    loss_of_accountability: int = 0
    financial_damage: int = 0
    reputation_damage: int = 0
    non_compliance: int = 0
    privacy_violation: int = 0

    def as_dict(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in IMPACT_FACTORS}

    def total(self) -> int:
        return sum(self.as_dict().values())


@dataclass(frozen=True)
class ThreatScenario:
    id: str
    name: str
    techniques: tuple[TechniqueRef, ...]
    weaknesses: tuple[WeaknessRef, ...]
    targets: tuple[str, ...]
    inherent_likelihood: LikelihoodFactors
    inherent_impact: ImpactFactors
    flows: tuple[AttackFlow, ...] = ()


@dataclass(frozen=True)
class FactorAdjustment:
    """A signed shift applied to one named factor. Negative mitigates."""

    factor: str
    delta: int


@dataclass(frozen=True)
class Control:
    id: str
    name: str
    description: str
    layers: tuple[PyramidLayer, ...]
    adjustments: tuple[FactorAdjustment, ...] = ()


@dataclass(frozen=True)
class RiskAssessment:
    """The computed risk of one threat under a specific set of controls."""

    threat_id: str
    enabled_controls: tuple[str, ...]
    residual_likelihood: LikelihoodFactors
    residual_impact: ImpactFactors
    likelihood_score: Fraction
    impact_score: Fraction
    severity_score: Fraction
    severity_label: SeverityLabel


@dataclass(frozen=True)
class Finding:
    """One structural problem detected in a workspace.

    ``code`` is a stable machine-readable identifier; ``path`` points at
    the offending element in the catalog (dotted, with list indices).
    """

    code: str
    severity: str
    path: str
    message: str


def _finding(code: str, path: str, message: str) -> Finding:
    return Finding(code=code, severity="error", path=path, message=message)


def _check_id(value: str, path: str, out: list[Finding]) -> None:
    if not ID_PATTERN.match(value):
        out.append(
            _finding(
                "INVALID_ID",
                path,
                f"id {value!r} does not match the pattern [a-z0-9_-]+",
            )
        )


def _check_unique(values: Sequence[str], path: str, out: list[Finding]) -> None:
    seen: set[str] = set()
    for position, value in enumerate(values):
        if value in seen:
            out.append(
                _finding(
                    "DUPLICATE_ID",
                    f"{path}[{position}].id",
                    f"id {value!r} is declared more than once",
                )
            )
        seen.add(value)


def _check_factor_range(value: int, path: str, out: list[Finding]) -> None:
    if not FACTOR_MIN <= value <= FACTOR_MAX:
        out.append(
            _finding(
                "FACTOR_OUT_OF_RANGE",
                path,
                f"factor value {value} is outside the legal range "
                f"{FACTOR_MIN}-{FACTOR_MAX}",
            )
        )


def _check_technique(ref: TechniqueRef, path: str, out: list[Finding]) -> None:
    pattern = TECHNIQUE_ID_PATTERNS[ref.framework]
    if not pattern.match(ref.technique_id):
        out.append(
            _finding(
                "INVALID_TECHNIQUE_ID",
                f"{path}.technique_id",
                f"{ref.technique_id!r} is not a valid {ref.framework.value} "
                "technique id",
            )
        )


def _validate_model(model: SystemModel, out: list[Finding]) -> set[str]:
    _check_id(model.id, "model.id", out)
    _check_unique([c.id for c in model.components], "model.components", out)
    component_ids = {c.id for c in model.components}
    for i, component in enumerate(model.components):
        _check_id(component.id, f"model.components[{i}].id", out)

    _check_unique([f.id for f in model.data_flows], "model.data_flows", out)
    for i, flow in enumerate(model.data_flows):
        path = f"model.data_flows[{i}]"
        _check_id(flow.id, f"{path}.id", out)
        for attr, key in (("source", "from"), ("target", "to")):
            endpoint = getattr(flow, attr)
            if endpoint not in component_ids:
                out.append(
                    _finding(
                        "DANGLING_FLOW_ENDPOINT",
                        f"{path}.{key}",
                        f"flow {flow.id!r} references unknown component "
                        f"{endpoint!r}",
                    )
                )
        if flow.source == flow.target and not flow.loopback:
            out.append(
                _finding(
                    "LOOPBACK_REQUIRED",
                    f"{path}.loopback",
                    f"flow {flow.id!r} connects {flow.source!r} to itself "
                    "without being marked loopback",
                )
            )

    _check_unique(
        [b.id for b in model.trust_boundaries], "model.trust_boundaries", out
    )
    for i, boundary in enumerate(model.trust_boundaries):
        path = f"model.trust_boundaries[{i}]"
        _check_id(boundary.id, f"{path}.id", out)
        if not boundary.members:
            out.append(
                _finding(
                    "EMPTY_BOUNDARY",
                    f"{path}.members",
                    f"trust boundary {boundary.id!r} has no members",
                )
            )
        seen_members: set[str] = set()
        for j, member in enumerate(boundary.members):
            if member not in component_ids:
                out.append(
                    _finding(
                        "DANGLING_BOUNDARY_MEMBER",
                        f"{path}.members[{j}]",
                        f"boundary {boundary.id!r} references unknown "
                        f"component {member!r}",
                    )
                )
            if member in seen_members:
                out.append(
                    _finding(
                        "DUPLICATE_BOUNDARY_MEMBER",
                        f"{path}.members[{j}]",
                        f"component {member!r} listed twice in boundary "
                        f"{boundary.id!r}",
                    )
                )
            seen_members.add(member)
    return component_ids


def _validate_threats(
    threats: Sequence[ThreatScenario], component_ids: set[str], out: list[Finding]
) -> None:
    _check_unique([t.id for t in threats], "threats", out)
    for i, threat in enumerate(threats):
        path = f"threats[{i}]"
        _check_id(threat.id, f"{path}.id", out)
        if not threat.techniques:
            out.append(
                _finding(
                    "NO_TECHNIQUES",
                    f"{path}.techniques",
                    f"threat {threat.id!r} declares no techniques",
                )
            )
        for j, technique in enumerate(threat.techniques):
            _check_technique(technique, f"{path}.techniques[{j}]", out)
        for j, weakness in enumerate(threat.weaknesses):
            if not CWE_PATTERN.match(weakness.cwe_id):
                out.append(
                    _finding(
                        "INVALID_CWE_ID",
                        f"{path}.weaknesses[{j}].cwe_id",
                        f"{weakness.cwe_id!r} does not match CWE-<digits>",
                    )
                )
        for j, target in enumerate(threat.targets):
            if target not in component_ids:
                out.append(
                    _finding(
                        "DANGLING_TARGET",
                        f"{path}.targets[{j}]",
                        f"threat {threat.id!r} targets unknown component "
                        f"{target!r}",
                    )
                )
        for name, value in threat.inherent_likelihood.as_dict().items():
            _check_factor_range(value, f"{path}.inherent_likelihood.{name}", out)
        for name, value in threat.inherent_impact.as_dict().items():
            _check_factor_range(value, f"{path}.inherent_impact.{name}", out)
        for j, flow in enumerate(threat.flows):
            _validate_attack_flow(flow, f"{path}.flows[{j}]", component_ids, out)
    # Attack flow ids are looked up globally (reports, HTTP routes), so they
    # must be unique across the whole workspace, not just within one threat.
    seen_flows: set[str] = set()
    for i, threat in enumerate(threats):
        for j, flow in enumerate(threat.flows):
            if flow.id in seen_flows:
                out.append(
                    _finding(
                        "DUPLICATE_ID",
                        f"threats[{i}].flows[{j}].id",
                        f"attack flow id {flow.id!r} is declared more than once",
                    )
                )
            seen_flows.add(flow.id)


def _validate_attack_flow(
    flow: AttackFlow, path: str, component_ids: set[str], out: list[Finding]
) -> None:
    _check_id(flow.id, f"{path}.id", out)
    for j, step in enumerate(flow.steps):
        if step.index != j + 1:
            out.append(
                _finding(
                    "NON_CONTIGUOUS_STEPS",
                    f"{path}.steps[{j}].index",
                    f"step index {step.index} found where {j + 1} was "
                    "expected; indices must count up from 1",
                )
            )
        if step.technique is not None:
            _check_technique(step.technique, f"{path}.steps[{j}].technique", out)
        if step.target is not None and step.target not in component_ids:
            out.append(
                _finding(
                    "DANGLING_TARGET",
                    f"{path}.steps[{j}].target",
                    f"step {step.index} of flow {flow.id!r} targets unknown "
                    f"component {step.target!r}",
                )
            )
    for actor, index in flow.entry_points.items():
        if not 1 <= index <= len(flow.steps):
            out.append(
                _finding(
                    "DANGLING_ENTRY_POINT",
                    f"{path}.entry_points.{actor.value}",
                    f"entry point {index} does not name a step of flow "
                    f"{flow.id!r} (it has {len(flow.steps)} steps)",
                )
            )


def _validate_controls(controls: Sequence[Control], out: list[Finding]) -> None:
    _check_unique([c.id for c in controls], "controls", out)
    for i, control in enumerate(controls):
        path = f"controls[{i}]"
        _check_id(control.id, f"{path}.id", out)
        if not control.layers:
            out.append(
                _finding(
                    "EMPTY_LAYERS",
                    f"{path}.layers",
                    f"control {control.id!r} must map to at least one "
                    "pyramid layer",
                )
            )
        seen_layers: set[PyramidLayer] = set()
        for j, layer in enumerate(control.layers):
            if layer in seen_layers:
                out.append(
                    _finding(
                        "DUPLICATE_LAYER",
                        f"{path}.layers[{j}]",
                        f"layer {layer.value!r} listed twice on control "
                        f"{control.id!r}",
                    )
                )
            seen_layers.add(layer)
        seen_factors: set[str] = set()
        for j, adjustment in enumerate(control.adjustments):
            adj_path = f"{path}.adjustments[{j}]"
            if adjustment.factor not in ALL_FACTORS:
                out.append(
                    _finding(
                        "UNKNOWN_FACTOR",
                        f"{adj_path}.factor",
                        f"{adjustment.factor!r} is not a likelihood or "
                        "impact factor name",
                    )
                )
            elif adjustment.factor in seen_factors:
                out.append(
                    _finding(
                        "DUPLICATE_FACTOR_ADJUSTMENT",
                        f"{adj_path}.factor",
                        f"control {control.id!r} adjusts "
                        f"{adjustment.factor!r} more than once",
                    )
                )
            seen_factors.add(adjustment.factor)
            if abs(adjustment.delta) > FACTOR_MAX:
                out.append(
                    _finding(
                        "DELTA_OUT_OF_RANGE",
                        f"{adj_path}.delta",
                        f"delta {adjustment.delta} exceeds the magnitude "
                        f"limit of {FACTOR_MAX}",
                    )
                )


def validate_workspace(
    model: SystemModel,
    threats: Sequence[ThreatScenario],
    controls: Sequence[Control],
) -> list[Finding]:
    """Check every structural invariant and cross-reference of a workspace.

    Returns an empty list exactly when the workspace is well formed.
    Findings are data, not exceptions: callers decide whether a given code
    is fatal. The walk order (model, then threats, then controls) is fixed
    so repeated validation of the same input yields an identical report.
    """
    out: list[Finding] = []
    component_ids = _validate_model(model, out)
    _validate_threats(threats, component_ids, out)
    _validate_controls(controls, out)
    return out


def crossing_flows(model: SystemModel) -> list[str]:
    """Ids of data flows that cross a trust boundary, in declaration order.

    A flow crosses when its two endpoints share no trust boundary; an
    endpoint belonging to no boundary never shares one, so flows touching
    unbounded components (and all flows of a boundary-free model) are
    reported.
    """
    memberships: dict[str, set[str]] = {c.id: set() for c in model.components}
    for boundary in model.trust_boundaries:
        for member in boundary.members:
            if member in memberships:
                memberships[member].add(boundary.id)
    crossing: list[str] = []
    for flow in model.data_flows:
        source = memberships.get(flow.source, set())
        target = memberships.get(flow.target, set())
        if not source & target:
            crossing.append(flow.id)
    return crossing
