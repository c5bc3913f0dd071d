"""Threat modeling as code for retrieval-augmented AI systems.

The package models a system architecture (components, data flows, trust
boundaries), a catalog of threat scenarios scored on the sixteen OWASP
risk-rating factors, and a catalog of mitigating controls expressed as
factor adjustments. On top of that it computes inherent and residual
risk, ranks controls on the AI Security Pyramid of Pain, renders attack
flows per threat actor, and exports reports and attack-surface graphs.
"""

from ragrisk.catalog import (
    ParseError,
    SchemaError,
    SourceLocation,
    ValidationError,
    Workspace,
    WorkspaceMeta,
    load_workspace,
    save_workspace,
)
from ragrisk.engine import (
    SeverityBracket,
    apply_controls,
    assess,
    display_round,
    impact_score,
    likelihood_score,
    severity_label,
    severity_score,
)
from ragrisk.model import (
    ActorClass,
    AttackFlow,
    Component,
    ComponentKind,
    Control,
    DataFlow,
    Exposure,
    FactorAdjustment,
    Finding,
    FlowStep,
    Framework,
    ImpactFactors,
    LikelihoodFactors,
    PyramidLayer,
    RiskAssessment,
    SeverityLabel,
    SystemModel,
    TechniqueRef,
    ThreatScenario,
    TrustBoundary,
    WeaknessRef,
    crossing_flows,
    validate_workspace,
)

__version__ = "0.1.0"

__all__ = [
    "ActorClass",
    "AttackFlow",
    "Component",
    "ComponentKind",
    "Control",
    "DataFlow",
    "Exposure",
    "FactorAdjustment",
    "Finding",
    "FlowStep",
    "Framework",
    "ImpactFactors",
    "LikelihoodFactors",
    "ParseError",
    "PyramidLayer",
    "RiskAssessment",
    "SchemaError",
    "SeverityBracket",
    "SeverityLabel",
    "SourceLocation",
    "SystemModel",
    "TechniqueRef",
    "ThreatScenario",
    "TrustBoundary",
    "ValidationError",
    "WeaknessRef",
    "Workspace",
    "WorkspaceMeta",
    "apply_controls",
    "assess",
    "crossing_flows",
    "display_round",
    "impact_score",
    "likelihood_score",
    "load_workspace",
    "save_workspace",
    "severity_label",
    "severity_score",
    "validate_workspace",
]
