"""Control prioritization on the AI Security Pyramid of Pain.

Controls are ranked first by the highest pyramid layer they touch (a
control that disrupts adversary TTPs beats any amount of low-layer
hardening), then by how much severity they remove on their own across
the threat catalog, then by id for a stable total order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ragrisk.engine import assess, impact_score, likelihood_score, severity_score
from ragrisk.model import LAYER_RANKS, Control, PyramidLayer, ThreatScenario


@dataclass(frozen=True)
class ControlPriority:
    control_id: str
    top_layer: PyramidLayer
    top_layer_rank: int
    severity_reduction: Fraction


def layer_rank(layer: PyramidLayer) -> int:
    """Fixed rank 1-6, bottom (data_integrity) to top (ttps)."""
    return LAYER_RANKS[layer]


def top_layer(control: Control) -> PyramidLayer:
    return max(control.layers, key=layer_rank)


def severity_reduction(
    control: Control, threats: Sequence[ThreatScenario]
) -> Fraction:
    """How much severity this control removes on its own, summed over threats.

    Each term compares the inherent severity against the severity with only
    this control enabled. Terms are floored at zero so a hypothetical
    risk-increasing adjustment cannot hide genuine reductions elsewhere.
    """
    total = Fraction(0)
    for threat in threats:
        inherent = severity_score(
            likelihood_score(threat.inherent_likelihood),
            impact_score(threat.inherent_impact),
        )
        solo = assess(threat, [control]).severity_score
        reduction = inherent - solo
        if reduction > 0:
            total += reduction
    return total


def prioritize(
    controls: Sequence[Control], threats: Sequence[ThreatScenario]
) -> list[ControlPriority]:
    """Order controls by (layer rank desc, severity reduction desc, id asc)."""
    entries = []
    for control in controls:
        layer = top_layer(control)
        entries.append(
            ControlPriority(
                control_id=control.id,
                top_layer=layer,
                top_layer_rank=layer_rank(layer),
                severity_reduction=severity_reduction(control, threats),
            )
        )
    entries.sort(
        key=lambda entry: (
            -entry.top_layer_rank,
            -entry.severity_reduction,
            entry.control_id,
        )
    )
    return entries


def coverage_matrix(controls: Sequence[Control]) -> dict[PyramidLayer, list[str]]:
    """Layer-by-layer control membership, top layer first.

    Every declared (control, layer) pair appears exactly once; a control
    mapped to several layers shows up in each of its rows. Row order is
    layer rank descending, ids keep catalog order.
    """
    layers_top_down = sorted(PyramidLayer, key=layer_rank, reverse=True)
    return {
        layer: [control.id for control in controls if layer in control.layers]
        for layer in layers_top_down
    }
