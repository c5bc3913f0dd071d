"""Quantitative risk core: aggregation, severity, and control application.

All arithmetic is exact. Factor vectors are integers, their aggregates are
means of eight integers, and severity is a product of two such means, so
every score is a rational with a denominator dividing 64. Rounding exists
only at the display boundary (``display_round``); nothing downstream ever
consumes a rounded value.
"""

from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction
from typing import Iterable, Union

from ragrisk.model import (
    ALL_FACTORS,
    IMPACT_FACTORS,
    LIKELIHOOD_FACTORS,
    Control,
    ImpactFactors,
    LikelihoodFactors,
    RiskAssessment,
    SeverityLabel,
    ThreatScenario,
)

Rational = Union[Fraction, int]


class SeverityBracket(Enum):
    """Coarse banding of a [0, 9] score: [0,3) low, [3,6) medium, [6,9] high."""

    LOW = "LOW"
    MEDIUM = "MEDIUM"
    HIGH = "HIGH"


def bracket(score: Rational) -> SeverityBracket:
    value = Fraction(score)
    if value < 3:
        return SeverityBracket.LOW
    if value < 6:
        return SeverityBracket.MEDIUM
    return SeverityBracket.HIGH


# Fixed 3x3 matrix from (likelihood bracket, impact bracket) to the final
# label. The diagonal walks Note -> Medium -> Critical; off-diagonal cells
# take the milder neighbour, which is what makes a high-likelihood but
# low-impact threat a "Medium" rather than a "High".
LABEL_MATRIX: dict[tuple[SeverityBracket, SeverityBracket], SeverityLabel] = {
    (SeverityBracket.LOW, SeverityBracket.LOW): SeverityLabel.NOTE,
    (SeverityBracket.LOW, SeverityBracket.MEDIUM): SeverityLabel.LOW,
    (SeverityBracket.LOW, SeverityBracket.HIGH): SeverityLabel.MEDIUM,
    (SeverityBracket.MEDIUM, SeverityBracket.LOW): SeverityLabel.LOW,
    (SeverityBracket.MEDIUM, SeverityBracket.MEDIUM): SeverityLabel.MEDIUM,
    (SeverityBracket.MEDIUM, SeverityBracket.HIGH): SeverityLabel.HIGH,
    (SeverityBracket.HIGH, SeverityBracket.LOW): SeverityLabel.MEDIUM,
    (SeverityBracket.HIGH, SeverityBracket.MEDIUM): SeverityLabel.HIGH,
    (SeverityBracket.HIGH, SeverityBracket.HIGH): SeverityLabel.CRITICAL,
}


def likelihood_score(factors: LikelihoodFactors) -> Fraction:
    """Exact arithmetic mean of the eight likelihood factors."""
    return Fraction(factors.total(), 8)


def impact_score(factors: ImpactFactors) -> Fraction:
    """Exact arithmetic mean of the eight impact factors."""
    return Fraction(factors.total(), 8)


def severity_score(likelihood: Rational, impact: Rational) -> Fraction:
    """Severity = likelihood x impact, computed on unrounded values."""
    return Fraction(likelihood) * Fraction(impact)


def severity_label(likelihood: Rational, impact: Rational) -> SeverityLabel:
    return LABEL_MATRIX[(bracket(likelihood), bracket(impact))]


def _clamp(value: int) -> int:
    return max(0, min(9, value))


def apply_controls(
    likelihood: LikelihoodFactors,
    impact: ImpactFactors,
    controls: Iterable[Control],
) -> tuple[LikelihoodFactors, ImpactFactors]:
    """Apply control adjustments additively, clamping each factor to [0, 9].

    Deltas for the same factor across controls are summed before clamping,
    so the result does not depend on the order of the control list.
    """
    totals: dict[str, int] = dict.fromkeys(ALL_FACTORS, 0)
    for control in controls:
        for adjustment in control.adjustments:
            if adjustment.factor not in totals:
                raise ValueError(
                    f"control {control.id!r} adjusts unknown factor "
                    f"{adjustment.factor!r}"
                )
            totals[adjustment.factor] += adjustment.delta
    residual_likelihood = LikelihoodFactors(
        **{
            name: _clamp(getattr(likelihood, name) + totals[name])
            for name in LIKELIHOOD_FACTORS
        }
    )
    residual_impact = ImpactFactors(
        **{
            name: _clamp(getattr(impact, name) + totals[name])
            for name in IMPACT_FACTORS
        }
    )
    return residual_likelihood, residual_impact


def assess(
    threat: ThreatScenario, controls_enabled: Iterable[Control]
) -> RiskAssessment:
    """Score one threat under a set of enabled controls.

    With an empty control list this is the inherent assessment; otherwise
    it is the residual one.
    """
    controls = list(controls_enabled)
    residual_likelihood, residual_impact = apply_controls(
        threat.inherent_likelihood, threat.inherent_impact, controls
    )
    lscore = likelihood_score(residual_likelihood)
    iscore = impact_score(residual_impact)
    return RiskAssessment(
        threat_id=threat.id,
        enabled_controls=tuple(sorted(control.id for control in controls)),
        residual_likelihood=residual_likelihood,
        residual_impact=residual_impact,
        likelihood_score=lscore,
        impact_score=iscore,
        severity_score=severity_score(lscore, iscore),
        severity_label=severity_label(lscore, iscore),
    )


def display_round(value: Rational) -> str:
    """Render a non-negative rational with exactly two decimals, half-up.

    Half-up at the second decimal is load-bearing: 6.625 must display as
    "6.63", which banker's rounding would turn into "6.62". Implemented on
    exact rationals as floor(x * 100 + 1/2).
    """
    exact = Fraction(value)
    if exact < 0:
        raise ValueError("display_round expects a non-negative value")
    hundredths = math.floor(exact * 100 + Fraction(1, 2))
    return f"{hundredths // 100}.{hundredths % 100:02d}"
