#!/usr/bin/env python3
"""Recompute the headline risk numbers for the bundled RAG workspace.

Loads workspaces/rag-enterprise, scores both threat scenarios with no
controls and with the full control catalog enabled, and prints the
inherent -> residual severity movement plus the control ranking. Exits
nonzero if any displayed number drifts from the expected values, so the
script doubles as a quick regression probe.
"""

from __future__ import annotations

import sys
from pathlib import Path

from ragrisk.catalog import load_workspace
from ragrisk.engine import assess, display_round
from ragrisk.pyramid import prioritize

WORKSPACE = Path(__file__).resolve().parent.parent / "workspaces" / "rag-enterprise"

EXPECTED = {
    "info_disclosure": ("19.50", "High", "10.41", "Low"),
    "rag_poisoning": ("19.88", "High", "6.94", "Low"),
}


def main() -> int:
    ws = load_workspace(WORKSPACE)
    print(f"workspace: {ws.meta.title}")
    print(f"threats: {len(ws.threats)}  controls: {len(ws.controls)}")
    print()

    drift = False
    for threat in ws.threats:
        inherent = assess(threat, ())
        residual = assess(threat, ws.controls)
        line = (
            display_round(inherent.severity_score),
            inherent.severity_label.value,
            display_round(residual.severity_score),
            residual.severity_label.value,
        )
        print(
            f"{threat.id}: {line[0]} ({line[1]}) -> {line[2]} ({line[3]})"
        )
        if EXPECTED.get(threat.id, line) != line:
            drift = True
            print(f"  DRIFT: expected {EXPECTED[threat.id]}")

    print()
    print("control ranking (layer rank, then severity reduction):")
    for rank, entry in enumerate(prioritize(ws.controls, ws.threats), start=1):
        control = ws.get_control(entry.control_id)
        assert control is not None
        print(
            f"{rank:3d}. {control.name}  "
            f"[{entry.top_layer.value} ({entry.top_layer_rank}), "
            f"reduction {display_round(entry.severity_reduction)}]"
        )

    if drift:
        print("\nexpected numbers did not reproduce", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
