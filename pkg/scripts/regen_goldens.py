#!/usr/bin/env python3
"""Regenerate the golden snapshot files under tests/golden/.

Run after an intentional change to DOT export or markdown report layout,
then review the diff before committing. The report golden is rendered
with a pinned timestamp so the bytes stay reproducible.
"""

from __future__ import annotations

from pathlib import Path

from ragrisk.catalog import load_workspace
from ragrisk.flows import build_surface_graph, export_dot
from ragrisk.report import build_report, render_markdown

REPO = Path(__file__).resolve().parent.parent
WORKSPACE = REPO / "workspaces" / "rag-enterprise"
GOLDEN_DIR = REPO / "tests" / "golden"

PINNED_TIMESTAMP = "2026-01-01T00:00:00+00:00"


def main() -> None:
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    ws = load_workspace(WORKSPACE)

    dot = export_dot(build_surface_graph(ws))
    (GOLDEN_DIR / "surface_graph.dot").write_text(
        dot, encoding="utf-8", newline="\n"
    )
    print(f"wrote {GOLDEN_DIR / 'surface_graph.dot'} ({len(dot)} bytes)")

    bundle = build_report(
        ws, list(ws.control_ids()), generated_at=PINNED_TIMESTAMP
    )
    md = render_markdown(bundle)
    (GOLDEN_DIR / "report.md").write_text(md, encoding="utf-8", newline="\n")
    print(f"wrote {GOLDEN_DIR / 'report.md'} ({len(md)} bytes)")


if __name__ == "__main__":
    main()
