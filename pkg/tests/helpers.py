"""Builders for small workspace documents, shared by several test modules.

Each factory returns a fresh dict so tests can mutate their copy freely
before writing it to disk.
"""

from __future__ import annotations

import json
from pathlib import Path

import yaml

from ragrisk.model import IMPACT_FACTORS, LIKELIHOOD_FACTORS


def likelihood_doc(**overrides: int) -> dict:
    doc = {name: 1 for name in LIKELIHOOD_FACTORS}
    doc.update(overrides)
    return doc


def impact_doc(**overrides: int) -> dict:
    doc = {name: 1 for name in IMPACT_FACTORS}
    doc.update(overrides)
    return doc


def model_doc() -> dict:
    return {
        "schema_version": "1",
        "title": "Test workspace",
        "model": {
            "id": "sys",
            "name": "Test system",
            "components": [
                {
                    "id": "ui",
                    "name": "UI",
                    "kind": "user_interface",
                    "exposure": "external",
                },
                {
                    "id": "store",
                    "name": "Store",
                    "kind": "vector_store",
                    "exposure": "internal",
                },
            ],
            "data_flows": [
                {"id": "f1", "from": "ui", "to": "store", "data_kind": "query"},
            ],
            "trust_boundaries": [
                {"id": "core", "name": "Core", "members": ["store"]},
            ],
        },
    }


def threats_doc() -> dict:
    return {
        "schema_version": "1",
        "threats": [
            {
                "id": "t1",
                "name": "Test threat",
                "techniques": [
                    {
                        "framework": "ATLAS",
                        "technique_id": "AML.T0051.000",
                        "name": "Prompt injection",
                    },
                ],
                "targets": ["store"],
                "inherent_likelihood": likelihood_doc(),
                "inherent_impact": impact_doc(),
                "flows": [
                    {
                        "id": "fl1",
                        "steps": [
                            {"index": 1, "stage": "recon"},
                            {"index": 2, "stage": "strike", "target": "store"},
                        ],
                        "entry_points": {"external": 1, "insider": 2},
                    }
                ],
            }
        ],
    }


def controls_doc() -> dict:
    return {
        "schema_version": "1",
        "controls": [
            {
                "id": "c1",
                "name": "Test control",
                "description": "Blocks things.",
                "layers": ["adversarial_inputs"],
                "adjustments": [{"factor": "opportunity", "delta": -2}],
            }
        ],
    }


def write_docs(
    root: Path,
    model: dict | None = None,
    threats: dict | None = None,
    controls: dict | None = None,
    fmt: str = "yaml",
) -> Path:
    """Write a three-file workspace under ``root`` and return it."""
    root.mkdir(parents=True, exist_ok=True)
    documents = {
        "model": model if model is not None else model_doc(),
        "threats": threats if threats is not None else threats_doc(),
        "controls": controls if controls is not None else controls_doc(),
    }
    for base, doc in documents.items():
        path = root / f"{base}.{fmt}"
        if fmt == "yaml":
            path.write_text(
                yaml.safe_dump(doc, sort_keys=False, allow_unicode=True),
                encoding="utf-8",
            )
        else:
            path.write_text(json.dumps(doc, indent=2), encoding="utf-8")
    return root
