"""Shared fixtures: the bundled workspace, loaded once per session."""

from __future__ import annotations

from pathlib import Path

import pytest

from ragrisk.catalog import Workspace, load_workspace

REPO_ROOT = Path(__file__).resolve().parent.parent
BUNDLED_WORKSPACE = REPO_ROOT / "workspaces" / "rag-enterprise"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def workspace_dir() -> Path:
    return BUNDLED_WORKSPACE


@pytest.fixture(scope="session")
def ws(workspace_dir: Path) -> Workspace:
    return load_workspace(workspace_dir)
