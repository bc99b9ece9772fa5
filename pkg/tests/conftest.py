import shutil
from pathlib import Path

import pytest

from makawalu.projectio import LoadedProject, load_project

from .fixture_project import build_demo_project


@pytest.fixture(scope="session")
def demo_root(tmp_path_factory) -> Path:
    """The oahu-demo fixture folder; session-scoped, treat as read-only."""
    root = tmp_path_factory.mktemp("fixtures") / "oahu-demo"
    build_demo_project(root)
    return root


@pytest.fixture(scope="session")
def demo_project(demo_root) -> LoadedProject:
    loaded = load_project(demo_root)
    assert isinstance(loaded, LoadedProject)
    return loaded


@pytest.fixture()
def demo_copy(demo_root, tmp_path) -> Path:
    """A private, mutable copy of the fixture for fault-injection tests."""
    dest = tmp_path / "oahu-demo"
    shutil.copytree(demo_root, dest)
    return dest
