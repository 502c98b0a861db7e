"""Shared fixtures: the demo dataset, mock wiring, acceptance reporting."""

from __future__ import annotations

import pytest

from gts.bench.config import BenchConfig, load_config
from gts.fixtures import DemoDataset, build_demo_dataset


@pytest.fixture(scope="session")
def demo_dataset(tmp_path_factory) -> DemoDataset:
    return build_demo_dataset(tmp_path_factory.mktemp("demo"))


@pytest.fixture()
def demo_config(demo_dataset, tmp_path) -> BenchConfig:
    """Demo config with a per-test runs root so runs never collide."""
    config = load_config(demo_dataset.config_path)
    return config.model_copy(update={"runs_root": str(tmp_path / "runs")})


# ---------------------------------------------------------------- acceptance

_ACCEPTANCE_RESULTS: dict[str, bool] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): marks a test as one acceptance criterion"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        _ACCEPTANCE_RESULTS[marker.args[0]] = report.passed


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, ok in _ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
