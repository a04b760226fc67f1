import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ovkron import config  # noqa: E402

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def configs_dir() -> Path:
    return CONFIGS


@pytest.fixture(scope="session")
def load_config():
    def load(name):
        return config.load(CONFIGS / f"{name}.json")
    return load


@pytest.fixture(scope="session")
def jobs() -> int:
    return max(1, min(8, os.cpu_count() or 1))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
