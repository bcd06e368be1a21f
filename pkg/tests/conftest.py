import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("qteleport", max_examples=40, deadline=None)
settings.load_profile("qteleport")

_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def acceptance_log(request):
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def log(criterion: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
        lines.append(line)
        print(line)

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
