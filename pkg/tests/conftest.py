import numpy as np
import pytest

ACCEPTANCE_LOG = pytest.StashKey[list]()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance_log(request):
    return request.config.stash.setdefault(ACCEPTANCE_LOG, [])


def pytest_terminal_summary(terminalreporter, config):
    rows = config.stash.get(ACCEPTANCE_LOG, [])
    if not rows:
        return
    terminalreporter.section("acceptance claims")
    for r in rows:
        terminalreporter.write_line(r.line())
    terminalreporter.section("acceptance criteria")
    for crit in sorted({r.criterion for r in rows}):
        mine = [r for r in rows if r.criterion == crit]
        failed = [r.id for r in mine if not r.passed]
        status = "FAIL" if failed else "PASS"
        detail = f" (failing: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"[{status}] criterion {crit}: {len(mine) - len(failed)}/{len(mine)} claims{detail}")
