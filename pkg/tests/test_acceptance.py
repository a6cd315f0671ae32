"""Every acceptance criterion, run at its stated tolerance.

Each claim prints one PASS/FAIL line; a per-criterion summary is added
to the terminal report. Claims that do not hold are left failing.
"""

import pytest

from discordnl import repro


def test_every_criterion_is_covered():
    assert sorted({c.criterion for c in repro.CLAIMS}) == list(range(1, 12))
    assert len(set(repro.CLAIM_IDS)) == len(repro.CLAIM_IDS)


@pytest.mark.parametrize("claim", repro.CLAIMS, ids=repro.CLAIM_IDS)
def test_claim(claim, acceptance_log):
    result = repro.run_claim(claim, seed=0)
    acceptance_log.append(result)
    print(result.line())
    assert result.passed, result.line()
