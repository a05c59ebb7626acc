"""Shared fixtures and the acceptance-criteria summary reporter."""

import pytest

# populated by tests/test_acceptance.py: (number, name, passed, detail)
ACCEPTANCE_RESULTS = []


def record_acceptance(number, name, passed, detail=""):
    ACCEPTANCE_RESULTS.append((number, name, passed, detail))
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {number:>2} [{status}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, name, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        tr.write_line(f"criterion {number:>2} [{status}] {name}" +
                      (f" -- {detail}" if detail else ""))


@pytest.fixture(scope="session")
def tmp_outdir(tmp_path_factory):
    return tmp_path_factory.mktemp("cli_out")
