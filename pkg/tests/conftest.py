import pytest

from maslov_brake.corpus import mixed_corpus

# criterion number -> short description, filled by the acceptance module
_CRITERIA: dict[int, str] = {}
_OUTCOMES: dict[int, list[str]] = {}


def register_criterion(number: int, text: str) -> None:
    _CRITERIA[number] = text


def pytest_runtest_logreport(report):
    marker = "test_acceptance.py::test_criterion_"
    if marker not in report.nodeid:
        return
    num = int(report.nodeid.split(marker)[1][:2])
    if report.when == "call" or report.outcome != "passed":
        _OUTCOMES.setdefault(num, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        outcomes = _OUTCOMES.get(num)
        if outcomes is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {_CRITERIA[num]}")


@pytest.fixture(scope="session")
def corpus():
    """120 seeded brake-symmetric systems, n in {1, 2, 3}, scales 0.5 / 2 / 8."""
    return mixed_corpus(40, 7)


@pytest.fixture(scope="session")
def circle_certificate():
    from maslov_brake.brake import verify_brake_certificate
    from maslov_brake.hamiltonian import builtin

    return verify_brake_certificate(builtin("quartic-first-order"), 2.0)
