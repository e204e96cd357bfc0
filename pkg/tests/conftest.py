import pytest
from hypothesis import settings

from wfreconf.project import bundled, parse_project

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def case():
    return parse_project(bundled("case_study.wfr"))


@pytest.fixture(scope="session")
def env(case):
    return case.env


@pytest.fixture(scope="session")
def three():
    return parse_project(bundled("three_actions.wfr"))


# --- acceptance report --------------------------------------------------------

OUTCOMES = {}
CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion checked by the test")


def pytest_collection_modifyitems(items):
    # acceptance last, so criterion 11 can read the property-test outcomes
    items.sort(key=lambda it: it.get_closest_marker("criterion") is not None)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" or rep.failed:
        OUTCOMES[item.nodeid] = rep.outcome
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            n, text = mark.args
            prev = CRITERIA.get(n, (text, "passed"))[1]
            CRITERIA[n] = (text, "failed" if "failed" in (prev, rep.outcome) else rep.outcome)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        text, outcome = CRITERIA[n]
        status = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"criterion {n:>2}: {status}  {text}")
