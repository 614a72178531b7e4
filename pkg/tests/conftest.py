"""Shared fixtures and the acceptance summary printed at the end of a run."""

import pytest

from casimir_omit.params import paper_baseline

_acceptance = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): acceptance criterion, reported in the summary")
    config.addinivalue_line("markers", "slow: long-running oracle integrations")


def pytest_runtest_logreport(report):
    label = report.user_properties and dict(report.user_properties).get("acceptance")
    if not label:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        detail = dict(report.user_properties).get("detail", "")
        _acceptance.setdefault(label, []).append((report.nodeid, outcome, detail))


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_setup(item):
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        item.user_properties.append(("acceptance", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")

    def key(label):
        head = label.split(":")[0]
        return int(head[2:]) if head[2:].isdigit() else 99

    for label in sorted(_acceptance, key=key):
        for nodeid, outcome, detail in _acceptance[label]:
            suffix = nodeid.split("::")[-1]
            line = f"{outcome}  {label}  [{suffix}]"
            if detail:
                line += f"  {detail}"
            terminalreporter.write_line(line)


@pytest.fixture
def report(request):
    """Attach a measured-value string to the acceptance summary line."""

    def _report(text):
        request.node.user_properties.append(("detail", text))

    return _report


@pytest.fixture
def baseline():
    return paper_baseline()
