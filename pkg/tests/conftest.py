import numpy as np
import pytest

_CRITERIA: dict[str, dict] = {}


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20240601))


@pytest.fixture
def criterion(request):
    """Register an acceptance criterion; call ``.note(text)`` to attach a detail line."""
    num = request.node.get_closest_marker("criterion").args[0]
    entry = _CRITERIA.setdefault(request.node.nodeid, {"num": num, "detail": "", "outcome": "FAIL"})

    class Note:
        def note(self, text):
            entry["detail"] = text

    return Note()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    entry = _CRITERIA.get(item.nodeid)
    if entry is None or rep.when not in ("setup", "call"):
        return
    if rep.failed:
        entry["outcome"] = "FAIL"
        if not entry["detail"]:
            entry["detail"] = str(call.excinfo.value).splitlines()[0] if call.excinfo else "failed"
    elif rep.when == "call":
        entry["outcome"] = "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for entry in sorted(_CRITERIA.values(), key=lambda e: e["num"]):
        terminalreporter.write_line(f"[criterion {entry['num']}] {entry['outcome']}: {entry['detail']}")
