import pytest

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


class _Recorder:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.details: list[str] = []

    def note(self, text: str) -> None:
        self.details.append(text)

    def line(self, ok: bool) -> str:
        detail = "; ".join(self.details)
        return f"criterion {self.number} {'PASS' if ok else 'FAIL'} {self.title}" + (
            f" ({detail})" if detail else "")


@pytest.fixture
def criterion(request):
    """Acceptance bookkeeping: records one pass/fail line per criterion,
    printed at the end of the run."""
    marker = request.node.get_closest_marker("criterion")
    rec = _Recorder(*marker.args)
    yield rec
    call = getattr(request.node, "rep_call", None)
    ok = call is not None and call.passed
    _ACCEPTANCE[rec.number] = (ok, rec.line(ok))
    print(rec.line(ok))


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    if rep.when == "call":
        item.rep_call = rep
    return rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[n][1])
