import contextlib

import pytest

_ACCEPTANCE_KEY = pytest.StashKey[dict]()


class Notes(list):
    """Short notes for the verdict line, plus optional table lines printed after it."""

    def __init__(self):
        super().__init__()
        self.table: list[str] = []


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = {}


@pytest.fixture
def criterion(request, capsys):
    """Context manager recording one acceptance criterion as PASS or FAIL.

    The verdict line is printed as soon as the block finishes and repeated
    in the terminal summary.
    """
    results = request.config.stash[_ACCEPTANCE_KEY]

    @contextlib.contextmanager
    def record(number: int, title: str):
        notes = Notes()
        try:
            yield notes
        except BaseException as exc:
            msg = str(exc).splitlines()[0] if str(exc) else ""
            line = f"criterion {number} FAIL: {title} ({type(exc).__name__}: {msg})"
            results[number] = line
            with capsys.disabled():
                print("\n" + line)
            raise
        detail = "; ".join(notes)
        line = f"criterion {number} PASS: {title}" + (f" [{detail}]" if detail else "")
        results[number] = line
        with capsys.disabled():
            print("\n" + "\n".join([line] + notes.table))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_ACCEPTANCE_KEY, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
