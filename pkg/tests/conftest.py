import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> list of (part, passed, detail)
_ACCEPTANCE = {}


class AcceptanceRecorder:
    def __call__(self, number, part, passed, detail=""):
        _ACCEPTANCE.setdefault(number, []).append((part, bool(passed), detail))
        return bool(passed)


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceRecorder()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[number]
        ok = all(p for _, p, _ in parts)
        summary = "; ".join(f"{name} [{'ok' if p else 'FAIL'}]: {detail}"
                            for name, p, detail in parts)
        tr.write_line(f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} - {summary}")
