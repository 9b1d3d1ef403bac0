"""Collects acceptance verdicts and prints them after the run."""

ACCEPTANCE = {}
CRITERIA = range(1, 11)


def record(number: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE[number] = (ok, detail)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in CRITERIA:
        ok, detail = ACCEPTANCE.get(n, (False, "not run or raised before recording"))
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
