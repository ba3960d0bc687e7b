"""Collects the acceptance verdicts and prints them as one block after the run."""

VERDICTS: list[tuple[str, str]] = []


def record(label: str, passed: bool, detail: str) -> bool:
    VERDICTS.append((label, f"{'PASS' if passed else 'FAIL'}  {label}: {detail}"))
    return passed


def note(label: str, detail: str) -> None:
    VERDICTS.append((label, f"info  {label}: {detail}"))


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(VERDICTS, key=lambda v: int(v[0].split()[1])):
        terminalreporter.write_line(line)
