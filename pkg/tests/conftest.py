import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES: list[tuple[str, str, bool, str]] = []
FINDINGS: list[str] = []


def record(criterion: str, clause: str, ok: bool, detail: str = "") -> bool:
    """Store one acceptance outcome for the end-of-session PASS/FAIL report."""
    ACCEPTANCE_LINES.append((criterion, clause, bool(ok), detail))
    return bool(ok)


def finding(text: str) -> None:
    """A result that contradicts a stated reference value; printed in its own block."""
    FINDINGS.append(text)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    tr = terminalreporter
    if FINDINGS:
        tr.section("findings", sep="!")
        for text in FINDINGS:
            tr.write_line(f"FINDING: {text}")
    tr.section("acceptance criteria")
    for criterion, clause, ok, detail in ACCEPTANCE_LINES:
        tr.write_line(f"{'PASS' if ok else 'FAIL'} [{criterion}] {clause}" + (f" :: {detail}" if detail else ""))
    n_fail = sum(1 for line in ACCEPTANCE_LINES if not line[2])
    tr.write_line(f"{len(ACCEPTANCE_LINES) - n_fail} PASS, {n_fail} FAIL")
