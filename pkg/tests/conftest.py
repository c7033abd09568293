"""Shared pytest hooks: prints the acceptance criterion summary lines."""

ACCEPTANCE_RESULTS = []  # (criterion number, title, ok, [failed sub-checks])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, failures in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(
            f"ACCEPTANCE {num:2d} ({title}): {'PASS' if ok else 'FAIL'}")
        for desc in failures:
            terminalreporter.write_line(f"    failed sub-check: {desc}")
