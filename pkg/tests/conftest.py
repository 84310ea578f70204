"""Shared pytest configuration: acceptance criterion summary lines."""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for status, marker in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, ()):
            if "test_acceptance" in report.nodeid and report.when == "call":
                name = report.nodeid.split("::")[-1]
                lines.append((name, marker))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, marker in sorted(lines):
            terminalreporter.write_line(f"{marker}  {name}")
