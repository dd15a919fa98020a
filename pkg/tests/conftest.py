"""Shared pytest plumbing: surface the primary-criteria verdict lines.

The acceptance tests register one verdict line each; printing them from the
terminal-summary hook keeps them visible in a plain `pytest -v` run, where
output capture would otherwise swallow the PASS lines.
"""

PRIMARY_VERDICTS = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not PRIMARY_VERDICTS:
        return
    terminalreporter.write_sep("=", "primary acceptance criteria")
    for _, line in sorted(PRIMARY_VERDICTS):
        terminalreporter.write_line(line)
