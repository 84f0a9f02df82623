import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance-gate verdict lines after the test summary.

    The gate tests record one line per criterion; printing them here (the
    summary hook runs outside pytest's output capture) keeps the verdicts
    visible in a plain ``pytest`` run without ``-s``.
    """
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICT_LOG", None) if mod else None
    if lines:
        terminalreporter.section("acceptance gate")
        for line in lines:
            terminalreporter.write_line(line)
