def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the per-criterion pass/fail lines collected by the
    acceptance tests, so they are visible in default (captured) runs."""
    try:
        import test_acceptance
    except ImportError:
        return
    lines = getattr(test_acceptance, "RESULTS", [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
