from test_acceptance import SUITE_KEY


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(SUITE_KEY, None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number].line())
