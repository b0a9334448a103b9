import sys


def pytest_terminal_summary(terminalreporter):
    for name, module in list(sys.modules.items()):
        results = getattr(module, "ACCEPTANCE_RESULTS", None)
        if name.endswith("test_acceptance") and results:
            terminalreporter.section("acceptance criteria")
            for n in sorted(results):
                terminalreporter.write_line(module.format_line(n))
            break
