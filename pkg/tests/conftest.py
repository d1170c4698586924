import acceptance_registry


def pytest_terminal_summary(terminalreporter):
    res = acceptance_registry.RESULTS
    if not res:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(res):
        title, ok, dt, detail = res[n]
        terminalreporter.write_line(
            f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {title} ({dt:.1f}s) {detail}")
