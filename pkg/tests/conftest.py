import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import acceptance_log  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if not acceptance_log.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(acceptance_log.RESULTS, key=lambda k: int(k[2:])):
        ok, seconds, note = acceptance_log.RESULTS[key]
        line = f"{key} {'PASS' if ok else 'FAIL'} ({seconds:.1f} s)"
        terminalreporter.write_line(f"{line} {note}".rstrip())
