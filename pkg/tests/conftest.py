import json
import re
import time

import pytest

from decorated_reeb.cli import main

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def desk_bundles(tmp_path_factory):
    """Run the default desk-scale experiment through the CLI twice.

    Returns ``(first_dir, second_dir, seconds_for_first_run)``.
    """
    root = tmp_path_factory.mktemp("desk")
    config = root / "manifest.json"
    config.write_text(json.dumps({"output_dir": str(root / "missing" / "run1")}))
    start = time.perf_counter()
    assert main(["--threads", "1", "experiment", "--config", str(config)]) == 0
    elapsed = time.perf_counter() - start
    assert main(["--threads", "1", "experiment", "--config", str(config),
                 "-o", str(root / "run2")]) == 0
    return root / "missing" / "run1", root / "run2", elapsed


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    if report.when == "call" or report.outcome != "passed":
        prev = _ACCEPTANCE.get(key, "PASS")
        _ACCEPTANCE[key] = "PASS" if prev == "PASS" and report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), status in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"criterion {num} ({name.replace('_', ' ')}): {status}")
