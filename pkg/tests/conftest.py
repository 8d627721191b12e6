"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_results: dict[int, dict] = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when != "call" and not (call.excinfo and call.when == "setup"):
        return
    number, title = marker.args
    entry = _results.setdefault(number, {"title": title, "ok": True, "tests": []})
    failed = call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception)
    entry["ok"] = entry["ok"] and not failed
    entry["tests"].append((item.name, "FAIL" if failed else "PASS"))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        entry = _results[number]
        verdict = "PASS" if entry["ok"] else "FAIL"
        parts = ", ".join(f"{name} {status}" for name, status in entry["tests"])
        terminalreporter.write_line(f"criterion {number:2d} {verdict}  {entry['title']}  [{parts}]")
