"""Shared pytest plumbing.

The terminal-summary hook prints one PASS/FAIL line per acceptance criterion
after the run, so the gate's verdict is readable without digging through the
full -v listing.
"""

import re


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = {}
    for status, reports in terminalreporter.stats.items():
        if status not in ("passed", "failed", "error"):
            continue
        for rep in reports:
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            when = getattr(rep, "when", "call")
            if status == "passed" and when != "call":
                continue
            name = nodeid.split("::")[-1]
            m = re.match(r"test_criterion_(\d+)", name)
            if not m:
                continue
            key = int(m.group(1))
            verdict = "PASS" if status == "passed" else "FAIL"
            # a setup error or call failure always overrides an earlier PASS
            if outcomes.get(key, (None, ""))[0] != "FAIL":
                outcomes[key] = (verdict, name)
    if not outcomes:
        return
    tw = terminalreporter
    tw.write_sep("=", "acceptance criteria")
    for key in sorted(outcomes):
        verdict, name = outcomes[key]
        label = name.replace(f"test_criterion_{key:02d}_", "").replace("_", " ")
        tw.write_line(f"criterion {key:2d} [{label}] ... {verdict}")
