import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(rng, d):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / 2


# ---------------------------------------------------------------- acceptance summary

import re  # noqa: E402

CRITERIA = {
    1: ("two-level resource in qutrits: standard fidelity, Monte-Carlo, entropy bound", 30.0),
    2: ("qutrit small catalyst: optimum, protocol run, drift, majorization domain", 10.0),
    3: ("subroutine output equals the effective channel; catalyst restored", 120.0),
    4: ("system-catalyst correlation bound, zero violations", None),
    5: ("advantage map at resolution 0.01", 600.0),
    6: ("ergotropy, complete passivity, activation, free-energy bound", 60.0),
    7: ("catalytic expectation of the singlet projector matches the subroutine", None),
}
_OUTCOMES: dict[int, dict] = {}
_NAME = re.compile(r"test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    m = _NAME.search(report.nodeid)
    if not m:
        return
    entry = _OUTCOMES.setdefault(int(m.group(1)), {"failed": [], "seconds": 0.0, "count": set()})
    entry["seconds"] += report.duration
    entry["count"].add(report.nodeid)
    if report.failed and m.group(2) not in entry["failed"]:
        entry["failed"].append(m.group(2))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_OUTCOMES):
        desc, limit = CRITERIA.get(k, ("", None))
        e = _OUTCOMES[k]
        slow = limit is not None and e["seconds"] > limit
        ok = not e["failed"] and not slow
        note = f" [failing: {', '.join(e['failed'])}]" if e["failed"] else ""
        if slow:
            note += f" [over {limit:.0f} s]"
        budget = f" / {limit:.0f} s" if limit else ""
        tr.write_line(f"{'PASS' if ok else 'FAIL'} criterion {k}: {desc} "
                      f"({len(e['count'])} tests, {e['seconds']:.1f} s{budget}){note}")
