from __future__ import annotations

import re
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
HASM_DIR = FIXTURES / "hasm"
MODEL_DIR = FIXTURES / "classmodel"
BUNDLE_DIR = FIXTURES / "bundles"
VARIANT_DIR = FIXTURES / "variants"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def corpus_paths() -> list[Path]:
    return sorted(HASM_DIR.glob("*.hasm"))


@pytest.fixture(scope="session")
def golden_text() -> str:
    return (HASM_DIR / "f01_golden_console.hasm").read_text()


@pytest.fixture(scope="session")
def corpus_programs(corpus_paths):
    from hbclift import hasm

    return {p.name: hasm.parse_disassembly(p.read_text()) for p in corpus_paths}


@pytest.fixture(scope="session")
def corpus_lifted(corpus_programs):
    from hbclift import lifter

    return {name: lifter.lift_program(prog) for name, prog in corpus_programs.items()}


# --------------------------------------------------------------------------
# acceptance summary: one PASS/FAIL line per criterion in test_acceptance.py

_CRITERIA = {
    1: "golden fixture lifts to the expected invokes in under a second",
    2: "calendar model yields exactly one binding via the five-step walkthrough",
    3: "recorded app-scale growth computes to +84.01% nodes / +46.18% edges",
    4: "every corpus method lifts and validates inside the time budget",
    5: "bridge linking only ever grows graphs and findings",
    6: "small fixtures agree exactly with the brute-force oracles",
    7: "planted leaks: 3 findings with the bridge, 1 without",
    8: "two consecutive corpus pipeline runs are byte-identical",
    9: "truncation fixture reports exactly 4 truncated literals",
}

_ACCEPTANCE_RE = re.compile(r"test_acceptance\.py::test_c(\d+)_")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results: dict[int, str] = {}
    for outcome, verdict in (("passed", "PASS"), ("skipped", "SKIP"),
                             ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(outcome, []):
            match = _ACCEPTANCE_RE.search(getattr(report, "nodeid", ""))
            if match is None:
                continue
            number = int(match.group(1))
            if verdict == "FAIL" or number not in results:
                results[number] = verdict
    if not results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(results):
        label = _CRITERIA.get(number, "")
        terminalreporter.write_line(
            f"criterion {number}: {results[number]}  {label}")
