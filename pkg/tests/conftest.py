import json
import re
import shutil
from datetime import datetime, timedelta, timezone
from pathlib import Path
from types import SimpleNamespace

import pytest


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    verdicts = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            found = re.search(r"test_acceptance\.py::test_criterion_(\d+)",
                              getattr(report, "nodeid", ""))
            if found:
                n = int(found.group(1))
                status = "PASS" if outcome == "passed" else "FAIL"
                verdicts[n] = "FAIL" if verdicts.get(n) == "FAIL" else status
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for n in sorted(verdicts):
            terminalreporter.write_line(f"[acceptance] criterion {n}: {verdicts[n]}")

from collabbi.annotations import AnnotationManager
from collabbi.cube import CubeSchema, parse_cube
from collabbi.kb import IriMinter, KnowledgeBase
from collabbi.sessions import SessionHandler, UserProfile
from collabbi.ssb import Dataset, GeneratorConfig, generate_dataset

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def dataset() -> Dataset:
    """The desk-scale reference dataset: seed 42, 10k fact rows."""
    return generate_dataset(seed=42, fact_rows=10_000)


@pytest.fixture(scope="session")
def small_dataset() -> Dataset:
    """Small dataset for property tests that run many queries."""
    return generate_dataset(seed=7, fact_rows=500, customers=20, suppliers=10, parts=30)


@pytest.fixture(scope="session")
def lineorder_cube() -> CubeSchema:
    from collabbi.cube import default_cube_document

    return parse_cube(default_cube_document())


def load_query_fixture(name: str) -> dict:
    return json.loads((FIXTURES / f"{name}.query.json").read_text())


SMALL_GEN = GeneratorConfig(seed=7, fact_rows=500, customers=20, suppliers=10, parts=30)


@pytest.fixture(scope="session")
def small_data_template(tmp_path_factory):
    """A data directory holding the small dataset's table files, copied per
    test so platform instances never share mutable state."""
    from collabbi.platform import save_dataset

    base = tmp_path_factory.mktemp("small-data-template")
    save_dataset(generate_dataset(
        seed=SMALL_GEN.seed, fact_rows=SMALL_GEN.fact_rows,
        customers=SMALL_GEN.customers, suppliers=SMALL_GEN.suppliers,
        parts=SMALL_GEN.parts), base)
    return base


@pytest.fixture
def small_data_dir(small_data_template, tmp_path):
    target = tmp_path / "data"
    shutil.copytree(small_data_template, target)
    return target


class FakeClock:
    """Injectable clock: frozen until advanced, so timestamp rules are
    testable deterministically."""

    def __init__(self, start: datetime | None = None):
        self.now = start or datetime(2024, 6, 1, 10, 0, 0, tzinfo=timezone.utc)

    def advance(self, seconds: int = 60):
        self.now += timedelta(seconds=seconds)

    def __call__(self) -> datetime:
        return self.now


JEAN = UserProfile(display_name="Jean", mbox="jean@example.org",
                   organization="Summit Analytics")
KIM = UserProfile(display_name="Kim", mbox="kim@example.org")


@pytest.fixture
def collab():
    """A fresh triple store wired to session and annotation managers."""
    kb = KnowledgeBase()
    minter = IriMinter()
    clock = FakeClock()
    sessions = SessionHandler(kb, minter)
    annotations = AnnotationManager(kb, minter, sessions, clock)
    return SimpleNamespace(kb=kb, minter=minter, clock=clock,
                           sessions=sessions, annotations=annotations)
