import json
from pathlib import Path

import pytest

from gstl import domain_theory
from gstl.gstl_core import parse
from gstl.scenarios import initial_snapshot, ontology, synth

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def theory():
    return domain_theory.load(FIXTURES / "table_setting.gstl")


@pytest.fixture(scope="session")
def theory_plate10():
    return domain_theory.load(FIXTURES / "table_setting_plate10.gstl")


@pytest.fixture(scope="session")
def task_spec():
    return json.loads((FIXTURES / "table_setting_task.json").read_text())


@pytest.fixture(scope="session")
def task(task_spec):
    return parse(task_spec["task"])


@pytest.fixture(scope="session")
def kitchen():
    return ontology()


@pytest.fixture(scope="session")
def snapshot0():
    return initial_snapshot()


@pytest.fixture(scope="session")
def trace_v1():
    return synth("table-setting-v1")
