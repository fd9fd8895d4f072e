from __future__ import annotations

import pytest

from riskscope.data import load_dataset, pima_schema
from riskscope.engine import Engine, asset_path
from riskscope.evidence import load_kb
from riskscope.gbdt import RiskModel
from riskscope.recommend import load_step_rules

ACCEPTANCE_LINES: list[str] = []


def record_criterion(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance summary")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def schema():
    return pima_schema()


@pytest.fixture(scope="session")
def dataset(schema):
    return load_dataset(asset_path("pima_synthetic.csv"), schema)


@pytest.fixture(scope="session")
def model():
    return RiskModel.load(asset_path("model.json"))


@pytest.fixture(scope="session")
def kb():
    return load_kb(asset_path("kb.json"))


@pytest.fixture(scope="session")
def rules(schema):
    return load_step_rules(asset_path("step_rules.json"), schema)


@pytest.fixture(scope="session")
def engine():
    return Engine()


@pytest.fixture()
def client(tmp_path, engine):
    from fastapi.testclient import TestClient

    from riskscope.service import build_app

    app = build_app(engine=engine, chat_client=None, log_dir=tmp_path / "logs")
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c
