from __future__ import annotations

import json
import sys

import pytest

from csbb import concrete, exprlang
from csbb.terms import render_signature


@pytest.fixture()
def json_registry():
    return concrete.default_registry()


def write_exprlang_config(directory) -> str:
    (directory / "exprlang.sig").write_text(render_signature(exprlang.SIGNATURE))
    command = [sys.executable, "-m", "csbb.exprlang"]
    config = {
        "nonterminals": {
            "JSON": {"builtin": "json"},
            "Prop": {"builtin": "json"},
            "Stm": {"command": command, "signature": "exprlang.sig", "hole": "_hole_{id};"},
            "Expr": {"command": command, "signature": "exprlang.sig", "hole": "_hole_{id}"},
        }
    }
    path = directory / "registry.json"
    path.write_text(json.dumps(config))
    return str(path)


@pytest.fixture(scope="session")
def exprlang_config(tmp_path_factory) -> str:
    return write_exprlang_config(tmp_path_factory.mktemp("registry"))


@pytest.fixture(scope="session")
def exprlang_registry(exprlang_config):
    reg = concrete.load_registry_config(exprlang_config)
    yield reg
    reg.close()
