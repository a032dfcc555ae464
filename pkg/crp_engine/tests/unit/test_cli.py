# -*- encoding: utf-8 -*-
#
# Copyright © 2024 The crp-engine Authors
#
# Licensed under the Apache License, Version 2.0 (the "License"); you may
# not use this file except in compliance with the License. You may obtain
# a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations
# under the License.
import json

import pytest

from crp_engine import cli
from crp_engine import partitions
from crp_engine.harness import runner


def _main(capsys, *argv):
    status = cli.main(list(argv))
    out = capsys.readouterr().out
    return status, json.loads(out)


def test_simulate_crp(capsys):
    status, doc = _main(
        capsys, "simulate", "crp", "--n", "500", "--theta", "1", "--seed", "4"
    )
    assert status == runner.EXIT_PASSED
    assert doc["model"] == "crp"
    assert doc["n"] == 500
    assert sum(int(j) * c for j, c in doc["size_counts"].items()) == 500
    assert sum(doc["size_counts"].values()) == doc["k"]
    assert doc["expected_k"] == partitions.expected_components(
        500, partitions.CrpParams(0.5, 1.0)
    )


def test_simulate_crp_reproducible(capsys):
    _, first = _main(capsys, "simulate", "crp", "--seed", "9")
    _, second = _main(capsys, "simulate", "crp", "--seed", "9")
    assert first == second


@pytest.mark.parametrize("route", ["gem", "reweight"])
def test_simulate_urn(capsys, route):
    status, doc = _main(
        capsys,
        "simulate",
        "urn",
        "--n",
        "300",
        "--truncation",
        "800",
        "--route",
        route,
        "--theta",
        "0.5",
    )
    assert status == runner.EXIT_PASSED
    assert doc["truncation"] == 800
    assert doc["route"] == route
    assert sum(int(j) * c for j, c in doc["size_counts"].items()) == 300
    assert doc["weight"] > 0
    if route == "gem":
        assert doc["weight"] == 1.0


def test_simulate_invalid_parameters(capsys):
    status, doc = _main(capsys, "simulate", "crp", "--alpha", "1.5")
    assert status == runner.EXIT_INVALID_CONFIG
    assert doc["error"] == "invalid-parameters"


def test_simulate_truncation_out_of_reach(capsys):
    status, doc = _main(capsys, "simulate", "urn", "--alpha", "0.95")
    assert status == runner.EXIT_INVALID_CONFIG
    assert doc["error"] == "invalid-parameters"


def test_validate_config(capsys, tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"kind": "clt-y", "alpha": 0.3}))
    status, doc = _main(capsys, "validate-config", str(path), "-O", "replicates=7")
    assert status == runner.EXIT_PASSED
    assert doc["valid"] is True
    assert doc["config"]["alpha"] == 0.3
    assert doc["config"]["replicates"] == 7


def test_validate_config_invalid(capsys, tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"kind": "clt-y", "alpha": 1.0}))
    status, doc = _main(capsys, "validate-config", str(path))
    assert status == runner.EXIT_INVALID_CONFIG
    assert doc["error"] == "invalid-config"
    assert doc["path"] == ["alpha"]


def test_experiment_invalid_override(capsys, tmp_path):
    status, doc = _main(
        capsys, "experiment", "clt-y", "-O", "replicates=0", "-o", str(tmp_path)
    )
    assert status == runner.EXIT_INVALID_CONFIG
    assert doc["path"] == ["replicates"]
    assert list(tmp_path.iterdir()) == []


def test_experiment_kind_mismatch(capsys, tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"kind": "clt-y"}))
    status, doc = _main(capsys, "experiment", "joint-clt", "-c", str(path))
    assert status == runner.EXIT_INVALID_CONFIG
    assert doc["path"] == ["kind"]


def test_experiment_runs(capsys, tmp_path, logger_checker):
    status, doc = _main(
        capsys,
        "experiment",
        "kernel-identity",
        "-O",
        "replicates=2",
        "-O",
        "alphas=[0.5]",
        "-o",
        str(tmp_path),
    )
    assert status == runner.EXIT_PASSED
    assert doc == {
        "status": 0,
        "output": str(tmp_path),
        "reports": 2,
        "failed": [],
    }
    assert (tmp_path / "metadata.json").exists()


def test_replay_invalid_metadata(capsys, tmp_path):
    path = tmp_path / "metadata.json"
    path.write_text("{}")
    status, doc = _main(capsys, "replay", str(path))
    assert status == runner.EXIT_INVALID_CONFIG
    assert doc["error"] == "invalid-metadata"


def test_replay_missing_metadata(capsys, tmp_path):
    status, doc = _main(capsys, "replay", str(tmp_path / "nope" / "metadata.json"))
    assert status == runner.EXIT_INVALID_CONFIG
    assert doc["error"] == "invalid-metadata"
    assert "cannot read" in doc["message"]


def test_experiment_unwritable_output(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    status, doc = _main(
        capsys,
        "experiment",
        "kernel-identity",
        "-O",
        "replicates=2",
        "-o",
        str(blocker / "out"),
    )
    assert status == runner.EXIT_INVALID_CONFIG
    assert doc["error"] == "invalid-output"


def test_unknown_command():
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["frobnicate"])
    assert excinfo.value.code == 2
