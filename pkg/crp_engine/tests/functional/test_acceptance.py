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
"""Limit theorem checks at the scale of the documented acceptance runs.

These take minutes; ``-m "not slow"`` skips them.
"""

import pytest

from crp_engine.harness import runner
from crp_engine.harness import schema


pytestmark = pytest.mark.slow


def _run(directory, **fields):
    fields.setdefault("alpha", 0.5)
    fields.setdefault("theta", 0.0)
    return runner.run_experiment(
        schema.ExperimentConfig.from_dict(dict(fields, output=str(directory)))
    )


def test_quenched_w_clt(tmp_path):
    result = _run(
        tmp_path, kind="clt-w-quenched", n=10 ** 4, replicates=2000, truncation=10 ** 5
    )
    reports = {r.name: r for r in result.reports}
    assert reports["variance W_n(1) vs (2^alpha-1)S"].passed
    assert reports["ks W_n(1) vs N(0, (2^alpha-1)S)"].passed
    assert result.failed == []


def test_y_clt(tmp_path):
    result = _run(tmp_path, kind="clt-y", n=10 ** 5, replicates=5000)
    assert result.failed == []
    assert result.status == runner.EXIT_PASSED


def test_joint_clt(tmp_path):
    result = _run(tmp_path, kind="joint-clt", n=10 ** 5, replicates=2000)
    assert result.failed == []
    assert result.status == runner.EXIT_PASSED
