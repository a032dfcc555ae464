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

import math

import numpy

from crp_engine import stats
from crp_engine import urn
from crp_engine import utils
from crp_engine.harness import experiments


# sup |lambda_n(t) - t| must stay below this many 1/sqrt(n)
TIME_CHANGE_FACTOR = 5.0
TIME_CHANGE_QUANTILE = 0.99


class PoissonizationCouplingExperiment(experiments.Experiment):
    """K~(n lambda_n(t)) = K_floor(nt) and lambda_n(t) close to t."""

    kind = "poissonization-coupling"

    def replicate(self, index, seed):
        n = self.config.size
        real, weight = self.realization_for(seed)
        run = urn.poissonized_run(
            real, n, self.grid, utils.derive_seed(seed, experiments.POISSON_STREAM)
        )
        coupled = run.coupled_k()
        occ = urn.sample_occupancy(
            real, n, utils.derive_seed(seed, experiments.OCCUPANCY_STREAM)
        )
        scalars = {
            "mismatches": float(numpy.count_nonzero(coupled != run.discrete_k())),
            "lambda_error": run.max_time_change_error(),
            "k_coupled": float(coupled[-1]),
            "k_poissonized": float(run.k_tilde(float(n))),
            "k_urn": float(occ.k),
        }
        return stats.ReplicateSummary(index, scalars, real.fingerprint, weight)

    def summarize(self, summaries):
        n = self.config.size
        size = len(summaries)
        mismatches = float(numpy.sum(self.values(summaries, "mismatches")))
        quantile = float(
            numpy.quantile(self.values(summaries, "lambda_error"), TIME_CHANGE_QUANTILE)
        )
        tolerance = TIME_CHANGE_FACTOR / math.sqrt(n)
        return [
            stats.TestReport(
                name="coupling K~(n lambda_n(t)) = K_floor(nt)",
                statistic=mismatches,
                passed=mismatches == 0,
                sample_size=size,
                tolerance=0.0,
                details={"grid_points": int(self.grid.size)},
            ),
            stats.TestReport(
                name="time change sup |lambda_n(t) - t|",
                statistic=quantile,
                passed=quantile < tolerance,
                sample_size=size,
                tolerance=tolerance,
                details={"quantile": TIME_CHANGE_QUANTILE},
            ),
            stats.ks_test(
                self.values(summaries, "k_urn"),
                self.values(summaries, "k_coupled"),
                name="ks K_n urn vs K~(n lambda_n(1))",
                level=self.config.level,
            ),
        ]
