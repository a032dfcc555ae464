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

from crp_engine import frequencies
from crp_engine import stats
from crp_engine import utils
from crp_engine.harness import experiments


WEIGHT_N_SE = 3.0

ORDERING_TOLERANCE = 1e-12


class ChangeOfMeasureExperiment(experiments.Experiment):
    """Reweighted theta = 0 diversities against stick-breaking ones."""

    kind = "change-of-measure"
    default_truncation = 10000

    def replicate(self, index, seed):
        alpha, theta = self.params
        base = frequencies.sample_pd_theta0(
            alpha,
            self.truncation,
            utils.derive_seed(seed, experiments.REALIZATION_STREAM),
        )
        weight = frequencies.importance_weight(base.diversity, alpha, theta)
        epsilon = frequencies.epsilon_schedule(
            self.config.size, self.config.epsilon_constant
        )
        gem = frequencies.sample_gem(
            alpha,
            theta,
            self.truncation,
            utils.derive_seed(seed, experiments.GEM_STREAM),
        )
        scalars = {
            "s": base.diversity,
            "q": weight,
            "q_truncated": frequencies.truncated_importance_weight(
                base, epsilon, self.config.size, theta
            ),
            "s_gem": gem.diversity,
        }
        return stats.ReplicateSummary(index, scalars, base.fingerprint)

    def summarize(self, summaries):
        alpha, theta = self.params
        size = len(summaries)
        exact = frequencies.diversity_moment(1, alpha, theta)
        q = self.values(summaries, "q")
        weights = self.estimate(summaries, "q")
        reweighted = stats.moment_estimates(self.values(summaries, "s"), q)
        gem = self.estimate(summaries, "s_gem")

        # D_n >= D, so Q_n - Q has the sign of theta
        gaps = numpy.sign(theta) * (self.values(summaries, "q_truncated") - q)
        ordered = bool(numpy.all(gaps >= -ORDERING_TOLERANCE * q))

        return [
            stats.moment_check(
                "mean importance weight",
                weights.mean,
                weights.mean_se,
                1.0,
                rel_tol=0.0,
                n_se=WEIGHT_N_SE,
                sample_size=size,
            ),
            stats.moment_check(
                "reweighted E[S] vs stick-breaking E[S]",
                reweighted.mean,
                math.hypot(reweighted.mean_se, gem.mean_se),
                gem.mean,
                rel_tol=0.0,
                n_se=self.config.n_se,
                sample_size=size,
            ),
            self.check(
                "reweighted E[S] vs exact",
                reweighted.mean,
                reweighted.mean_se,
                exact,
                size,
            ),
            self.check(
                "stick-breaking E[S] vs exact", gem.mean, gem.mean_se, exact, size
            ),
            stats.TestReport(
                name="truncated weight ordering",
                statistic=float(numpy.mean(numpy.abs(gaps) / q)),
                passed=ordered,
                sample_size=size,
                tolerance=ORDERING_TOLERANCE,
                details={"ess": reweighted.ess},
            ),
        ]
