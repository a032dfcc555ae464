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
from scipy import stats as scipy_stats

from crp_engine import stats
from crp_engine import urn
from crp_engine import utils
from crp_engine.harness import experiments


IDENTITY_TOLERANCE = 1e-10

# Allowance on the two-sided critical value of the independence test
INDEPENDENCE_SLACK = 1.5


class JointCltExperiment(experiments.Experiment):
    """W_n(1), Y_n(1) and their sum (K_n - n^alpha S) / n^(alpha/2), annealed."""

    kind = "joint-clt"

    def replicate(self, index, seed):
        n = self.config.size
        real, weight = self.realization_for(seed)
        occ = urn.sample_occupancy(
            real, n, utils.derive_seed(seed, experiments.OCCUPANCY_STREAM)
        )
        s_alpha = real.diversity
        scale = n ** (real.alpha / 2)
        centre = n ** real.alpha * s_alpha
        mean = urn.conditional_mean_k(real, n)
        w = (occ.k - mean) / scale
        y = (mean - centre) / scale
        total = (occ.k - centre) / scale
        scalars = {
            "s": s_alpha,
            "w": w,
            "y": y,
            "bf": total,
            "bf_std": total / math.sqrt(s_alpha),
            "identity": abs(w + y - total),
        }
        trajectories = []
        if self.store(index):
            trajectories.append(urn.w_trajectory(occ, real, self.grid))
            trajectories.append(urn.y_trajectory(real, n, self.grid))
        return stats.ReplicateSummary(
            index, scalars, real.fingerprint, weight, trajectories
        )

    def summarize(self, summaries):
        size = len(summaries)
        deviation = float(numpy.max(self.values(summaries, "identity")))
        es = self.estimate(summaries, "s")
        bf = self.estimate(summaries, "bf")
        w = self.estimate(summaries, "w")
        y = self.estimate(summaries, "y")
        return [
            stats.TestReport(
                name="identity W_n(1)+Y_n(1) = centred count",
                statistic=deviation,
                passed=deviation <= IDENTITY_TOLERANCE,
                sample_size=size,
                tolerance=IDENTITY_TOLERANCE,
            ),
            self.check(
                "variance centred count vs E[S]",
                bf.variance,
                math.hypot(bf.variance_se, es.mean_se),
                es.mean,
                size,
            ),
            self.check(
                "variance additivity Var W + Var Y vs E[S]",
                w.variance + y.variance,
                math.sqrt(w.variance_se ** 2 + y.variance_se ** 2 + es.mean_se ** 2),
                es.mean,
                size,
            ),
            stats.independence_check(
                self.values(summaries, "w"),
                self.values(summaries, "y"),
                self.values(summaries, "s"),
                name="independence W_n(1), Y_n(1)",
                level=self.config.level,
                slack=INDEPENDENCE_SLACK,
            ),
            stats.ks_test(
                self.values(summaries, "bf_std"),
                scipy_stats.norm.cdf,
                name="ks centred count/sqrt(S) vs N(0, 1)",
                level=self.config.level,
            ),
        ]
