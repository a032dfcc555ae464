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

from scipy import stats as scipy_stats

from crp_engine import frequencies
from crp_engine import stats
from crp_engine import urn
from crp_engine.harness import experiments


class CltYExperiment(experiments.Experiment):
    """Fluctuation Y_n of the conditional mean, one realization per replicate.

    Y_n is a function of the realization alone, so no ball is thrown.
    """

    kind = "clt-y"

    def replicate(self, index, seed):
        n = self.config.size
        real, weight = self.realization_for(seed)
        s_alpha = real.diversity
        scale = n ** (real.alpha / 2)
        centre = n ** real.alpha * s_alpha
        y = (urn.conditional_mean_k(real, n) - centre) / scale
        poissonized = (urn.poissonized_mean_k(real, n) - centre) / scale
        scalars = {
            "s": s_alpha,
            "y": y,
            "y_std": y / math.sqrt(s_alpha),
            "poissonized_y": poissonized,
            "poissonized_y_std": poissonized / math.sqrt(s_alpha),
        }
        trajectories = []
        if self.store(index):
            trajectories.append(urn.y_trajectory(real, n, self.grid))
            trajectories.append(urn.poissonized_y_trajectory(real, n, self.grid))
        return stats.ReplicateSummary(
            index, scalars, real.fingerprint, weight, trajectories
        )

    def summarize(self, summaries):
        alpha, theta = self.params
        limit = 2 - 2 ** alpha
        es = self.estimate(summaries, "s")
        reports = [
            self.check(
                "mean S vs exact moment",
                es.mean,
                es.mean_se,
                frequencies.diversity_moment(1, alpha, theta),
                es.size,
            )
        ]
        for name, label in (("y", "Y_n(1)"), ("poissonized_y", "poissonized Y(n)")):
            est = self.estimate(summaries, name)
            reports.append(
                self.check(
                    f"variance {label} vs (2-2^alpha)E[S]",
                    est.variance,
                    math.hypot(est.variance_se, limit * es.mean_se),
                    limit * es.mean,
                    est.size,
                )
            )
            reports.append(
                self.check(f"mean {label}", est.mean, est.mean_se, 0.0, est.size)
            )
            # The standardized limit does not depend on S, so weights are not needed
            reports.append(
                stats.ks_test(
                    self.values(summaries, f"{name}_std"),
                    scipy_stats.norm(scale=math.sqrt(limit)).cdf,
                    name=f"ks {label}/sqrt(S) vs N(0, 2-2^alpha)",
                    level=self.config.level,
                )
            )
        return reports
