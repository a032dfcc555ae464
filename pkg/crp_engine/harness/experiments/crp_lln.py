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

from crp_engine import frequencies
from crp_engine import partitions
from crp_engine import stats
from crp_engine import utils
from crp_engine.harness import experiments


class CrpLlnExperiment(experiments.Experiment):
    """K_n / n^alpha and C_{n,j} / K_n along the restaurant process."""

    kind = "crp-lln"

    block_sizes = (1, 2, 3)

    def replicate(self, index, seed):
        alpha, theta = self.params
        trajectory = partitions.simulate_crp(
            self.config.size,
            partitions.CrpParams(alpha, theta),
            utils.derive_seed(seed, experiments.CRP_STREAM),
        )
        scalars = {
            f"k_ratio_{n}": trajectory.k_history[n - 1] / n ** alpha
            for n in self.config.sizes
        }
        scalars["k"] = float(trajectory.k)
        for j in self.block_sizes:
            scalars[f"size_ratio_{j}"] = trajectory.size_ratio(j)
        return stats.ReplicateSummary(index, scalars)

    def summarize(self, summaries):
        alpha, theta = self.params
        params = partitions.CrpParams(alpha, theta)
        reports = []
        for n in self.config.sizes:
            est = self.estimate(summaries, f"k_ratio_{n}")
            reports.append(
                self.check(
                    f"mean K_n/n^alpha n={n} vs exact",
                    est.mean,
                    est.mean_se,
                    partitions.expected_components(n, params) / n ** alpha,
                    est.size,
                )
            )

        est = self.estimate(summaries, f"k_ratio_{self.config.size}")
        first = frequencies.diversity_moment(1, alpha, theta)
        reports.append(
            self.check(
                "mean K_n/n^alpha vs E[S]", est.mean, est.mean_se, first, est.size
            )
        )
        reports.append(
            self.check(
                "variance K_n/n^alpha vs Var[S]",
                est.variance,
                est.variance_se,
                frequencies.diversity_moment(2, alpha, theta) - first ** 2,
                est.size,
            )
        )
        for j in self.block_sizes:
            est = self.estimate(summaries, f"size_ratio_{j}")
            reports.append(
                self.check(
                    f"C_n,{j}/K_n vs Sibuya",
                    est.mean,
                    est.mean_se,
                    partitions.sibuya_pmf(j, alpha),
                    est.size,
                )
            )
        return reports
