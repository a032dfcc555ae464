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

from crp_engine import limits
from crp_engine import stats
from crp_engine import urn
from crp_engine import utils
from crp_engine.harness import experiments


class CltWQuenchedExperiment(experiments.Experiment):
    """Sampling fluctuation W_n at one pinned realization."""

    kind = "clt-w-quenched"

    points = (0.25, 0.5, 1.0)

    def _steps(self):
        return numpy.array([utils.floor_nt(self.config.size, t) for t in self.points])

    def replicate(self, index, seed):
        n = self.config.size
        real = self.realization
        occ = urn.sample_occupancy(
            real, n, utils.derive_seed(seed, experiments.OCCUPANCY_STREAM)
        )
        steps = self._steps()
        means = urn.conditional_mean_curve(real, steps)
        scale = n ** (real.alpha / 2)
        scalars = {
            f"w_{t:g}": (occ.k_at(m) - mean) / scale
            for t, m, mean in zip(self.points, steps, means)
        }
        # W_n(1) lives on a lattice of step 1 / scale; spread it uniformly over
        # its cell before comparing with a continuous law
        jitter = utils.make_rng(utils.derive_seed(seed, experiments.JITTER_STREAM))
        scalars["w_1_smoothed"] = scalars["w_1"] + (jitter.random() - 0.5) / scale
        scalars["k_ratio"] = occ.k / n ** real.alpha
        trajectories = []
        if self.store(index):
            trajectories.append(urn.w_trajectory(occ, real, self.grid))
        return stats.ReplicateSummary(
            index, scalars, real.fingerprint, trajectories=trajectories
        )

    def summarize(self, summaries):
        real = self.realization
        alpha, s_alpha = real.alpha, real.diversity
        variance = (2 ** alpha - 1) * s_alpha
        # Variance added by the uniform spreading over one lattice step
        lattice = self.config.size ** -alpha / 12

        est = self.estimate(summaries, "w_1")
        reports = [
            self.check(
                "variance W_n(1) vs (2^alpha-1)S",
                est.variance,
                est.variance_se,
                variance,
                est.size,
            ),
            self.check("mean W_n(1)", est.mean, est.mean_se, 0.0, est.size),
            stats.ks_test(
                self.values(summaries, "w_1_smoothed"),
                scipy_stats.norm(scale=math.sqrt(variance + lattice)).cdf,
                name="ks W_n(1) vs N(0, (2^alpha-1)S)",
                level=self.config.level,
            ),
        ]

        columns = numpy.column_stack(
            [self.values(summaries, f"w_{t:g}") for t in self.points]
        )
        cov = stats.empirical_cov_grid(columns)
        for i, s in enumerate(self.points):
            for j in range(i, len(self.points)):
                t = self.points[j]
                reports.append(
                    self.check(
                        f"cov W_n({s:g}),W_n({t:g}) vs S cov_z1",
                        float(cov.cov[i, j]),
                        float(cov.se[i, j]),
                        s_alpha * limits.cov_z1(s, t, alpha),
                        cov.size,
                    )
                )
        return reports
