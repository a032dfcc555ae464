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

from crp_engine import partitions
from crp_engine import stats
from crp_engine import urn
from crp_engine import utils
from crp_engine.harness import experiments


class CrpUrnEquivalenceExperiment(experiments.Experiment):
    """Law of K_n from the restaurant against the annealed urn."""

    kind = "crp-urn-equivalence"

    def replicate(self, index, seed):
        alpha, theta = self.params
        n = self.config.size
        trajectory = partitions.simulate_crp(
            n,
            partitions.CrpParams(alpha, theta),
            utils.derive_seed(seed, experiments.CRP_STREAM),
        )
        real, weight = self.realization_for(seed)
        occ = urn.sample_occupancy(
            real, n, utils.derive_seed(seed, experiments.OCCUPANCY_STREAM)
        )
        scalars = {"k_crp": float(trajectory.k), "k_urn": float(occ.k)}
        return stats.ReplicateSummary(index, scalars, real.fingerprint, weight)

    def summarize(self, summaries):
        alpha, theta = self.params
        n = self.config.size
        exact = partitions.expected_components(n, partitions.CrpParams(alpha, theta))
        crp = self.estimate(summaries, "k_crp")
        occupancy = self.estimate(summaries, "k_urn")
        return [
            stats.ks_test(
                self.values(summaries, "k_crp"),
                self.values(summaries, "k_urn"),
                name="ks K_n restaurant vs urn",
                level=self.config.level,
            ),
            self.check(
                "mean K_n restaurant vs exact", crp.mean, crp.mean_se, exact, crp.size
            ),
            self.check(
                "mean K_n urn vs exact",
                occupancy.mean,
                occupancy.mean_se,
                exact,
                occupancy.size,
            ),
        ]
