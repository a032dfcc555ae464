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

import daiquiri
import numpy

from crp_engine import exceptions
from crp_engine import limits
from crp_engine import stats
from crp_engine import utils
from crp_engine.harness import experiments


LOG = daiquiri.getLogger(__name__)


class KernelIdentityExperiment(experiments.Experiment):
    """cov_z1 + cov_z2 = min(s, t)^alpha and PSD Gram matrices on random grids."""

    kind = "kernel-identity"
    default_grid_size = 50

    @property
    def size(self) -> int:
        return self.config.grid_size or self.default_grid_size

    def _points(self, seed):
        rng = utils.make_rng(utils.derive_seed(seed, experiments.GRID_STREAM))
        points = numpy.unique(rng.random(self.size))
        return points[points > 0]

    def replicate(self, index, seed):
        points = self._points(seed)
        s, t = points[:, None], points[None, :]
        scalars = {}
        for alpha in self.config.alphas:
            total = limits.cov_z1(s, t, alpha) + limits.cov_z2(s, t, alpha)
            target = limits.cov_bm_timechange(s, t, alpha)
            deviation = numpy.max(numpy.abs(total - target))
            scalars[f"deviation_{alpha:g}"] = float(deviation)
            for kind in ("Z1", "Z2"):
                key = f"psd_{kind.lower()}_{alpha:g}"
                try:
                    limits.factorize(limits.CovKernel(alpha, kind), points)
                except exceptions.FactorizationError:
                    LOG.warning("gram not factorizable", kind=kind, alpha=alpha)
                    scalars[key] = 0.0
                else:
                    scalars[key] = 1.0
        return stats.ReplicateSummary(index, scalars)

    def summarize(self, summaries):
        size = len(summaries)
        reports = []
        for alpha in self.config.alphas:
            deviation = float(numpy.max(self.values(summaries, f"deviation_{alpha:g}")))
            reports.append(
                stats.TestReport(
                    name=f"kernel identity alpha={alpha:g}",
                    statistic=deviation,
                    passed=deviation < limits.IDENTITY_TOLERANCE,
                    sample_size=size,
                    tolerance=limits.IDENTITY_TOLERANCE,
                )
            )
            factorized = min(
                float(numpy.min(self.values(summaries, f"psd_{kind}_{alpha:g}")))
                for kind in ("z1", "z2")
            )
            reports.append(
                stats.TestReport(
                    name=f"psd Gram matrices alpha={alpha:g}",
                    statistic=factorized,
                    passed=factorized == 1.0,
                    sample_size=size,
                    tolerance=limits.JITTER_MAX,
                    details={"points": self.size},
                )
            )
        return reports
