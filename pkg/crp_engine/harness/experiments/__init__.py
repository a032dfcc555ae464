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

import abc
import dataclasses
import typing

import daiquiri
import numpy

from crp_engine import config
from crp_engine import exceptions
from crp_engine import frequencies
from crp_engine import stats
from crp_engine import utils
from crp_engine.harness import schema


LOG = daiquiri.getLogger(__name__)

# Sub-stream numbers inside a replicate, see utils.derive_seed
REALIZATION_STREAM = 0
OCCUPANCY_STREAM = 1
POISSON_STREAM = 2
GEM_STREAM = 3
CRP_STREAM = 4
GRID_STREAM = 5
JITTER_STREAM = 6

# Stream number of the pinned realization under the master seed
PINNED_STREAM = 2 ** 63

# A pinned realization drawn from the master seed is redrawn, up to
# PINNING_ATTEMPTS times, until its diversity lies within these multiples of
# E[S]
TYPICAL_DIVERSITY = (0.5, 2.0)
PINNING_ATTEMPTS = 32

# Share of n ** (alpha/2) that the truncated tail may contribute to K_n
TAIL_SHARE = 0.01


global _EXPERIMENT_CLASSES
_EXPERIMENT_CLASSES = None


def get_classes() -> typing.Dict[str, typing.Type["Experiment"]]:
    global _EXPERIMENT_CLASSES
    if _EXPERIMENT_CLASSES is None:
        from crp_engine.harness.experiments import change_of_measure
        from crp_engine.harness.experiments import clt_w
        from crp_engine.harness.experiments import clt_y
        from crp_engine.harness.experiments import coupling
        from crp_engine.harness.experiments import crp_lln
        from crp_engine.harness.experiments import crp_urn
        from crp_engine.harness.experiments import joint_clt
        from crp_engine.harness.experiments import kernel_identity

        _EXPERIMENT_CLASSES = {
            cls.kind: cls
            for cls in (
                crp_lln.CrpLlnExperiment,
                clt_w.CltWQuenchedExperiment,
                clt_y.CltYExperiment,
                joint_clt.JointCltExperiment,
                kernel_identity.KernelIdentityExperiment,
                coupling.PoissonizationCouplingExperiment,
                change_of_measure.ChangeOfMeasureExperiment,
                crp_urn.CrpUrnEquivalenceExperiment,
            )
        }
    return _EXPERIMENT_CLASSES


def get_experiment(experiment_config: schema.ExperimentConfig) -> "Experiment":
    return get_classes()[experiment_config.kind](experiment_config)


def truncation_for(alpha: float, n: int) -> int:
    """Truncation level keeping the tail's share of K_n negligible at size n."""
    tolerance = min(config.TAIL_MASS_TOLERANCE, TAIL_SHARE * n ** (alpha / 2 - 1))
    return frequencies.default_truncation(alpha, tolerance)


@dataclasses.dataclass
class Experiment(abc.ABC):
    kind: typing.ClassVar[str]
    default_grid_size: typing.ClassVar[typing.Optional[int]] = None
    default_truncation: typing.ClassVar[typing.Optional[int]] = None

    config: schema.ExperimentConfig
    realization: typing.Optional[frequencies.FrequencyRealization] = dataclasses.field(
        init=False, default=None
    )

    @property
    def params(self):
        return self.config.alpha, self.config.theta

    @property
    def truncation(self) -> int:
        if self.config.truncation is not None:
            return self.config.truncation
        if self.default_truncation is not None:
            return self.default_truncation
        return truncation_for(self.config.alpha, self.config.size)

    @property
    def grid(self) -> numpy.ndarray:
        size = self.config.grid_size or self.default_grid_size or config.GRID_SIZE
        return utils.uniform_grid(size)

    @property
    def stored_trajectories(self) -> int:
        if self.config.stored_trajectories is not None:
            return self.config.stored_trajectories
        return config.STORED_TRAJECTORIES

    def store(self, index: int) -> bool:
        return index < self.stored_trajectories

    def pinned_seeds(self) -> typing.Iterator[int]:
        if self.config.realization_seed is not None:
            yield self.config.realization_seed
            return
        for attempt in range(PINNING_ATTEMPTS):
            yield utils.derive_seed(self.config.seed, PINNED_STREAM + attempt)

    def _pin(self) -> frequencies.FrequencyRealization:
        alpha, theta = self.params
        # A theta = 0 draw reweighted is not a theta draw once pinned
        route = "gem" if theta != 0 else "reweight"
        mean = frequencies.diversity_moment(1, alpha, theta)
        low, high = TYPICAL_DIVERSITY
        for attempt, seed in enumerate(self.pinned_seeds()):
            realization, _ = frequencies.sample_pd(
                alpha, theta, self.truncation, seed, route
            )
            if low * mean <= realization.diversity <= high * mean:
                break
            LOG.debug(
                "atypical diversity",
                attempt=attempt,
                diversity=realization.diversity,
                mean=mean,
            )
        return realization

    def prepare(self) -> None:
        """Build what every replicate shares; called once per process."""
        if self.config.design != "quenched":
            return
        if self.config.realization is not None:
            self.realization = self._load_realization(self.config.realization)
        else:
            self.realization = self._pin()
        LOG.info(
            "realization pinned",
            fingerprint=self.realization.fingerprint,
            diversity=self.realization.diversity,
            truncation=self.realization.truncation_level,
        )

    def _load_realization(self, path: str) -> frequencies.FrequencyRealization:
        try:
            with open(path, encoding="utf-8") as f:
                realization = frequencies.FrequencyRealization.loads(f.read())
        except OSError as e:
            raise exceptions.InvalidExperimentConfig(
                f"cannot read realization {path}: {e.strerror}", ["realization"]
            )
        except (ValueError, exceptions.InvalidParameters) as e:
            raise exceptions.InvalidExperimentConfig(
                f"invalid realization {path}: {e}", ["realization"]
            )
        if (realization.alpha, realization.theta) != self.params:
            raise exceptions.InvalidExperimentConfig(
                f"realization {path} has alpha={realization.alpha} "
                f"theta={realization.theta}, config has alpha={self.config.alpha} "
                f"theta={self.config.theta}",
                ["realization"],
            )
        return realization

    def realization_for(
        self, seed: int
    ) -> typing.Tuple[frequencies.FrequencyRealization, float]:
        if self.realization is not None:
            return self.realization, 1.0
        alpha, theta = self.params
        return frequencies.sample_pd(
            alpha,
            theta,
            self.truncation,
            utils.derive_seed(seed, REALIZATION_STREAM),
            self.config.route,
        )

    @abc.abstractmethod
    def replicate(self, index: int, seed: int) -> stats.ReplicateSummary:
        pass

    @abc.abstractmethod
    def summarize(
        self, summaries: typing.Sequence[stats.ReplicateSummary]
    ) -> typing.List[stats.TestReport]:
        pass

    def metadata(self) -> typing.Dict[str, typing.Any]:
        return {
            "realization": (
                None if self.realization is None else self.realization.fingerprint
            ),
        }

    @staticmethod
    def values(
        summaries: typing.Sequence[stats.ReplicateSummary], name: str
    ) -> numpy.ndarray:
        return numpy.array([s.scalars[name] for s in summaries], dtype=float)

    @staticmethod
    def weights(
        summaries: typing.Sequence[stats.ReplicateSummary],
    ) -> typing.Optional[numpy.ndarray]:
        weights = numpy.array([s.weight for s in summaries], dtype=float)
        if numpy.all(weights == 1.0):
            return None
        return weights

    def estimate(
        self, summaries: typing.Sequence[stats.ReplicateSummary], name: str
    ) -> stats.MomentEstimate:
        return stats.moment_estimates(
            self.values(summaries, name), self.weights(summaries)
        )

    def moments(
        self, summaries: typing.Sequence[stats.ReplicateSummary]
    ) -> typing.Dict[str, stats.MomentEstimate]:
        names = sorted({name for s in summaries for name in s.scalars})
        return {name: self.estimate(summaries, name) for name in names}

    def check(
        self, name: str, estimate: float, se: float, target: float, size: int
    ) -> stats.TestReport:
        return stats.moment_check(
            name,
            estimate,
            se,
            target,
            rel_tol=self.config.rel_tol,
            n_se=self.config.n_se,
            sample_size=size,
        )
