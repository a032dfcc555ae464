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
"""Replicate orchestration.

Replicate ``i`` always runs on the stream ``derive_seed(seed, i)``, whatever
process executes it, and results are reduced in replicate order, so the
outputs do not depend on the number of workers.
"""

from concurrent import futures
import dataclasses
import time
import typing

import daiquiri

import crp_engine
from crp_engine import config
from crp_engine import stats
from crp_engine import utils
from crp_engine.harness import experiments
from crp_engine.harness import output
from crp_engine.harness import schema


LOG = daiquiri.getLogger(__name__)

EXIT_PASSED = 0
EXIT_FAILED = 1
EXIT_INVALID_CONFIG = 2


# Experiment of a pool worker process, set by _init_worker
_WORKER_EXPERIMENT = None


def _init_worker(experiment_config: schema.ExperimentConfig) -> None:
    global _WORKER_EXPERIMENT
    _WORKER_EXPERIMENT = experiments.get_experiment(experiment_config)
    _WORKER_EXPERIMENT.prepare()


def _run_replicate(index: int) -> stats.ReplicateSummary:
    experiment = _WORKER_EXPERIMENT
    return experiment.replicate(index, utils.derive_seed(experiment.config.seed, index))


@dataclasses.dataclass
class ReplicateRunner:
    experiment: experiments.Experiment
    worker_count: int = dataclasses.field(default_factory=lambda: config.WORKERS)
    batch_size: int = dataclasses.field(default_factory=lambda: config.BATCH_SIZE)

    def _batches(self) -> typing.Iterator[typing.List[int]]:
        indices = list(self.experiment.config.replicate_indices)
        for start in range(0, len(indices), self.batch_size):
            yield indices[start : start + self.batch_size]

    def _serial(self) -> typing.Iterator[typing.List[stats.ReplicateSummary]]:
        seed = self.experiment.config.seed
        for batch in self._batches():
            yield [
                self.experiment.replicate(index, utils.derive_seed(seed, index))
                for index in batch
            ]

    def _parallel(self) -> typing.Iterator[typing.List[stats.ReplicateSummary]]:
        with futures.ProcessPoolExecutor(
            max_workers=self.worker_count,
            initializer=_init_worker,
            initargs=(self.experiment.config,),
        ) as executor:
            for batch in self._batches():
                chunksize = max(1, len(batch) // (4 * self.worker_count))
                # map yields in submission order
                yield list(executor.map(_run_replicate, batch, chunksize=chunksize))

    def run(self) -> typing.List[stats.ReplicateSummary]:
        total = self.experiment.config.replicates
        batches = self._serial() if self.worker_count == 1 else self._parallel()
        summaries: typing.List[stats.ReplicateSummary] = []
        start = time.monotonic()
        for batch in batches:
            summaries.extend(batch)
            LOG.info(
                "replicates done",
                kind=self.experiment.kind,
                done=len(summaries),
                total=total,
                elapsed=round(time.monotonic() - start, 3),
            )
        return summaries


@dataclasses.dataclass
class RunResult:
    status: int
    reports: typing.List[stats.TestReport]
    output_dir: str

    @property
    def failed(self) -> typing.List[str]:
        return [r.name for r in self.reports if not r.passed]

    def summary(self) -> typing.Dict[str, typing.Any]:
        return {
            "status": self.status,
            "output": self.output_dir,
            "reports": len(self.reports),
            "failed": self.failed,
        }


def build_metadata(
    experiment: experiments.Experiment,
    summaries: typing.Sequence[stats.ReplicateSummary],
    status: int,
) -> typing.Dict[str, typing.Any]:
    uses_truncation = experiment.kind not in ("kernel-identity", "crp-lln")
    metadata = {
        "config": experiment.config.to_json(),
        "seed": experiment.config.seed,
        "version": crp_engine.__version__,
        "rng": utils.RNG_METHOD,
        "normals": utils.NORMAL_METHOD,
        "seed_derivation": utils.SEED_DERIVATION,
        "replicates": len(summaries),
        "truncation": experiment.truncation if uses_truncation else None,
        "status": status,
        "files": [
            output.TRAJECTORIES,
            output.REPLICATES,
            output.MOMENTS,
            output.REPORTS,
        ],
    }
    metadata.update(experiment.metadata())
    if experiment.realization is not None:
        metadata["files"].append(output.REALIZATION)
    return metadata


def run_experiment(
    experiment_config: schema.ExperimentConfig,
    worker_count: typing.Optional[int] = None,
) -> RunResult:
    output_dir = experiment_config.output or config.OUTPUT_DIR
    output.prepare_directory(output_dir)

    experiment = experiments.get_experiment(experiment_config)
    LOG.info(
        "experiment start",
        kind=experiment.kind,
        replicates=experiment_config.replicates,
        design=experiment_config.design,
        output=output_dir,
    )
    experiment.prepare()

    runner = ReplicateRunner(experiment)
    if worker_count is not None:
        runner.worker_count = worker_count
    summaries = runner.run()

    reports = experiment.summarize(summaries)
    status = EXIT_PASSED if all(r.passed for r in reports) else EXIT_FAILED

    path = lambda filename: output.output_path(output_dir, filename)  # noqa: E731
    with output.writing(output_dir):
        output.write_trajectories(path(output.TRAJECTORIES), summaries)
        output.write_replicates(path(output.REPLICATES), summaries)
        output.write_moments(path(output.MOMENTS), experiment.moments(summaries))
        output.write_reports(path(output.REPORTS), reports)
        if experiment.realization is not None:
            with open(path(output.REALIZATION), "w", encoding="utf-8") as f:
                f.write(experiment.realization.dumps())
        output.write_metadata(
            path(output.METADATA), build_metadata(experiment, summaries, status)
        )

    for report in reports:
        LOG.info(
            "report",
            report_name=report.name,
            passed=report.passed,
            statistic=report.statistic,
            p_value=report.p_value,
            tolerance=report.tolerance,
        )
    return RunResult(status, reports, output_dir)


def replay(
    metadata_path: str,
    output_dir: typing.Optional[str] = None,
    worker_count: typing.Optional[int] = None,
) -> RunResult:
    """Run again the experiment recorded in a metadata file."""
    metadata = output.read_metadata(metadata_path)
    experiment_config = schema.ExperimentConfig.from_dict(metadata["config"])
    if output_dir is not None:
        experiment_config = experiment_config.replace(output=output_dir)
    return run_experiment(experiment_config, worker_count)
