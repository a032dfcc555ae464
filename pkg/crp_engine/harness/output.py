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
"""Result files of a run and the readers validating them.

CSV files are UTF-8 with a header row and CRLF line endings, floats are
written with ``repr`` so they read back exactly. Nothing time dependent is
written, so identical runs produce identical bytes.
"""

import contextlib
import csv
import json
import math
import os
import typing

import numpy
import voluptuous

from crp_engine import exceptions
from crp_engine import stats
from crp_engine.harness import schema


TRAJECTORIES = "trajectories.csv"
REPLICATES = "replicates.csv"
MOMENTS = "moments.csv"
REPORTS = "reports.jsonl"
METADATA = "metadata.json"
REALIZATION = "realization.json"

TRAJECTORY_COLUMNS = ("kind", "n", "alpha", "theta", "replicate", "t", "value")
MOMENT_COLUMNS = ("name", "mean", "variance", "mean_se", "variance_se", "size", "ess")
REPLICATE_COLUMNS = ("replicate", "realization_id", "weight")


def _optional_float(value):
    return None if value == "" else float(value)


def json_safe(value):
    """Plain Python values, non-finite floats replaced by None."""
    if isinstance(value, numpy.ndarray):
        return json_safe(value.tolist())
    if isinstance(value, numpy.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


TrajectoryRow = voluptuous.Schema(
    {
        voluptuous.Required("kind"): voluptuous.Any(
            "W", "Y", "poissonized-Y", "gaussian-Z1", "gaussian-Z2", "gaussian-B"
        ),
        voluptuous.Required("n"): voluptuous.Coerce(int),
        voluptuous.Required("alpha"): _optional_float,
        voluptuous.Required("theta"): _optional_float,
        voluptuous.Required("replicate"): voluptuous.Coerce(int),
        voluptuous.Required("t"): voluptuous.Coerce(float),
        voluptuous.Required("value"): voluptuous.Coerce(float),
    }
)

MomentRow = voluptuous.Schema(
    {
        voluptuous.Required("name"): str,
        voluptuous.Required("mean"): voluptuous.Coerce(float),
        voluptuous.Required("variance"): voluptuous.Coerce(float),
        voluptuous.Required("mean_se"): voluptuous.Coerce(float),
        voluptuous.Required("variance_se"): voluptuous.Coerce(float),
        voluptuous.Required("size"): voluptuous.Coerce(int),
        voluptuous.Required("ess"): voluptuous.Coerce(float),
    }
)

ReportLine = voluptuous.Schema(
    {
        voluptuous.Required("name"): str,
        voluptuous.Required("statistic"): voluptuous.Any(None, int, float),
        voluptuous.Required("p_value"): voluptuous.Any(
            None, voluptuous.All(voluptuous.Any(int, float), voluptuous.Range(0, 1))
        ),
        voluptuous.Required("passed"): bool,
        voluptuous.Required("sample_size"): int,
        voluptuous.Required("tolerance"): voluptuous.Any(None, int, float),
        voluptuous.Required("details"): dict,
    }
)

Metadata = voluptuous.Schema(
    {
        voluptuous.Required("config"): dict,
        voluptuous.Required("seed"): int,
        voluptuous.Required("version"): str,
        voluptuous.Required("rng"): str,
        voluptuous.Required("normals"): str,
        voluptuous.Required("seed_derivation"): str,
        voluptuous.Required("replicates"): int,
        voluptuous.Required("realization"): voluptuous.Any(None, str),
        voluptuous.Required("truncation"): voluptuous.Any(None, int),
        voluptuous.Required("status"): voluptuous.Any(0, 1),
        voluptuous.Required("files"): [str],
    }
)


def _open_csv(path, mode):
    return open(path, mode, encoding="utf-8", newline="")


def _validate(filename, validator, row, line):
    try:
        return validator(row)
    except voluptuous.Invalid as e:
        raise exceptions.OutputFormatError(filename, f"line {line}: {e}")


def _read_csv(path, columns=None):
    with _open_csv(path, "r") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise exceptions.OutputFormatError(path, "missing header")
        if columns is not None and tuple(reader.fieldnames) != columns:
            raise exceptions.OutputFormatError(
                path, f"unexpected header {reader.fieldnames}"
            )
        for line, row in enumerate(reader, start=2):
            yield reader.fieldnames, line, row


def write_trajectories(path, summaries: typing.Sequence[stats.ReplicateSummary]):
    with _open_csv(path, "w") as f:
        writer = csv.DictWriter(f, fieldnames=TRAJECTORY_COLUMNS)
        writer.writeheader()
        for summary in summaries:
            for trajectory in summary.trajectories:
                writer.writerows(trajectory.rows(summary.replicate))


def read_trajectories(path) -> typing.List[typing.Dict[str, typing.Any]]:
    return [
        _validate(path, TrajectoryRow, row, line)
        for _, line, row in _read_csv(path, TRAJECTORY_COLUMNS)
    ]


def write_replicates(path, summaries: typing.Sequence[stats.ReplicateSummary]):
    names = sorted({name for s in summaries for name in s.scalars})
    with _open_csv(path, "w") as f:
        writer = csv.writer(f)
        writer.writerow(REPLICATE_COLUMNS + tuple(names))
        for s in summaries:
            writer.writerow(
                [s.replicate, s.realization_id or "", repr(s.weight)]
                + [repr(float(s.scalars[name])) for name in names]
            )


def read_replicates(path) -> typing.List[stats.ReplicateSummary]:
    summaries = []
    for fieldnames, line, row in _read_csv(path):
        if tuple(fieldnames[:3]) != REPLICATE_COLUMNS:
            raise exceptions.OutputFormatError(path, f"unexpected header {fieldnames}")
        try:
            summaries.append(
                stats.ReplicateSummary(
                    replicate=int(row["replicate"]),
                    realization_id=row["realization_id"] or None,
                    weight=float(row["weight"]),
                    scalars={name: float(row[name]) for name in fieldnames[3:]},
                )
            )
        except (TypeError, ValueError) as e:
            raise exceptions.OutputFormatError(path, f"line {line}: {e}")
    return summaries


def write_moments(path, moments: typing.Dict[str, stats.MomentEstimate]):
    with _open_csv(path, "w") as f:
        writer = csv.writer(f)
        writer.writerow(MOMENT_COLUMNS)
        for name, est in moments.items():
            writer.writerow(
                [
                    name,
                    repr(est.mean),
                    repr(est.variance),
                    repr(est.mean_se),
                    repr(est.variance_se),
                    est.size,
                    repr(est.ess),
                ]
            )


def read_moments(path) -> typing.List[typing.Dict[str, typing.Any]]:
    return [
        _validate(path, MomentRow, row, line)
        for _, line, row in _read_csv(path, MOMENT_COLUMNS)
    ]


def write_reports(path, reports: typing.Sequence[stats.TestReport]):
    with open(path, "w", encoding="utf-8") as f:
        for report in reports:
            f.write(json.dumps(json_safe(report.to_json()), sort_keys=True))
            f.write("\n")


def read_reports(path) -> typing.List[typing.Dict[str, typing.Any]]:
    reports = []
    with open(path, encoding="utf-8") as f:
        for line, content in enumerate(f, start=1):
            try:
                document = json.loads(content)
            except json.JSONDecodeError as e:
                raise exceptions.OutputFormatError(path, f"line {line}: {e}")
            reports.append(_validate(path, ReportLine, document, line))
    return reports


def write_metadata(path, metadata: typing.Dict[str, typing.Any]):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(json_safe(metadata), f, sort_keys=True, indent=2)
        f.write("\n")


def read_metadata(path) -> typing.Dict[str, typing.Any]:
    try:
        with open(path, encoding="utf-8") as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise exceptions.OutputFormatError(path, str(e))
    except (OSError, UnicodeDecodeError) as e:
        raise exceptions.OutputFormatError(path, f"cannot read: {e}")
    metadata = _validate(path, Metadata, document, 1)
    # The embedded configuration must itself be valid
    schema.ExperimentConfig.from_dict(metadata["config"])
    return metadata


def output_path(directory: str, filename: str) -> str:
    return os.path.join(directory, filename)


def prepare_directory(directory: str) -> None:
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as e:
        raise exceptions.OutputDirectoryError(directory, e.strerror or str(e))


@contextlib.contextmanager
def writing(directory: str) -> typing.Iterator[None]:
    """Report failed writes under ``directory`` as OutputDirectoryError."""
    try:
        yield
    except OSError as e:
        raise exceptions.OutputDirectoryError(directory, e.strerror or str(e))
