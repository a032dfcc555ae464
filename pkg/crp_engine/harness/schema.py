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
"""Experiment configuration documents.

An experiment is described by one JSON object. Precedence, lowest first:
schema defaults, the configuration file, ``--override key=value`` flags,
then the dedicated command line flags (``--output``).
"""

import dataclasses
import json
import typing

import voluptuous

from crp_engine import exceptions


KINDS = (
    "crp-lln",
    "clt-w-quenched",
    "clt-y",
    "joint-clt",
    "kernel-identity",
    "poissonization-coupling",
    "change-of-measure",
    "crp-urn-equivalence",
)

DESIGNS = ("quenched", "annealed")

# Kinds whose realization can be pinned
QUENCHABLE_KINDS = ("clt-w-quenched", "poissonization-coupling")

DEFAULT_ALPHAS = [0.1, 0.3, 0.5, 0.7, 0.9]

_MAX_SEED = 2 ** 64 - 1


def _not_bool(value):
    if isinstance(value, bool):
        raise voluptuous.Invalid("expected a number, got a boolean")
    return value


Real = voluptuous.All(_not_bool, voluptuous.Any(int, float), voluptuous.Coerce(float))
PositiveReal = voluptuous.All(Real, voluptuous.Range(min=0, min_included=False))
NonNegativeReal = voluptuous.All(Real, voluptuous.Range(min=0))
OpenUnit = voluptuous.All(
    Real,
    voluptuous.Range(min=0, max=1, min_included=False, max_included=False),
)
PositiveInt = voluptuous.All(_not_bool, int, voluptuous.Range(min=1))
NonNegativeInt = voluptuous.All(_not_bool, int, voluptuous.Range(min=0))
Seed = voluptuous.All(_not_bool, int, voluptuous.Range(min=0, max=_MAX_SEED))


_FieldsSchema = voluptuous.Schema(
    {
        voluptuous.Required("kind"): voluptuous.Any(*KINDS),
        voluptuous.Required("alpha", default=0.5): OpenUnit,
        voluptuous.Required("theta", default=0.0): Real,
        voluptuous.Required("n", default=10000): voluptuous.Any(
            PositiveInt, voluptuous.All([PositiveInt], voluptuous.Length(min=1))
        ),
        voluptuous.Required("replicates", default=200): PositiveInt,
        voluptuous.Required("first_replicate", default=0): NonNegativeInt,
        voluptuous.Required("truncation", default=None): voluptuous.Any(
            None, PositiveInt
        ),
        voluptuous.Required("grid_size", default=None): voluptuous.Any(
            None, PositiveInt
        ),
        voluptuous.Required("epsilon_constant", default=1.0): PositiveReal,
        voluptuous.Required("seed", default=0): Seed,
        voluptuous.Required("design", default=None): voluptuous.Any(None, *DESIGNS),
        voluptuous.Required("realization", default=None): voluptuous.Any(None, str),
        voluptuous.Required("realization_seed", default=None): voluptuous.Any(
            None, Seed
        ),
        voluptuous.Required("alphas", default=DEFAULT_ALPHAS): voluptuous.All(
            [OpenUnit], voluptuous.Length(min=1)
        ),
        voluptuous.Required("level", default=0.01): OpenUnit,
        voluptuous.Required("rel_tol", default=0.1): NonNegativeReal,
        voluptuous.Required("n_se", default=4.0): PositiveReal,
        voluptuous.Required("stored_trajectories", default=None): voluptuous.Any(
            None, NonNegativeInt
        ),
        voluptuous.Required("route", default="reweight"): voluptuous.Any(
            "gem", "reweight"
        ),
        voluptuous.Required("output", default=None): voluptuous.Any(None, str),
    },
    extra=voluptuous.PREVENT_EXTRA,
)


def _check_consistency(data):
    if not data["theta"] > -data["alpha"]:
        raise voluptuous.Invalid(
            f"theta must be > -alpha (alpha={data['alpha']})", path=["theta"]
        )
    if isinstance(data["n"], list) and data["kind"] != "crp-lln":
        raise voluptuous.Invalid(
            "a list of sizes is only accepted by crp-lln", path=["n"]
        )
    if data["design"] == "quenched" and data["kind"] not in QUENCHABLE_KINDS:
        raise voluptuous.Invalid(
            f"{data['kind']} has no quenched design", path=["design"]
        )
    if data["kind"] == "clt-w-quenched" and data["design"] == "annealed":
        raise voluptuous.Invalid(
            "clt-w-quenched pins its realization", path=["design"]
        )
    if data["realization"] is not None and _design(data) != "quenched":
        raise voluptuous.Invalid(
            "a pinned realization needs the quenched design", path=["realization"]
        )
    if data["kind"] == "change-of-measure" and data["n"] < 16:
        raise voluptuous.Invalid(
            "the epsilon schedule needs n >= 16", path=["n"]
        )
    if (
        data["kind"] == "crp-urn-equivalence"
        and data["route"] == "reweight"
        and data["theta"] != 0
    ):
        raise voluptuous.Invalid(
            "crp-urn-equivalence compares unweighted laws, use route gem",
            path=["route"],
        )
    return data


ExperimentSchema = voluptuous.Schema(voluptuous.All(_FieldsSchema, _check_consistency))


def _design(data) -> str:
    if data["design"] is not None:
        return data["design"]
    return "quenched" if data["kind"] == "clt-w-quenched" else "annealed"


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    alpha: float
    theta: float
    n: typing.Union[int, typing.Tuple[int, ...]]
    replicates: int
    first_replicate: int
    truncation: typing.Optional[int]
    grid_size: typing.Optional[int]
    epsilon_constant: float
    seed: int
    design: str
    realization: typing.Optional[str]
    realization_seed: typing.Optional[int]
    alphas: typing.Tuple[float, ...]
    level: float
    rel_tol: float
    n_se: float
    stored_trajectories: typing.Optional[int]
    route: str
    output: typing.Optional[str]

    @classmethod
    def from_dict(cls, data: typing.Dict[str, typing.Any]) -> "ExperimentConfig":
        try:
            data = ExperimentSchema(data)
        except voluptuous.MultipleInvalid as e:
            raise _to_config_error(e)
        except voluptuous.Invalid as e:
            raise _to_config_error(voluptuous.MultipleInvalid([e]))
        data = dict(data)
        data["design"] = _design(data)
        data["alphas"] = tuple(data["alphas"])
        if isinstance(data["n"], list):
            data["n"] = tuple(data["n"])
        return cls(**data)

    def to_json(self) -> typing.Dict[str, typing.Any]:
        data = dataclasses.asdict(self)
        data["alphas"] = list(self.alphas)
        if isinstance(self.n, tuple):
            data["n"] = list(self.n)
        return data

    def replace(self, **changes) -> "ExperimentConfig":
        data = self.to_json()
        data.update(changes)
        return self.from_dict(data)

    @property
    def sizes(self) -> typing.List[int]:
        return list(self.n) if isinstance(self.n, tuple) else [self.n]

    @property
    def size(self) -> int:
        return max(self.sizes)

    @property
    def replicate_indices(self) -> range:
        return range(self.first_replicate, self.first_replicate + self.replicates)


def _error_details(error: voluptuous.Invalid) -> typing.Dict[str, typing.Any]:
    return {
        "message": error.error_message,
        "path": [str(p) for p in error.path],
    }


def _to_config_error(error: voluptuous.MultipleInvalid):
    errors = sorted(error.errors, key=str)
    first = errors[0]
    return exceptions.InvalidExperimentConfig(
        str(first), first.path, [_error_details(e) for e in errors]
    )


def parse_override(override: str) -> typing.Tuple[str, typing.Any]:
    """Split ``key=value``; the value is read as JSON, else kept as a string."""
    key, sep, raw = override.partition("=")
    if not sep or not key:
        raise exceptions.InvalidExperimentConfig(
            f"override {override!r} is not of the form key=value"
        )
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def load_document(path: str) -> typing.Dict[str, typing.Any]:
    try:
        with open(path, encoding="utf-8") as f:
            document = json.load(f)
    except OSError as e:
        raise exceptions.InvalidExperimentConfig(f"cannot read {path}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise exceptions.InvalidExperimentConfig(f"{path} is not valid JSON: {e}")
    if not isinstance(document, dict):
        raise exceptions.InvalidExperimentConfig(f"{path} must hold a JSON object")
    return document


def load_config(
    path: typing.Optional[str] = None,
    overrides: typing.Sequence[str] = (),
    kind: typing.Optional[str] = None,
    output: typing.Optional[str] = None,
) -> ExperimentConfig:
    document = load_document(path) if path else {}
    if kind is not None:
        if document.get("kind", kind) != kind:
            raise exceptions.InvalidExperimentConfig(
                f"config describes {document['kind']!r}, not {kind!r}", ["kind"]
            )
        document["kind"] = kind
    for override in overrides:
        key, value = parse_override(override)
        document[key] = value
    if output is not None:
        document["output"] = output
    return ExperimentConfig.from_dict(document)
