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

import logging
import os

import dotenv
import voluptuous


_TRUE_STRINGS = ("y", "yes", "t", "true", "on", "1")
_FALSE_STRINGS = ("n", "no", "f", "false", "off", "0")


# NOTE: we coerce bool and int in case they are loaded from the environment
def CoercedBool(value):
    if isinstance(value, bool):
        return value
    value = str(value).lower()
    if value in _TRUE_STRINGS:
        return True
    if value in _FALSE_STRINGS:
        return False
    raise ValueError(value)


def CoercedLoggingLevel(value):
    value = value.upper()
    if value in ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"):
        return getattr(logging, value)
    raise ValueError(value)


PositiveInt = voluptuous.All(voluptuous.Coerce(int), voluptuous.Range(min=1))


Schema = voluptuous.Schema(
    {
        # Logging
        voluptuous.Required("LOG_LEVEL", default="INFO"): CoercedLoggingLevel,
        voluptuous.Required("LOG_STDERR", default=True): CoercedBool,
        voluptuous.Required("LOG_STDERR_LEVEL", default=None): voluptuous.Any(
            None, CoercedLoggingLevel
        ),
        voluptuous.Required("SENTRY_URL", default=None): voluptuous.Any(None, str),
        voluptuous.Required("SENTRY_ENVIRONMENT", default="dev"): str,
        # Orchestration
        voluptuous.Required("WORKERS", default=1): PositiveInt,
        voluptuous.Required("BATCH_SIZE", default=256): PositiveInt,
        voluptuous.Required("OUTPUT_DIR", default="results"): str,
        # Simulation defaults
        voluptuous.Required("MAX_TRUNCATION", default=10_000_000): PositiveInt,
        voluptuous.Required("TAIL_MASS_TOLERANCE", default=1e-3): voluptuous.All(
            voluptuous.Coerce(float), voluptuous.Range(min=0, min_included=False)
        ),
        voluptuous.Required("GRID_SIZE", default=100): PositiveInt,
        voluptuous.Required("STORED_TRAJECTORIES", default=50): voluptuous.All(
            voluptuous.Coerce(int), voluptuous.Range(min=0)
        ),
    }
)


configuration_file = os.getenv("CRPENGINE_TEST_SETTINGS")
if configuration_file:
    dotenv.load_dotenv(dotenv_path=configuration_file, override=True)

CONFIG = {}
for key, value in Schema.schema.items():
    val = os.getenv("CRPENGINE_%s" % key)
    if val is not None:
        CONFIG[key] = val

CONFIG = Schema(CONFIG)
globals().update(CONFIG)
