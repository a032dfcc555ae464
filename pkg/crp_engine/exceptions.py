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
import typing


class CrpEngineError(Exception):
    pass


class InvalidParameters(CrpEngineError, ValueError):
    pass


class GridError(CrpEngineError, ValueError):
    pass


class TruncationError(CrpEngineError):
    pass


class ZeroFrequency(CrpEngineError, ValueError):
    pass


class EmptyWindow(CrpEngineError):
    def __init__(self, window):
        super().__init__(window)
        self.window = window

    def __str__(self):
        return f"no arrival time below {self.window}"


class HorizonError(CrpEngineError):
    def __init__(self, horizon, needed):
        super().__init__(horizon, needed)
        self.horizon = horizon
        self.needed = needed

    def __str__(self):
        return f"horizon {self.horizon} is shorter than {self.needed}"


class FactorizationError(CrpEngineError):
    def __init__(self, kind, jitter):
        super().__init__(kind, jitter)
        self.kind = kind
        self.jitter = jitter

    def __str__(self):
        return f"{self.kind} Gram matrix not factorizable with jitter {self.jitter}"


class IdentityViolation(CrpEngineError):
    def __init__(self, name, deviation, tolerance):
        super().__init__(name, deviation, tolerance)
        self.name = name
        self.deviation = deviation
        self.tolerance = tolerance

    def __str__(self):
        return f"{self.name} violated: deviation {self.deviation} > {self.tolerance}"


class InvalidExperimentConfig(CrpEngineError):
    def __init__(self, message, path=None, errors=None):
        super().__init__(message, path, errors)
        self.message = message
        self.path = path or []
        self.errors = errors or []

    def __str__(self):
        return self.message

    def as_dict(self) -> typing.Dict[str, typing.Any]:
        return {
            "error": "invalid-config",
            "message": self.message,
            "path": [str(p) for p in self.path],
            "errors": self.errors,
        }


class OutputFormatError(CrpEngineError):
    def __init__(self, filename, message):
        super().__init__(filename, message)
        self.filename = filename
        self.message = message

    def __str__(self):
        return f"{self.filename}: {self.message}"


class OutputDirectoryError(OutputFormatError):
    pass
