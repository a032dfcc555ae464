# -*- encoding: utf-8 -*-
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
import importlib.metadata

import sentry_sdk

from crp_engine import config


try:
    __version__ = importlib.metadata.version("crp-engine")
except importlib.metadata.PackageNotFoundError:  # pragma: no cover
    __version__ = "0+unknown"


if config.SENTRY_URL:  # pragma: no cover
    sentry_sdk.init(
        config.SENTRY_URL,
        max_breadcrumbs=10,
        release=__version__,
        environment=config.SENTRY_ENVIRONMENT,
    )
