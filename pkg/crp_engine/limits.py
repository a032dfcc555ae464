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
"""Covariance kernels of the limit processes and Gaussian path sampling."""

import dataclasses
import math

import cachetools
import daiquiri
import numpy

from crp_engine import exceptions
from crp_engine import urn
from crp_engine import utils


LOG = daiquiri.getLogger(__name__)

KERNEL_KINDS = ("Z1", "Z2", "B-timechange")

_TRAJECTORY_KINDS = {
    "Z1": "gaussian-Z1",
    "Z2": "gaussian-Z2",
    "B-timechange": "gaussian-B",
}

IDENTITY_TOLERANCE = 1e-12

JITTER_START = 1e-14
JITTER_MAX = 1e-10

_FACTORIZATION_CACHE = cachetools.LRUCache(maxsize=64)


def _check_times(s, t, alpha):
    if not 0 < alpha < 1:
        raise exceptions.InvalidParameters(f"alpha must lie in (0, 1), got {alpha}")
    s = numpy.asarray(s, dtype=float)
    t = numpy.asarray(t, dtype=float)
    if numpy.any(s < 0) or numpy.any(t < 0):
        raise exceptions.InvalidParameters("kernel times must be >= 0")
    return s, t


def _scalar(value):
    if numpy.ndim(value) == 0:
        return float(value)
    return value


def cov_z1(s, t, alpha: float):
    s, t = _check_times(s, t, alpha)
    return _scalar((s + t) ** alpha - numpy.maximum(s ** alpha, t ** alpha))


def cov_z2(s, t, alpha: float):
    s, t = _check_times(s, t, alpha)
    return _scalar(s ** alpha + t ** alpha - (s + t) ** alpha)


def cov_bm_timechange(s, t, alpha: float):
    s, t = _check_times(s, t, alpha)
    return _scalar(numpy.minimum(s, t) ** alpha)


def cov_sum_identity(s, t, alpha: float):
    """cov_z1 + cov_z2, checked against min(s, t) ** alpha."""
    total = numpy.asarray(cov_z1(s, t, alpha)) + numpy.asarray(cov_z2(s, t, alpha))
    deviation = float(
        numpy.max(numpy.abs(total - numpy.asarray(cov_bm_timechange(s, t, alpha))))
    )
    if deviation > IDENTITY_TOLERANCE:
        raise exceptions.IdentityViolation(
            "cov_z1 + cov_z2 = min(s, t)^alpha", deviation, IDENTITY_TOLERANCE
        )
    return _scalar(total)


_KERNEL_FUNCTIONS = {
    "Z1": cov_z1,
    "Z2": cov_z2,
    "B-timechange": cov_bm_timechange,
}


@dataclasses.dataclass(frozen=True)
class CovKernel:
    alpha: float
    kind: str

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise exceptions.InvalidParameters(f"unknown kernel kind {self.kind}")
        if not 0 < self.alpha < 1:
            raise exceptions.InvalidParameters(
                f"alpha must lie in (0, 1), got {self.alpha}"
            )

    def __call__(self, s, t):
        return _KERNEL_FUNCTIONS[self.kind](s, t, self.alpha)

    def gram(self, points) -> numpy.ndarray:
        points = numpy.asarray(points, dtype=float)
        return numpy.asarray(self(points[:, None], points[None, :]), dtype=float)


@dataclasses.dataclass(frozen=True, eq=False)
class Factorization:
    kernel: CovKernel
    points: numpy.ndarray
    lower: numpy.ndarray
    jitter: float


@cachetools.cached(
    cache=_FACTORIZATION_CACHE,
    key=lambda kernel, grid: cachetools.keys.hashkey(
        kernel, utils.array_fingerprint(numpy.asarray(grid, dtype=float))
    ),
)
def factorize(kernel: CovKernel, grid) -> Factorization:
    """Cholesky factor of the Gram matrix on the positive grid points.

    A diagonal jitter starting at 1e-14 * trace / G is added and raised
    tenfold after each failure, up to 1e-10 * trace.
    """
    grid = utils.check_grid(grid)
    points = grid[grid > 0]
    if points.size == 0:
        return Factorization(kernel, points, numpy.zeros((0, 0)), 0.0)

    gram = kernel.gram(points)
    trace = float(numpy.trace(gram))
    jitter = JITTER_START * trace / points.size
    while jitter <= JITTER_MAX * trace * (1 + 1e-9):
        try:
            lower = numpy.linalg.cholesky(gram + jitter * numpy.eye(points.size))
        except numpy.linalg.LinAlgError:
            jitter *= 10
            continue
        LOG.debug("gram factorized", kind=kernel.kind, size=points.size, jitter=jitter)
        lower.setflags(write=False)
        return Factorization(kernel, points, lower, jitter)
    raise exceptions.FactorizationError(kernel.kind, jitter / 10)


def simulate_gaussian_paths(
    kernel: CovKernel, grid, count: int, seed: int
) -> numpy.ndarray:
    """Draw ``count`` paths as rows, row i using the i-th block of normals."""
    if count < 1:
        raise exceptions.InvalidParameters(f"count must be >= 1, got {count}")
    grid = utils.check_grid(grid)
    factor = factorize(kernel, grid)
    rng = utils.make_rng(seed)
    normals = utils.standard_normals(rng, (count, factor.points.size))
    paths = numpy.zeros((count, grid.size))
    paths[:, grid > 0] = normals @ factor.lower.T
    return paths


def simulate_gaussian_path(kernel: CovKernel, grid, seed: int) -> urn.TrajectoryGrid:
    grid = utils.check_grid(grid)
    values = simulate_gaussian_paths(kernel, grid, 1, seed)[0]
    return urn.TrajectoryGrid(
        grid, values, 1, _TRAJECTORY_KINDS[kernel.kind], kernel.alpha
    )


def mix_with_diversity(
    path: urn.TrajectoryGrid, s_alpha: float
) -> urn.TrajectoryGrid:
    if not s_alpha >= 0:
        raise exceptions.InvalidParameters(f"s_alpha must be >= 0, got {s_alpha}")
    return dataclasses.replace(path, values=path.values * math.sqrt(s_alpha))

