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
import hashlib
import math
import typing

import numpy
from scipy import special

from crp_engine import exceptions


RNG_METHOD = "numpy.random.PCG64"
NORMAL_METHOD = "inverse-cdf"
SEED_DERIVATION = "splitmix64"

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# Uniforms are clipped away from {0, 1} before the inverse normal CDF
_NORMAL_EPSILON = 2.0 ** -60

# Rounding slack of floor_nt, in ulps of n·t
_FLOOR_ULPS = 4


def _splitmix64_finalize(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, replicate: int) -> int:
    """Derive the 64-bit seed of a replicate stream.

    The stream state is ``master + (replicate + 1) * 0x9E3779B97F4A7C15``
    modulo 2**64 passed through the SplitMix64 finalizer. Both steps are
    bijections on 64-bit integers, so seeds never collide for distinct
    replicate indices under the same master (nor for distinct masters at the
    same index). Only integer arithmetic is involved, hence identical on
    every platform.

    :param master: The master seed of the run.
    :param replicate: The replicate index, or sub-stream number.
    :return: A seed in [0, 2**64).
    """
    if master < 0 or replicate < 0:
        raise exceptions.InvalidParameters("seeds and replicate indices are >= 0")
    state = (master + (replicate + 1) * _GOLDEN_GAMMA) & _MASK64
    return _splitmix64_finalize(state)


def make_rng(seed: int) -> numpy.random.Generator:
    return numpy.random.Generator(numpy.random.PCG64(seed))


def standard_normals(rng: numpy.random.Generator, size) -> numpy.ndarray:
    """Draw standard normals by inverse CDF, one PCG64 uniform per value."""
    u = rng.random(size)
    return special.ndtri(numpy.clip(u, _NORMAL_EPSILON, 1.0 - _NORMAL_EPSILON))


def floor_nt(n: int, t: float) -> int:
    """Return ⌊n·t⌋, nudged up when n·t lies a few ulps below an integer.

    ``100 * 0.29`` evaluates to ``28.999999999999996``; the grid point
    meant 29.
    """
    x = n * t
    k = math.floor(x)
    if (k + 1) - x <= _FLOOR_ULPS * math.ulp(x):
        k += 1
    return int(k)


def uniform_grid(size: int) -> numpy.ndarray:
    if size < 1:
        raise exceptions.GridError("grid needs at least one interval")
    return numpy.linspace(0.0, 1.0, size + 1)


def check_grid(grid: typing.Iterable[float]) -> numpy.ndarray:
    grid = numpy.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise exceptions.GridError("grid must be a non-empty sequence")
    if not numpy.all(numpy.isfinite(grid)) or numpy.any((grid < 0) | (grid > 1)):
        raise exceptions.GridError("grid points must lie in [0, 1]")
    if numpy.any(numpy.diff(grid) <= 0):
        raise exceptions.GridError("grid points must be increasing")
    return grid


def array_fingerprint(*parts: typing.Any) -> str:
    """A stable short hash over scalars and arrays."""
    digest = hashlib.sha256()
    for part in parts:
        if isinstance(part, numpy.ndarray):
            digest.update(numpy.ascontiguousarray(part, dtype="<f8").tobytes())
        else:
            digest.update(repr(part).encode())
        digest.update(b"|")
    return digest.hexdigest()[:16]
