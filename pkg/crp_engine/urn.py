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
"""Occupancy of the infinite urn given a frequency realization.

Cells are the ranked frequencies plus, when the realization is truncated,
one reservoir cell carrying the tail mass. Everything here, sampling and
conditional means alike, runs over that same cell list.
"""

import dataclasses
import functools
import typing

import cachetools
import daiquiri
import numpy
from scipy import stats

from crp_engine import exceptions
from crp_engine import frequencies
from crp_engine import utils


LOG = daiquiri.getLogger(__name__)

KINDS = ("W", "Y", "poissonized-Y", "gaussian-Z1", "gaussian-Z2", "gaussian-B")

_CURVE_CACHE = cachetools.LRUCache(maxsize=256)

# Exponentials drawn per chunk beyond the expected need
_CHUNK_MARGIN = 64
_CHUNK_SIZE = 1 << 16


@dataclasses.dataclass(frozen=True, eq=False)
class OccupancyResult:
    n: int
    k_history: numpy.ndarray
    occupancy: typing.Dict[int, int]

    @property
    def k(self) -> int:
        return int(self.k_history[-1])

    def k_at(self, m: int) -> int:
        return 0 if m == 0 else int(self.k_history[m - 1])

    def size_counts(self) -> typing.Dict[int, int]:
        """Number of cells holding exactly j balls, for each j."""
        counts = numpy.bincount(numpy.fromiter(self.occupancy.values(), dtype=int))
        return {int(j): int(c) for j, c in enumerate(counts) if j and c}


@dataclasses.dataclass(frozen=True, eq=False)
class TrajectoryGrid:
    grid: numpy.ndarray
    values: numpy.ndarray
    n: int
    kind: str
    alpha: typing.Optional[float] = None
    theta: typing.Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise exceptions.InvalidParameters(f"unknown trajectory kind {self.kind}")
        object.__setattr__(self, "grid", numpy.asarray(self.grid, dtype=float))
        object.__setattr__(self, "values", numpy.asarray(self.values, dtype=float))
        if self.values.shape != self.grid.shape:
            raise exceptions.GridError("one value per grid point is required")

    def at(self, t: float) -> float:
        index = numpy.flatnonzero(self.grid == t)
        if index.size == 0:
            raise exceptions.GridError(f"{t} is not a grid point")
        return float(self.values[index[0]])

    def rows(self, replicate: int) -> typing.Iterator[typing.Dict[str, typing.Any]]:
        for t, value in zip(self.grid, self.values):
            yield {
                "kind": self.kind,
                "n": self.n,
                "alpha": self.alpha,
                "theta": self.theta,
                "replicate": replicate,
                "t": float(t),
                "value": float(value),
            }
@dataclasses.dataclass(frozen=True, eq=False)
class PoissonizedRun:
    """Superposed unit-rate arrivals, each labelled with an i.i.d. cell.

    Cell ``l`` then receives a Poisson process of rate ``P_l`` and the
    number of occupied cells at time ``s`` is ``K~(s)``. Labels of the
    first ``m`` arrivals are the first ``m`` draws of the urn, so
    ``K~(G_m) = K_m`` where ``G_m`` is the m-th arrival time.

    Only the first arrival of each cell is kept, with its time and its
    rank among all arrivals, plus the arrival times at the grid ranks.
    """

    n: int
    horizon: float
    grid: numpy.ndarray
    cells: numpy.ndarray
    first_times: numpy.ndarray
    first_ranks: numpy.ndarray
    grid_times: numpy.ndarray
    arrivals: int

    @functools.cached_property
    def first_arrivals(self) -> typing.Dict[int, float]:
        """First arrival time of every cell seen before the horizon."""
        return {
            int(cell): float(time)
            for cell, time in zip(self.cells, self.first_times)
            if time <= self.horizon
        }

    @functools.cached_property
    def _grid_indices(self) -> numpy.ndarray:
        return numpy.array([utils.floor_nt(self.n, t) for t in self.grid])

    @property
    def lambda_times(self) -> numpy.ndarray:
        """The time change G_{floor(nt)} / n at each grid point, G_0 = 0."""
        return self.grid_times / self.n

    def k_tilde(self, s):
        s = numpy.asarray(s, dtype=float)
        if numpy.any(s < 0):
            raise exceptions.InvalidParameters("K~ is defined for s >= 0")
        if numpy.any(s > self.horizon):
            raise exceptions.HorizonError(self.horizon, float(numpy.max(s)))
        counts = numpy.searchsorted(self.first_times, s, side="right")
        if numpy.ndim(counts) == 0:
            return int(counts)
        return counts

    def poissonized_k(self) -> numpy.ndarray:
        """K~(nt) at each grid point."""
        return self.k_tilde(self.n * self.grid)

    def coupled_k(self) -> numpy.ndarray:
        """K~(n * lambda_n(t)) at each grid point.

        ``n * lambda_n(t)`` is taken as the arrival time itself so the
        evaluation point carries no rounding.
        """
        return self.k_tilde(self.grid_times)

    def discrete_k(self) -> numpy.ndarray:
        """K_{floor(nt)}, the cells first drawn within the first floor(nt) labels."""
        return numpy.searchsorted(self.first_ranks, self._grid_indices, side="right")

    def max_time_change_error(self) -> float:
        return float(numpy.max(numpy.abs(self.lambda_times - self.grid)))


def _draw_cells(
    real: frequencies.FrequencyRealization, rng: numpy.random.Generator, size: int
) -> numpy.ndarray:
    table = real.cumulative_table
    cells = numpy.searchsorted(table, rng.random(size), side="right")
    return numpy.minimum(cells, len(table) - 1)


def sample_occupancy(
    real: frequencies.FrequencyRealization, n: int, seed: int
) -> OccupancyResult:
    """Throw ``n`` balls, one uniform each, through the cumulative cell table."""
    if n < 1:
        raise exceptions.InvalidParameters(f"n must be >= 1, got {n}")
    rng = utils.make_rng(seed)
    cells = _draw_cells(real, rng, n)
    unique, first, counts = numpy.unique(cells, return_index=True, return_counts=True)
    opened = numpy.zeros(n, dtype=numpy.int64)
    opened[first] = 1
    return OccupancyResult(
        n=n,
        k_history=numpy.cumsum(opened),
        occupancy={int(c): int(k) for c, k in zip(unique, counts)},
    )


def conditional_mean_k(real: frequencies.FrequencyRealization, n: int) -> float:
    """E(K_n | P), the sum over cells of 1 - (1 - p) ** n."""
    if n < 0:
        raise exceptions.InvalidParameters(f"n must be >= 0, got {n}")
    if n == 0:
        return 0.0
    with numpy.errstate(divide="ignore"):
        log_miss = numpy.log1p(-real.cell_probabilities)
    return float(numpy.sum(-numpy.expm1(n * log_miss)))


@cachetools.cached(
    cache=_CURVE_CACHE,
    key=lambda real, ns: cachetools.keys.hashkey(
        real.fingerprint, tuple(int(m) for m in ns)
    ),
)
def conditional_mean_curve(
    real: frequencies.FrequencyRealization, ns: typing.Sequence[int]
) -> numpy.ndarray:
    curve = numpy.array([conditional_mean_k(real, int(m)) for m in ns])
    curve.setflags(write=False)
    return curve


def poissonized_mean_k(real: frequencies.FrequencyRealization, t: float) -> float:
    """E(K~(t) | P), the sum over cells of 1 - exp(-p t)."""
    if t < 0:
        raise exceptions.InvalidParameters(f"t must be >= 0, got {t}")
    return float(numpy.sum(-numpy.expm1(-real.cell_probabilities * t)))


def conditional_mean_block_counts(
    real: frequencies.FrequencyRealization, n: int, j: int
) -> float:
    """E(C_{n,j} | P), the expected number of cells holding exactly j balls."""
    if n < 1 or not 1 <= j <= n:
        raise exceptions.InvalidParameters(f"need 1 <= j <= n, got j={j} n={n}")
    return float(numpy.sum(stats.binom.pmf(j, n, real.cell_probabilities)))


def _grid_steps(n: int, grid) -> typing.Tuple[numpy.ndarray, numpy.ndarray]:
    grid = utils.check_grid(grid)
    return grid, numpy.array([utils.floor_nt(n, t) for t in grid])


def w_trajectory(
    occ: OccupancyResult, real: frequencies.FrequencyRealization, grid
) -> TrajectoryGrid:
    """Sampling fluctuation (K_m - E(K_m | P)) / n ** (alpha/2), m = floor(nt)."""
    grid, steps = _grid_steps(occ.n, grid)
    counts = numpy.array([occ.k_at(m) for m in steps], dtype=float)
    values = (counts - conditional_mean_curve(real, steps)) / occ.n ** (
        real.alpha / 2
    )
    return TrajectoryGrid(grid, values, occ.n, "W", real.alpha, real.theta)


def y_trajectory(
    real: frequencies.FrequencyRealization, n: int, grid
) -> TrajectoryGrid:
    """Fluctuation (E(K_m | P) - m ** alpha * S) / n ** (alpha/2), m = floor(nt)."""
    if n < 1:
        raise exceptions.InvalidParameters(f"n must be >= 1, got {n}")
    grid, steps = _grid_steps(n, grid)
    means = conditional_mean_curve(real, steps)
    values = (means - steps ** real.alpha * real.diversity) / n ** (real.alpha / 2)
    return TrajectoryGrid(grid, values, n, "Y", real.alpha, real.theta)


def poissonized_y_trajectory(
    real: frequencies.FrequencyRealization, n: int, grid
) -> TrajectoryGrid:
    """(E(K~(nt) | P) - S (nt) ** alpha) / n ** (alpha/2)."""
    if n < 1:
        raise exceptions.InvalidParameters(f"n must be >= 1, got {n}")
    grid = utils.check_grid(grid)
    means = numpy.array([poissonized_mean_k(real, n * t) for t in grid])
    values = (means - real.diversity * (n * grid) ** real.alpha) / n ** (
        real.alpha / 2
    )
    return TrajectoryGrid(grid, values, n, "poissonized-Y", real.alpha, real.theta)


def poissonized_run(
    real: frequencies.FrequencyRealization,
    n: int,
    grid,
    seed: int,
    horizon: typing.Optional[float] = None,
) -> PoissonizedRun:
    """Simulate labelled arrivals far enough to evaluate K~(nt) and K_{floor(nt)}.

    Arrivals are drawn in chunks of at most ``_CHUNK_SIZE``; each chunk
    consumes its exponential gaps first and then one uniform label per
    arrival. Without ``horizon`` the simulation stops once both
    ``n * max(grid)`` and the ``floor(n max(grid))``-th arrival are covered.
    Memory stays proportional to the number of cells.
    """
    if n < 1:
        raise exceptions.InvalidParameters(f"n must be >= 1, got {n}")
    grid = utils.check_grid(grid)
    needed_time = n * grid[-1]
    needed_count = utils.floor_nt(n, grid[-1])
    if horizon is not None and horizon < needed_time:
        raise exceptions.HorizonError(horizon, needed_time)
    target_time = needed_time if horizon is None else horizon

    ranks = numpy.array([utils.floor_nt(n, t) for t in grid])
    grid_times = numpy.zeros(len(grid))
    seen = numpy.zeros(len(real.cumulative_table), dtype=bool)
    cells: typing.List[numpy.ndarray] = []
    first_times: typing.List[numpy.ndarray] = []
    first_ranks: typing.List[numpy.ndarray] = []

    rng = utils.make_rng(seed)
    last, count = 0.0, 0
    while count < needed_count or last < target_time:
        size = max(needed_count - count, int(target_time - last)) + _CHUNK_MARGIN
        size = min(size, _CHUNK_SIZE)
        chunk = last + numpy.cumsum(rng.standard_exponential(size))
        labels = _draw_cells(real, rng, size)

        new, first = numpy.unique(labels, return_index=True)
        fresh = ~seen[new]
        new, first = new[fresh], first[fresh]
        order = numpy.argsort(first)
        new, first = new[order], first[order]
        seen[new] = True
        cells.append(new)
        first_times.append(chunk[first])
        first_ranks.append(count + 1 + first)

        inside = (ranks > count) & (ranks <= count + size)
        grid_times[inside] = chunk[ranks[inside] - count - 1]
        last, count = float(chunk[-1]), count + size

    if horizon is None:
        horizon = last
    elif needed_count and grid_times[-1] > horizon:
        raise exceptions.HorizonError(horizon, float(grid_times[-1]))

    empty = [numpy.empty(0)]
    run = PoissonizedRun(
        n=n,
        horizon=horizon,
        grid=grid,
        cells=numpy.concatenate(empty + cells).astype(numpy.int64),
        first_times=numpy.concatenate(empty + first_times),
        first_ranks=numpy.concatenate(empty + first_ranks).astype(numpy.int64),
        grid_times=grid_times,
        arrivals=count,
    )
    LOG.debug(
        "poissonized run", n=n, horizon=horizon, arrivals=count, cells=len(run.cells)
    )
    return run
