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
"""Sequential Chinese restaurant process with (alpha, theta) seating.

Each step consumes exactly one uniform ``u`` from the generator. With
``n`` customers seated in ``k`` tables of sizes ``s_1..s_k`` (creation
order), the target ``u * (n + theta)`` is compared with the cumulative
weights ``c_j = (s_1 - alpha) + ... + (s_j - alpha)``: the customer joins
the first table with ``target < c_j``, or opens table ``k + 1`` when no
such table exists.
"""

import dataclasses
import math
import typing

import daiquiri
import numpy
from scipy import special

from crp_engine import exceptions
from crp_engine import utils


LOG = daiquiri.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class CrpParams:
    alpha: float
    theta: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise exceptions.InvalidParameters(
                f"alpha must lie in (0, 1), got {self.alpha}"
            )
        if not self.theta > -self.alpha:
            raise exceptions.InvalidParameters(
                f"theta must be > -alpha, got theta={self.theta} alpha={self.alpha}"
            )


@dataclasses.dataclass(frozen=True)
class PartitionState:
    block_sizes: typing.Tuple[int, ...] = (1,)

    def __post_init__(self):
        object.__setattr__(self, "block_sizes", tuple(self.block_sizes))
        if not self.block_sizes or any(s < 1 for s in self.block_sizes):
            raise exceptions.InvalidParameters("block sizes must be positive")

    @property
    def n(self) -> int:
        return sum(self.block_sizes)

    @property
    def k(self) -> int:
        return len(self.block_sizes)

    def transition_probabilities(self, params: CrpParams) -> numpy.ndarray:
        """Probabilities of joining each table, the last entry being a new table."""
        weights = numpy.append(
            numpy.asarray(self.block_sizes, dtype=float) - params.alpha,
            self.k * params.alpha + params.theta,
        )
        return weights / (self.n + params.theta)


@dataclasses.dataclass
class CrpTrajectory:
    params: CrpParams
    k_history: numpy.ndarray
    final_size_counts: typing.Dict[int, int]

    @property
    def n(self) -> int:
        return len(self.k_history)

    @property
    def k(self) -> int:
        return int(self.k_history[-1])

    def k_ratio(self) -> float:
        return self.k / self.n ** self.params.alpha

    def size_ratio(self, j: int) -> float:
        return self.final_size_counts.get(j, 0) / self.k


def _choose_table(cumulative: numpy.ndarray, k: int, target: float) -> int:
    # Index of the first table whose cumulative weight exceeds the target,
    # k meaning a new table.
    return int(numpy.searchsorted(cumulative[:k], target, side="right"))


def _cumulative_weights(block_sizes, alpha):
    sizes = numpy.asarray(block_sizes, dtype=float)
    return numpy.cumsum(sizes - alpha)


def crp_step(
    state: PartitionState, params: CrpParams, rng: numpy.random.Generator
) -> PartitionState:
    target = rng.random() * (state.n + params.theta)
    j = _choose_table(
        _cumulative_weights(state.block_sizes, params.alpha), state.k, target
    )
    sizes = list(state.block_sizes)
    if j < state.k:
        sizes[j] += 1
    else:
        sizes.append(1)
    return PartitionState(tuple(sizes))


def simulate_crp(n: int, params: CrpParams, seed: int) -> CrpTrajectory:
    """Seat ``n`` customers and return the component count history.

    The uniforms for steps 2..n are drawn in one block of ``n - 1`` doubles,
    which yields the same stream as ``n - 1`` successive :func:`crp_step`
    calls on a generator seeded identically.
    """
    if n < 1:
        raise exceptions.InvalidParameters(f"n must be >= 1, got {n}")

    rng = utils.make_rng(seed)
    uniforms = rng.random(n - 1)

    sizes = numpy.zeros(n, dtype=numpy.int64)
    cumulative = numpy.zeros(n, dtype=float)
    k_history = numpy.empty(n, dtype=numpy.int64)

    sizes[0] = 1
    cumulative[0] = 1 - params.alpha
    k = 1
    k_history[0] = 1
    for m in range(1, n):
        j = _choose_table(cumulative, k, uniforms[m - 1] * (m + params.theta))
        if j < k:
            sizes[j] += 1
            cumulative[j:k] += 1
        else:
            sizes[k] = 1
            cumulative[k] = cumulative[k - 1] + 1 - params.alpha
            k += 1
        k_history[m] = k

    counts = numpy.bincount(sizes[:k])
    final_size_counts = {int(j): int(c) for j, c in enumerate(counts) if j and c}
    LOG.debug("crp simulated", n=n, k=k, alpha=params.alpha, theta=params.theta)
    return CrpTrajectory(params, k_history, final_size_counts)


def sibuya_pmf(j, alpha: float):
    """Sibuya probability mass αΓ(j−α)/(Γ(1−α)Γ(j+1)), vectorised over j."""
    if not 0 < alpha < 1:
        raise exceptions.InvalidParameters(f"alpha must lie in (0, 1), got {alpha}")
    j_array = numpy.asarray(j, dtype=float)
    if numpy.any(j_array < 1) or numpy.any(j_array != numpy.floor(j_array)):
        raise exceptions.InvalidParameters("j must be a positive integer")
    logp = (
        math.log(alpha)
        + special.gammaln(j_array - alpha)
        - special.gammaln(1 - alpha)
        - special.gammaln(j_array + 1)
    )
    result = numpy.exp(logp)
    if numpy.ndim(result) == 0:
        return float(result)
    return result


def expected_components(n: int, params: CrpParams) -> float:
    """Exact E[K_n] of the (alpha, theta) restaurant."""
    if n < 1:
        raise exceptions.InvalidParameters(f"n must be >= 1, got {n}")
    a, t = params.alpha, params.theta
    ratio = math.exp(special.gammaln(t + a + n) - special.gammaln(t + n))
    if t == 0:
        return ratio / math.exp(special.gammaln(1 + a))
    lead = math.exp(special.gammaln(t + 1) - special.gammaln(t + a)) / a
    return lead * ratio - t / a
