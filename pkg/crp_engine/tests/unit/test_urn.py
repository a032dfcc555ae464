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
import math

import numpy
import pytest
from scipy import integrate

from crp_engine import exceptions
from crp_engine import frequencies
from crp_engine import stats
from crp_engine import urn
from crp_engine import utils


@pytest.fixture
def realization():
    return frequencies.sample_pd_theta0(0.5, 2000, seed=21)


def _fixed(freqs, alpha=0.5):
    return frequencies.FrequencyRealization.from_frequencies(alpha, freqs)


def test_single_cell():
    occ = urn.sample_occupancy(_fixed([1.0]), 50, seed=0)
    assert occ.k == 1
    assert list(occ.k_history) == [1] * 50
    assert occ.occupancy == {0: 50}
    assert occ.size_counts() == {50: 1}
    assert urn.conditional_mean_k(_fixed([1.0]), 17) == 1.0


def test_first_draw_opens_a_cell(realization):
    for seed in range(20):
        occ = urn.sample_occupancy(realization, 10, seed)
        assert occ.k_at(0) == 0
        assert occ.k_at(1) == 1


def test_two_equal_cells():
    real = _fixed([0.5, 0.5])
    assert math.isclose(urn.conditional_mean_k(real, 2), 1.5)
    ks = numpy.array([urn.sample_occupancy(real, 2, seed).k for seed in range(4000)])
    se = ks.std(ddof=1) / math.sqrt(ks.size)
    assert abs(ks.mean() - 1.5) < 4 * se


def test_occupancy_invariants(realization):
    occ = urn.sample_occupancy(realization, 5000, seed=3)
    assert occ.n == 5000
    assert sum(occ.occupancy.values()) == 5000
    assert len(occ.occupancy) == occ.k
    assert set(numpy.unique(numpy.diff(occ.k_history))) <= {0, 1}
    counts = occ.size_counts()
    assert sum(j * c for j, c in counts.items()) == 5000
    assert sum(counts.values()) == occ.k


def test_sample_occupancy_reproducible(realization):
    a = urn.sample_occupancy(realization, 1000, seed=5)
    b = urn.sample_occupancy(realization, 1000, seed=5)
    numpy.testing.assert_array_equal(a.k_history, b.k_history)
    assert a.occupancy == b.occupancy


def test_sample_occupancy_invalid(realization):
    with pytest.raises(exceptions.InvalidParameters):
        urn.sample_occupancy(realization, 0, seed=0)


def test_conditional_mean_matches_sampling(realization):
    n = 500
    ks = numpy.array(
        [urn.sample_occupancy(realization, n, seed).k for seed in range(2000)]
    )
    est = stats.moment_estimates(ks)
    assert abs(est.mean - urn.conditional_mean_k(realization, n)) < 4 * est.mean_se


def test_conditional_mean_k_edge_cases(realization):
    assert urn.conditional_mean_k(realization, 0) == 0.0
    with pytest.raises(exceptions.InvalidParameters):
        urn.conditional_mean_k(realization, -1)
    means = [urn.conditional_mean_k(realization, n) for n in (1, 10, 100, 1000)]
    assert math.isclose(means[0], 1.0)
    assert all(a < b for a, b in zip(means, means[1:]))


def test_conditional_mean_curve(realization):
    ns = [0, 5, 50, 500]
    curve = urn.conditional_mean_curve(realization, ns)
    numpy.testing.assert_allclose(
        curve, [urn.conditional_mean_k(realization, n) for n in ns]
    )
    assert urn.conditional_mean_curve(realization, ns) is curve
    assert not curve.flags.writeable


def test_conditional_mean_block_counts(realization):
    n = 300
    total = sum(
        j * urn.conditional_mean_block_counts(realization, n, j)
        for j in range(1, n + 1)
    )
    assert math.isclose(total, n, rel_tol=1e-9)
    blocks = sum(
        urn.conditional_mean_block_counts(realization, n, j) for j in range(1, n + 1)
    )
    assert math.isclose(blocks, urn.conditional_mean_k(realization, n), rel_tol=1e-9)
    with pytest.raises(exceptions.InvalidParameters):
        urn.conditional_mean_block_counts(realization, n, n + 1)


def test_poissonized_mean_k():
    assert urn.poissonized_mean_k(_fixed([1.0]), 0.0) == 0.0
    assert math.isclose(
        urn.poissonized_mean_k(_fixed([1.0]), 2.5), 1 - math.exp(-2.5)
    )
    with pytest.raises(exceptions.InvalidParameters):
        urn.poissonized_mean_k(_fixed([1.0]), -1.0)


def test_poissonized_mean_integral_form():
    real = _fixed([0.5, 0.3, 0.2])
    t = 7.0

    def integrand(x):
        return math.exp(-x) * frequencies.nu(real, t / x)

    # nu(t / x) jumps where t / x = 1 / p
    breaks = sorted(t * p for p in real.freqs)
    pieces = [0.0] + breaks + [60.0]
    value = sum(
        integrate.quad(integrand, a, b, epsabs=1e-13, epsrel=1e-13)[0]
        for a, b in zip(pieces, pieces[1:])
    )
    assert math.isclose(urn.poissonized_mean_k(real, t), value, abs_tol=1e-8)


def test_trajectory_grid():
    grid = utils.uniform_grid(4)
    trajectory = urn.TrajectoryGrid(grid, numpy.arange(5.0), 100, "W", 0.5, 0.0)
    assert trajectory.at(0.5) == 2.0
    with pytest.raises(exceptions.GridError):
        trajectory.at(0.3)
    rows = list(trajectory.rows(7))
    assert len(rows) == 5
    assert rows[1] == {
        "kind": "W",
        "n": 100,
        "alpha": 0.5,
        "theta": 0.0,
        "replicate": 7,
        "t": 0.25,
        "value": 1.0,
    }
    with pytest.raises(exceptions.InvalidParameters):
        urn.TrajectoryGrid(grid, numpy.zeros(5), 100, "X")
    with pytest.raises(exceptions.GridError):
        urn.TrajectoryGrid(grid, numpy.zeros(3), 100, "W")


def test_w_and_y_trajectories(realization):
    n = 4000
    grid = utils.uniform_grid(20)
    occ = urn.sample_occupancy(realization, n, seed=8)
    w = urn.w_trajectory(occ, realization, grid)
    y = urn.y_trajectory(realization, n, grid)
    assert w.kind == "W"
    assert y.kind == "Y"
    assert w.at(0.0) == 0.0
    assert y.at(0.0) == 0.0
    # W + Y is the centred count
    total = (occ.k - n ** 0.5 * realization.diversity) / n ** 0.25
    assert math.isclose(w.at(1.0) + y.at(1.0), total, rel_tol=1e-10, abs_tol=1e-10)


def test_y_trajectory_continuous_in_realization(realization):
    n = 10 ** 4
    grid = utils.uniform_grid(10)
    base = urn.y_trajectory(realization, n, grid).at(1.0)
    freqs = realization.freqs.copy()
    freqs[5] *= 1 + 1e-9
    perturbed = frequencies.FrequencyRealization(
        realization.alpha, 0.0, freqs, realization.diversity
    )
    moved = urn.y_trajectory(perturbed, n, grid).at(1.0)
    assert abs(moved - base) < 1e-6


def test_w_trajectory_quenched_moments():
    real = frequencies.sample_pd_theta0(0.5, 10 ** 5, seed=2)
    n = 10 ** 4
    grid = numpy.array([0.0, 1.0])
    values = numpy.array(
        [
            urn.w_trajectory(urn.sample_occupancy(real, n, seed), real, grid).at(1.0)
            for seed in range(1500)
        ]
    )
    est = stats.moment_estimates(values)
    target = (math.sqrt(2) - 1) * real.diversity
    assert abs(est.mean) < 4 * est.mean_se
    assert abs(est.variance - target) < max(0.1 * target, 4 * est.variance_se)


def test_poissonized_y_trajectory(realization):
    grid = utils.uniform_grid(10)
    trajectory = urn.poissonized_y_trajectory(realization, 1000, grid)
    assert trajectory.kind == "poissonized-Y"
    assert trajectory.at(0.0) == 0.0
    expected = (
        urn.poissonized_mean_k(realization, 500.0) - realization.diversity * 500 ** 0.5
    ) / 1000 ** 0.25
    assert math.isclose(trajectory.at(0.5), expected, rel_tol=1e-12)


@pytest.mark.parametrize("seed", range(100))
def test_coupling_identity(realization, seed):
    grid = utils.uniform_grid(100)
    run = urn.poissonized_run(realization, 1000, grid, seed)
    numpy.testing.assert_array_equal(run.coupled_k(), run.discrete_k())


def test_poissonized_run_keeps_first_arrivals(realization):
    grid = utils.uniform_grid(10)
    run = urn.poissonized_run(realization, 200, grid, seed=4)
    k = run.discrete_k()
    assert k[0] == 0
    assert numpy.all(numpy.diff(k) >= 0)
    assert numpy.unique(run.cells).size == run.cells.size
    assert numpy.all(numpy.diff(run.first_times) > 0)
    assert numpy.all(numpy.diff(run.first_ranks) > 0)
    assert run.first_ranks[0] == 1
    assert k[-1] == numpy.count_nonzero(run.first_ranks <= 200)
    assert run.arrivals >= 200


def test_poissonized_run_over_several_chunks(realization):
    n = 3 * urn._CHUNK_SIZE
    grid = utils.uniform_grid(20)
    run = urn.poissonized_run(realization, n, grid, seed=8)
    numpy.testing.assert_array_equal(run.coupled_k(), run.discrete_k())
    assert run.arrivals >= n
    assert run.cells.size <= realization.truncation_level + 1
    assert numpy.all(numpy.diff(run.grid_times) > 0)
    assert run.max_time_change_error() < 0.02


def test_poissonized_run_at_time_zero(realization):
    run = urn.poissonized_run(realization, 100, [0.0], seed=7)
    assert run.horizon == 0.0
    assert run.arrivals == 0
    assert run.cells.size == 0
    numpy.testing.assert_array_equal(run.poissonized_k(), [0])
    numpy.testing.assert_array_equal(run.discrete_k(), [0])
    numpy.testing.assert_array_equal(run.coupled_k(), [0])
    assert run.first_arrivals == {}


def test_poissonized_run_k_tilde(realization):
    grid = utils.uniform_grid(50)
    run = urn.poissonized_run(realization, 2000, grid, seed=6)
    k = run.poissonized_k()
    assert k[0] == 0
    assert numpy.all(numpy.diff(k) >= 0)
    assert run.k_tilde(0.0) == 0
    assert run.lambda_times[0] == 0.0
    with pytest.raises(exceptions.HorizonError):
        run.k_tilde(run.horizon * 2)
    with pytest.raises(exceptions.InvalidParameters):
        run.k_tilde(-1.0)
    assert all(t <= run.horizon for t in run.first_arrivals.values())
    assert len(run.first_arrivals) == run.k_tilde(run.horizon)


def test_poissonized_run_horizon(realization):
    grid = utils.uniform_grid(10)
    with pytest.raises(exceptions.HorizonError):
        urn.poissonized_run(realization, 1000, grid, seed=0, horizon=500.0)
    run = urn.poissonized_run(realization, 1000, grid, seed=0, horizon=3000.0)
    assert run.horizon == 3000.0
    assert run.k_tilde(3000.0) == len(run.first_arrivals)


def test_time_change_is_close_to_identity(realization):
    grid = utils.uniform_grid(100)
    errors = [
        urn.poissonized_run(realization, 10 ** 4, grid, seed).max_time_change_error()
        for seed in range(100)
    ]
    assert numpy.quantile(errors, 0.99) < 0.05


def test_poissonized_mean_matches_sampling(realization):
    grid = numpy.array([0.0, 1.0])
    values = numpy.array(
        [
            urn.poissonized_run(realization, 300, grid, seed).poissonized_k()[-1]
            for seed in range(2000)
        ]
    )
    est = stats.moment_estimates(values)
    assert abs(est.mean - urn.poissonized_mean_k(realization, 300.0)) < 4 * est.mean_se
