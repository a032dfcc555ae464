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
from crp_engine import limits
from crp_engine import stats
from crp_engine import urn
from crp_engine import utils


ALPHAS = (0.1, 0.3, 0.5, 0.7, 0.9)


def test_cov_z1_values():
    assert math.isclose(limits.cov_z1(1, 1, 0.5), math.sqrt(2) - 1)
    assert math.isclose(limits.cov_z1(1, 2, 0.5), math.sqrt(3) - math.sqrt(2))
    assert limits.cov_z1(0, 0.7, 0.3) == 0.0
    assert limits.cov_z1(0.3, 0.8, 0.4) == limits.cov_z1(0.8, 0.3, 0.4)


def test_cov_z2_values():
    assert math.isclose(limits.cov_z2(1, 1, 0.5), 2 - math.sqrt(2))
    assert limits.cov_z2(0, 0.7, 0.3) == 0.0
    s, t = numpy.meshgrid(numpy.linspace(0, 1, 11), numpy.linspace(0, 1, 11))
    assert numpy.all(limits.cov_z2(s, t, 0.6) >= 0)


def test_cov_z2_quadrature():
    alpha, s, t = 0.5, 1.0, 2.0

    def integrand(y):
        return -math.expm1(-s * y) * -math.expm1(-t * y) * alpha * y ** (-1 - alpha)

    value = integrate.quad(integrand, 0, 1, epsabs=1e-12, epsrel=1e-12, limit=200)[0]
    value += integrate.quad(
        integrand, 1, numpy.inf, epsabs=1e-12, epsrel=1e-12, limit=200
    )[0]
    assert math.isclose(
        value / math.gamma(1 - alpha), limits.cov_z2(s, t, alpha), abs_tol=1e-6
    )


@pytest.mark.parametrize(
    "s, t, alpha, expected",
    [(1, 1, 0.3, 1.0), (1, 1, 0.9, 1.0), (1, 2, 0.5, 1.0), (0.25, 0.64, 0.5, 0.5)],
)
def test_cov_sum_identity(s, t, alpha, expected):
    assert math.isclose(limits.cov_sum_identity(s, t, alpha), expected, rel_tol=1e-12)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_cov_sum_identity_random_grid(alpha):
    points = numpy.sort(utils.make_rng(int(alpha * 10)).random(50))
    s, t = numpy.meshgrid(points, points)
    total = limits.cov_sum_identity(s, t, alpha)
    numpy.testing.assert_allclose(
        total, numpy.minimum(s, t) ** alpha, rtol=0, atol=1e-12
    )


def test_kernel_validation():
    with pytest.raises(exceptions.InvalidParameters):
        limits.cov_z1(-0.1, 0.5, 0.5)
    with pytest.raises(exceptions.InvalidParameters):
        limits.cov_z2(0.1, 0.5, 1.0)
    with pytest.raises(exceptions.InvalidParameters):
        limits.CovKernel(0.5, "Z3")
    with pytest.raises(exceptions.InvalidParameters):
        limits.CovKernel(0.0, "Z1")


def test_cov_kernel():
    kernel = limits.CovKernel(0.5, "B-timechange")
    assert kernel(0.25, 0.64) == 0.5
    gram = kernel.gram([0.25, 1.0])
    numpy.testing.assert_allclose(gram, [[0.5, 0.5], [0.5, 1.0]])


@pytest.mark.parametrize("kind", limits.KERNEL_KINDS)
@pytest.mark.parametrize("alpha", ALPHAS)
def test_factorize(kind, alpha):
    kernel = limits.CovKernel(alpha, kind)
    grid = utils.uniform_grid(50)
    factor = limits.factorize(kernel, grid)
    assert factor.points.size == 50
    gram = kernel.gram(factor.points)
    reconstructed = factor.lower @ factor.lower.T
    scale = numpy.trace(gram)
    assert factor.jitter <= limits.JITTER_MAX * scale * (1 + 1e-9)
    numpy.testing.assert_allclose(
        reconstructed, gram, rtol=0, atol=limits.JITTER_MAX * scale * 10
    )


@pytest.mark.parametrize("kind", limits.KERNEL_KINDS)
@pytest.mark.parametrize("alpha", ALPHAS)
def test_factorize_random_grid(kind, alpha):
    rng = utils.make_rng(int(alpha * 100))
    grid = numpy.sort(rng.random(200))
    kernel = limits.CovKernel(alpha, kind)
    factor = limits.factorize(kernel, grid)
    gram = kernel.gram(factor.points)
    scale = numpy.trace(gram)
    assert factor.jitter <= limits.JITTER_MAX * scale * (1 + 1e-9)
    assert numpy.linalg.eigvalsh(gram).min() > -limits.JITTER_MAX * scale
    reconstructed = factor.lower @ factor.lower.T
    numpy.testing.assert_allclose(
        reconstructed, gram, rtol=0, atol=limits.JITTER_MAX * scale * 10
    )


def test_factorize_is_cached():
    kernel = limits.CovKernel(0.5, "Z1")
    grid = utils.uniform_grid(20)
    assert limits.factorize(kernel, grid) is limits.factorize(kernel, grid.copy())
    assert not limits.factorize(kernel, grid).lower.flags.writeable


def test_factorize_zero_grid():
    factor = limits.factorize(limits.CovKernel(0.5, "Z1"), [0.0])
    assert factor.points.size == 0


def test_simulate_gaussian_path_zero_at_origin():
    kernel = limits.CovKernel(0.5, "Z2")
    path = limits.simulate_gaussian_path(kernel, utils.uniform_grid(10), seed=3)
    assert path.kind == "gaussian-Z2"
    assert path.at(0.0) == 0.0
    assert path.values.shape == (11,)


def test_batch_rows_are_sequential_draws():
    kernel = limits.CovKernel(0.3, "Z1")
    grid = utils.uniform_grid(10)
    paths = limits.simulate_gaussian_paths(kernel, grid, 3, seed=7)
    single = limits.simulate_gaussian_path(kernel, grid, seed=7)
    numpy.testing.assert_allclose(paths[0], single.values, rtol=1e-12, atol=1e-15)
    with pytest.raises(exceptions.InvalidParameters):
        limits.simulate_gaussian_paths(kernel, grid, 0, seed=7)


def test_gaussian_path_moments():
    kernel = limits.CovKernel(0.5, "Z1")
    grid = numpy.array([0.0, 0.25, 0.5, 1.0])
    paths = limits.simulate_gaussian_paths(kernel, grid, 10 ** 4, seed=11)
    est = stats.moment_estimates(paths[:, -1])
    assert abs(est.variance - (math.sqrt(2) - 1)) < 3 * est.variance_se
    for column in paths[:, 1:].T:
        column_est = stats.moment_estimates(column)
        assert abs(column_est.mean) < 4 * column_est.mean_se
    cov = stats.empirical_cov_grid(paths)
    value, se = cov.at(2, 3)
    assert abs(value - limits.cov_z1(0.5, 1.0, 0.5)) < 4 * se


@pytest.mark.parametrize("s, t", [(0.25, 0.5), (0.5, 1.0), (0.25, 1.0)])
def test_z2_mean_square_increment(s, t):
    alpha = 0.5
    target = (
        limits.cov_z2(t, t, alpha)
        + limits.cov_z2(s, s, alpha)
        - 2 * limits.cov_z2(s, t, alpha)
    )
    expected = 2 * (s + t) ** alpha - (2 * s) ** alpha - (2 * t) ** alpha
    assert math.isclose(target, expected, rel_tol=1e-12)

    grid = numpy.array([0.0, 0.25, 0.5, 1.0])
    kernel = limits.CovKernel(alpha, "Z2")
    paths = limits.simulate_gaussian_paths(kernel, grid, 10 ** 4, seed=17)
    i, j = int(numpy.flatnonzero(grid == s)[0]), int(numpy.flatnonzero(grid == t)[0])
    est = stats.moment_estimates((paths[:, j] - paths[:, i]) ** 2)
    assert abs(est.mean - target) < 4 * est.mean_se


def test_mix_with_diversity():
    path = limits.simulate_gaussian_path(
        limits.CovKernel(0.5, "Z1"), utils.uniform_grid(5), seed=1
    )
    numpy.testing.assert_array_equal(
        limits.mix_with_diversity(path, 1.0).values, path.values
    )
    numpy.testing.assert_allclose(
        limits.mix_with_diversity(path, 4.0).values, 2 * path.values
    )
    with pytest.raises(exceptions.InvalidParameters):
        limits.mix_with_diversity(path, -1.0)


def test_mixture_variance():
    kernel = limits.CovKernel(0.5, "Z2")
    grid = numpy.array([0.0, 1.0])
    values = []
    for seed in range(3000):
        s = frequencies.sample_pd_theta0(0.5, 200, seed=seed).diversity
        path = limits.simulate_gaussian_path(kernel, grid, seed=10 ** 6 + seed)
        values.append(limits.mix_with_diversity(path, s).at(1.0))
    est = stats.moment_estimates(values)
    target = frequencies.diversity_moment(1, 0.5) * (2 - math.sqrt(2))
    assert abs(est.variance - target) < 4 * est.variance_se


def test_trajectory_kinds_match_urn():
    for kind in limits.KERNEL_KINDS:
        path = limits.simulate_gaussian_path(
            limits.CovKernel(0.5, kind), utils.uniform_grid(2), seed=0
        )
        assert path.kind in urn.KINDS
