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
"""Estimators and tests turning replicate outputs into reports.

Sums over replicates go through :func:`math.fsum`, which is correctly
rounded, so the estimates do not depend on the order of the replicates.
"""

import dataclasses
import math
import typing

import daiquiri
import numpy
from scipy import stats

from crp_engine import exceptions
from crp_engine import urn


LOG = daiquiri.getLogger(__name__)

DEFAULT_LEVEL = 0.01


@dataclasses.dataclass
class ReplicateSummary:
    replicate: int
    scalars: typing.Dict[str, float]
    realization_id: typing.Optional[str] = None
    weight: float = 1.0
    trajectories: typing.List[urn.TrajectoryGrid] = dataclasses.field(
        default_factory=list
    )

    def __post_init__(self):
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise exceptions.InvalidParameters(
                f"replicate {self.replicate} has weight {self.weight}"
            )
        for name, value in self.scalars.items():
            if not math.isfinite(value):
                raise exceptions.InvalidParameters(
                    f"replicate {self.replicate} has non-finite {name}: {value}"
                )


@dataclasses.dataclass
class TestReport:
    __test__ = False

    name: str
    statistic: float
    passed: bool
    sample_size: int
    tolerance: float
    p_value: typing.Optional[float] = None
    details: typing.Dict[str, typing.Any] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        # Plain Python values, numpy scalars do not serialize to JSON
        self.passed = bool(self.passed)
        self.sample_size = int(self.sample_size)
        if self.statistic is not None:
            self.statistic = float(self.statistic)
        if self.tolerance is not None:
            self.tolerance = float(self.tolerance)
        if self.p_value is not None:
            self.p_value = float(self.p_value)
        if self.p_value is not None and not 0 <= self.p_value <= 1:
            raise exceptions.InvalidParameters(f"p-value {self.p_value} not in [0, 1]")

    def to_json(self) -> typing.Dict[str, typing.Any]:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "passed": self.passed,
            "sample_size": self.sample_size,
            "tolerance": self.tolerance,
            "details": self.details,
        }


@dataclasses.dataclass(frozen=True)
class MomentEstimate:
    mean: float
    variance: float
    mean_se: float
    variance_se: float
    size: int
    ess: float


def _unweighted(x: numpy.ndarray) -> MomentEstimate:
    n = x.size
    mean = math.fsum(x) / n
    if n == 1:
        return MomentEstimate(mean, 0.0, math.nan, math.nan, 1, 1.0)
    dev = x - mean
    variance = math.fsum(dev ** 2) / (n - 1)
    fourth = math.fsum(dev ** 4) / n
    return MomentEstimate(
        mean=mean,
        variance=variance,
        mean_se=math.sqrt(variance / n),
        variance_se=math.sqrt(max(fourth - variance ** 2, 0.0) / n),
        size=n,
        ess=float(n),
    )


def _weighted(x: numpy.ndarray, w: numpy.ndarray) -> MomentEstimate:
    n = x.size
    total = math.fsum(w)
    squares = math.fsum(w ** 2)
    mean = math.fsum(w * x) / total
    ess = total ** 2 / squares
    if n == 1:
        return MomentEstimate(mean, 0.0, math.nan, math.nan, 1, ess)
    dev = x - mean
    variance = math.fsum(w * dev ** 2) / (total - squares / total)
    # Delta method for the ratio of weighted sums
    mean_se = math.sqrt(n / (n - 1) * math.fsum((w * dev) ** 2) / total ** 2)
    fourth = math.fsum(w * dev ** 4) / total
    return MomentEstimate(
        mean=mean,
        variance=variance,
        mean_se=mean_se,
        variance_se=math.sqrt(max(fourth - variance ** 2, 0.0) / ess),
        size=n,
        ess=ess,
    )


def moment_estimates(samples, weights=None) -> MomentEstimate:
    """Mean, variance and their standard errors, self-normalised when weighted."""
    x = numpy.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise exceptions.InvalidParameters("samples must be a non-empty sequence")
    if not numpy.all(numpy.isfinite(x)):
        raise exceptions.InvalidParameters("samples must be finite")
    if weights is None:
        return _unweighted(x)

    w = numpy.asarray(weights, dtype=float)
    if w.shape != x.shape:
        raise exceptions.InvalidParameters("one weight per sample is required")
    if numpy.any(w <= 0) or not numpy.all(numpy.isfinite(w)):
        raise exceptions.InvalidParameters("weights must be positive")
    if numpy.all(w == w[0]):
        return _unweighted(x)
    return _weighted(x, w)


def moment_check(
    name: str,
    estimate: float,
    se: float,
    target: float,
    rel_tol: float = 0.1,
    n_se: float = 4.0,
    sample_size: int = 0,
) -> TestReport:
    """Pass when the estimate is within max(rel_tol |target|, n_se se) of target."""
    se_bound = 0.0 if math.isnan(se) else n_se * se
    tolerance = max(rel_tol * abs(target), se_bound)
    deviation = abs(estimate - target)
    return TestReport(
        name=name,
        statistic=float(estimate),
        passed=bool(deviation <= tolerance),
        sample_size=sample_size,
        tolerance=float(tolerance),
        details={
            "target": float(target),
            "se": float(se),
            "deviation": float(deviation),
        },
    )


def ks_test(
    samples,
    reference: typing.Union[typing.Callable, typing.Sequence[float]],
    name: str = "ks",
    level: float = DEFAULT_LEVEL,
) -> TestReport:
    """Kolmogorov-Smirnov test against a CDF or, two-sample, a reference sample.

    The p-value is the asymptotic Kolmogorov distribution at ``sqrt(n) D``,
    with ``n`` replaced by ``n1 n2 / (n1 + n2)`` for two samples.
    """
    x = numpy.asarray(samples, dtype=float)
    if x.size == 0:
        raise exceptions.InvalidParameters("ks_test needs at least one sample")

    if callable(reference):
        result = stats.kstest(x, reference, method="asymp")
        details = {"mode": "one-sample"}
    else:
        y = numpy.asarray(reference, dtype=float)
        if y.size == 0:
            raise exceptions.InvalidParameters("reference sample is empty")
        result = stats.ks_2samp(x, y, method="asymp")
        details = {"mode": "two-sample", "reference_size": int(y.size)}

    p_value = float(numpy.clip(result.pvalue, 0, 1))
    return TestReport(
        name=name,
        statistic=float(result.statistic),
        p_value=p_value,
        passed=bool(p_value >= level),
        sample_size=int(x.size),
        tolerance=level,
        details=details,
    )


@dataclasses.dataclass(frozen=True, eq=False)
class CovarianceEstimate:
    grid: numpy.ndarray
    cov: numpy.ndarray
    se: numpy.ndarray
    size: int

    def index(self, t: float) -> int:
        matches = numpy.flatnonzero(numpy.isclose(self.grid, t, rtol=0, atol=1e-12))
        if matches.size == 0:
            raise exceptions.GridError(f"{t} is not a grid point")
        return int(matches[0])

    def at(self, s: float, t: float) -> typing.Tuple[float, float]:
        i, j = self.index(s), self.index(t)
        return float(self.cov[i, j]), float(self.se[i, j])


def empirical_cov_grid(trajectories) -> CovarianceEstimate:
    """Unbiased covariance over grid pairs with a standard error per entry."""
    if isinstance(trajectories, numpy.ndarray):
        values = trajectories.astype(float)
        grid = numpy.arange(values.shape[1], dtype=float)
    else:
        trajectories = list(trajectories)
        if not trajectories:
            raise exceptions.InvalidParameters("no trajectories")
        grid = trajectories[0].grid
        if any(not numpy.array_equal(tr.grid, grid) for tr in trajectories):
            raise exceptions.GridError("trajectories must share one grid")
        values = numpy.stack([tr.values for tr in trajectories])

    size = values.shape[0]
    if size < 2:
        raise exceptions.InvalidParameters("at least two trajectories are needed")
    centred = values - values.mean(axis=0)
    cross = centred.T @ centred
    squares = (centred ** 2).T @ (centred ** 2)
    cov = cross / (size - 1)
    # Sample variance of the per-replicate products centred_i * centred_j
    product_variance = numpy.maximum(squares - cross ** 2 / size, 0) / (size - 1)
    se = numpy.sqrt(product_variance / size)
    return CovarianceEstimate(grid, cov, se, size)


def _pearson(a: numpy.ndarray, b: numpy.ndarray) -> float:
    if numpy.ptp(a) == 0 or numpy.ptp(b) == 0:
        raise exceptions.InvalidParameters("correlation of a constant sample")
    corr, _ = stats.pearsonr(a, b)
    return float(corr)


def independence_check(
    w_samples,
    y_samples,
    diversities,
    name: str = "independence",
    level: float = DEFAULT_LEVEL,
    slack: float = 1.0,
) -> TestReport:
    """Fisher z-test of zero correlation between W / sqrt(S) and Y / sqrt(S).

    The test passes when ``|z|`` stays under ``slack`` times the two-sided
    normal quantile at ``level``.
    """
    s = numpy.asarray(diversities, dtype=float)
    a = numpy.asarray(w_samples, dtype=float) / numpy.sqrt(s)
    b = numpy.asarray(y_samples, dtype=float) / numpy.sqrt(s)
    if not a.shape == b.shape == s.shape:
        raise exceptions.InvalidParameters("paired samples must have equal length")
    size = a.size
    if size < 4:
        raise exceptions.InvalidParameters("independence check needs 4 replicates")

    corr = _pearson(a, b)
    clipped = min(max(corr, -1 + 1e-15), 1 - 1e-15)
    z = math.atanh(clipped) * math.sqrt(size - 3)
    critical = float(stats.norm.isf(level / 2))
    return TestReport(
        name=name,
        statistic=z,
        p_value=float(min(1.0, 2 * stats.norm.sf(abs(z)))),
        passed=bool(abs(z) < slack * critical),
        sample_size=size,
        tolerance=level,
        details={"correlation": corr, "critical": critical, "slack": slack},
    )
