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
"""Frequency laws of the (alpha, theta) partition.

Ordered Poisson-Dirichlet frequencies at theta = 0 come from the arrival
times of a unit-rate Poisson process::

    P_j = G_j ** (-1/alpha) / sum_k G_k ** (-1/alpha)

The sum is truncated after ``J`` arrivals and completed with the integral
``alpha / (1 - alpha) * G_J ** (1 - 1/alpha)``. The normalising total also
gives ``D = total ** -alpha`` and the diversity ``S = Gamma(1 - alpha) * D``.
Other thetas are reached either by sorting GEM stick-breaking draws or by
reweighting theta = 0 draws with :func:`importance_weight`.
"""

import dataclasses
import functools
import json
import math
import typing

import daiquiri
import numpy
from scipy import special
import voluptuous

from crp_engine import config
from crp_engine import exceptions
from crp_engine import partitions
from crp_engine import utils


LOG = daiquiri.getLogger(__name__)

ROUTES = ("gem", "reweight")

# Slack on the total mass of user supplied frequencies
_MASS_SLACK = 1e-9


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise exceptions.InvalidParameters(f"alpha must lie in (0, 1), got {alpha}")


def _check_truncation(J: int) -> None:
    if J < 1:
        raise exceptions.InvalidParameters(f"truncation level must be >= 1, got {J}")
    if J > config.MAX_TRUNCATION:
        raise exceptions.TruncationError(
            f"truncation level {J} exceeds the cap of {config.MAX_TRUNCATION}"
        )


def _tail_integral(alpha: float, last_arrival: float) -> float:
    return alpha / (1 - alpha) * last_arrival ** (1 - 1 / alpha)


@dataclasses.dataclass(frozen=True, eq=False)
class FrequencyRealization:
    alpha: float
    theta: float
    freqs: numpy.ndarray
    diversity: float
    arrivals: typing.Optional[numpy.ndarray] = None
    tail_completion: bool = True

    def __post_init__(self):
        _check_alpha(self.alpha)
        freqs = numpy.asarray(self.freqs, dtype=float)
        object.__setattr__(self, "freqs", freqs)
        if freqs.ndim != 1 or freqs.size == 0:
            raise exceptions.InvalidParameters("freqs must be a non-empty sequence")
        if not numpy.all(numpy.isfinite(freqs)):
            raise exceptions.InvalidParameters("freqs must be finite")
        if numpy.any(freqs <= 0):
            raise exceptions.ZeroFrequency("frequencies must be positive")
        if numpy.any(freqs > 1) or numpy.any(numpy.diff(freqs) > 0):
            raise exceptions.InvalidParameters(
                "freqs must be nonincreasing values in (0, 1]"
            )
        if math.fsum(freqs) > 1 + _MASS_SLACK:
            raise exceptions.InvalidParameters("freqs must sum to at most 1")
        object.__setattr__(self, "diversity", float(self.diversity))
        if not (self.diversity > 0 and math.isfinite(self.diversity)):
            raise exceptions.InvalidParameters(
                f"diversity must be positive, got {self.diversity}"
            )
        if self.arrivals is not None:
            arrivals = numpy.asarray(self.arrivals, dtype=float)
            object.__setattr__(self, "arrivals", arrivals)
            if arrivals.shape != freqs.shape:
                raise exceptions.InvalidParameters(
                    "arrivals and freqs must have the same length"
                )

    @classmethod
    def from_arrivals(
        cls,
        alpha: float,
        arrivals: typing.Sequence[float],
        tail_completion: bool = True,
        theta: float = 0.0,
    ) -> "FrequencyRealization":
        """Build ranked frequencies from increasing Poisson arrival times.

        ``tail_completion=False`` keeps the plain truncated sum, for which
        the frequencies sum exactly to one.
        """
        _check_alpha(alpha)
        arrivals = numpy.asarray(arrivals, dtype=float)
        if arrivals.ndim != 1 or arrivals.size == 0:
            raise exceptions.InvalidParameters("arrivals must be a non-empty sequence")
        if arrivals[0] <= 0 or numpy.any(numpy.diff(arrivals) <= 0):
            raise exceptions.InvalidParameters(
                "arrivals must be positive and strictly increasing"
            )
        powers = arrivals ** (-1 / alpha)
        total = math.fsum(powers)
        if tail_completion:
            total += _tail_integral(alpha, arrivals[-1])
        d_const = total ** -alpha
        return cls(
            alpha=alpha,
            theta=theta,
            freqs=powers / total,
            diversity=float(math.gamma(1 - alpha) * d_const),
            arrivals=arrivals,
            tail_completion=tail_completion,
        )

    @classmethod
    def from_frequencies(
        cls,
        alpha: float,
        freqs: typing.Sequence[float],
        d_const: float = 1.0,
        theta: float = 0.0,
    ) -> "FrequencyRealization":
        return cls(
            alpha=alpha,
            theta=theta,
            freqs=numpy.asarray(freqs, dtype=float),
            diversity=math.gamma(1 - alpha) * d_const,
        )

    @property
    def d_const(self) -> float:
        return self.diversity / math.gamma(1 - self.alpha)

    @property
    def truncation_level(self) -> int:
        return len(self.freqs)

    @functools.cached_property
    def tail_mass(self) -> float:
        return max(0.0, 1.0 - math.fsum(self.freqs))

    @functools.cached_property
    def cell_probabilities(self) -> numpy.ndarray:
        """Cell masses, the tail mass appended as one reservoir cell."""
        if self.tail_mass > 0:
            return numpy.append(self.freqs, self.tail_mass)
        return self.freqs

    @functools.cached_property
    def cumulative_table(self) -> numpy.ndarray:
        table = numpy.cumsum(self.cell_probabilities)
        table[-1] = 1.0
        return table

    @functools.cached_property
    def fingerprint(self) -> str:
        return utils.array_fingerprint(
            self.alpha, self.theta, self.freqs, self.diversity
        )

    def to_json(self) -> typing.Dict[str, typing.Any]:
        return {
            "alpha": self.alpha,
            "theta": self.theta,
            "arrivals": None if self.arrivals is None else self.arrivals.tolist(),
            "freqs": self.freqs.tolist(),
            "diversity": self.diversity,
            "d_const": self.d_const,
            "truncation_level": self.truncation_level,
            "tail_mass": self.tail_mass,
            "tail_completion": self.tail_completion,
            "fingerprint": self.fingerprint,
        }

    @classmethod
    def from_json(cls, data: typing.Dict[str, typing.Any]) -> "FrequencyRealization":
        try:
            data = RealizationSchema(data)
        except voluptuous.Invalid as e:
            raise exceptions.InvalidParameters(f"invalid realization document: {e}")
        realization = cls(
            alpha=data["alpha"],
            theta=data["theta"],
            freqs=numpy.asarray(data["freqs"], dtype=float),
            diversity=data["diversity"],
            arrivals=(
                None
                if data["arrivals"] is None
                else numpy.asarray(data["arrivals"], dtype=float)
            ),
            tail_completion=data["tail_completion"],
        )
        if realization.truncation_level != data["truncation_level"]:
            raise exceptions.InvalidParameters("truncation_level does not match freqs")
        if data.get("fingerprint") not in (None, realization.fingerprint):
            raise exceptions.InvalidParameters("realization fingerprint mismatch")
        return realization

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def loads(cls, document: str) -> "FrequencyRealization":
        return cls.from_json(json.loads(document))


_Real = voluptuous.All(
    voluptuous.Any(int, float), voluptuous.Coerce(float), msg="expected a number"
)

RealizationSchema = voluptuous.Schema(
    {
        voluptuous.Required("alpha"): _Real,
        voluptuous.Required("theta"): _Real,
        voluptuous.Required("arrivals"): voluptuous.Any(None, [_Real]),
        voluptuous.Required("freqs"): voluptuous.All([_Real], voluptuous.Length(min=1)),
        voluptuous.Required("diversity"): _Real,
        voluptuous.Required("d_const"): _Real,
        voluptuous.Required("truncation_level"): int,
        voluptuous.Required("tail_mass"): _Real,
        voluptuous.Required("tail_completion"): bool,
        voluptuous.Optional("fingerprint"): str,
    }
)


@dataclasses.dataclass(frozen=True, eq=False)
class GemRealization:
    alpha: float
    theta: float
    sticks: numpy.ndarray
    freqs: numpy.ndarray

    @property
    def truncation_level(self) -> int:
        return len(self.sticks)

    @functools.cached_property
    def residual(self) -> float:
        """Mass left after the last stick, the product of (1 - V_j)."""
        return float(numpy.exp(numpy.sum(numpy.log1p(-self.sticks))))

    @functools.cached_property
    def diversity(self) -> float:
        """Diversity estimate read off the residual stick.

        ``J ** ((1 - alpha) / alpha) * residual`` converges to
        ``S ** (1/alpha) / alpha``; the power of ``J`` is replaced by the
        gamma ratio for which ``c_J * residual / alpha`` has mean
        ``E[S ** (1/alpha)]`` at every ``J``.
        """
        a, t, J = self.alpha, self.theta, self.truncation_level
        b = (1 - a) / a
        log_c = special.gammaln(J + 1 + t / a + b) - special.gammaln(J + 1 + t / a)
        return float(numpy.exp(a * (log_c + math.log(self.residual) - math.log(a))))

    def to_ordered(self) -> FrequencyRealization:
        ordered = numpy.sort(self.freqs)[::-1]
        ordered = ordered[ordered > 0]
        return FrequencyRealization(
            alpha=self.alpha,
            theta=self.theta,
            freqs=ordered,
            diversity=self.diversity,
            tail_completion=False,
        )


def default_truncation(
    alpha: float,
    tolerance: typing.Optional[float] = None,
    cap: typing.Optional[int] = None,
) -> int:
    """Smallest J whose completed tail bound falls below ``tolerance``."""
    _check_alpha(alpha)
    if tolerance is None:
        tolerance = config.TAIL_MASS_TOLERANCE
    if cap is None:
        cap = config.MAX_TRUNCATION
    if tolerance <= 0:
        raise exceptions.InvalidParameters("tolerance must be positive")

    # alpha / (1 - alpha) * J ** (1 - 1/alpha) < tolerance
    log_j = math.log(tolerance * (1 - alpha) / alpha) / (1 - 1 / alpha)
    if log_j > math.log(cap):
        raise exceptions.TruncationError(
            f"tail mass {tolerance} needs more than {cap} arrivals at alpha={alpha}"
        )
    return max(1, math.ceil(math.exp(log_j)))


def sample_pd_theta0(
    alpha: float,
    J: typing.Optional[int] = None,
    seed: int = 0,
    tail_completion: bool = True,
    tolerance: typing.Optional[float] = None,
) -> FrequencyRealization:
    """Sample ranked PD(alpha, 0) frequencies from J Poisson arrivals.

    The generator draws J standard exponentials, nothing else. When
    ``tolerance`` is given the realization must carry less tail mass.
    """
    _check_alpha(alpha)
    if J is None:
        J = default_truncation(alpha, tolerance)
    _check_truncation(J)
    rng = utils.make_rng(seed)
    arrivals = numpy.cumsum(rng.standard_exponential(J))
    realization = FrequencyRealization.from_arrivals(
        alpha, arrivals, tail_completion=tail_completion
    )
    if tolerance is not None and realization.tail_mass > tolerance:
        raise exceptions.TruncationError(
            f"tail mass {realization.tail_mass} over tolerance {tolerance} with J={J}"
        )
    LOG.debug(
        "pd sampled",
        alpha=alpha,
        J=J,
        diversity=realization.diversity,
        tail_mass=realization.tail_mass,
    )
    return realization


def sample_gem(alpha: float, theta: float, J: int, seed: int) -> GemRealization:
    """Stick-breaking with V_j ~ Beta(1 - alpha, theta + j * alpha).

    Each Beta is X / (X + Y) with X ~ Gamma(1 - alpha) and
    Y ~ Gamma(theta + j * alpha): the J values of X are drawn first, then
    the J values of Y.
    """
    partitions.CrpParams(alpha, theta)
    _check_truncation(J)
    rng = utils.make_rng(seed)
    j = numpy.arange(1, J + 1)
    x = rng.standard_gamma(1 - alpha, size=J)
    y = rng.standard_gamma(theta + j * alpha)
    sticks = x / (x + y)
    remaining = numpy.concatenate(([1.0], numpy.cumprod(1 - sticks)[:-1]))
    return GemRealization(alpha, theta, sticks, sticks * remaining)


def sample_pd(
    alpha: float, theta: float, J: int, seed: int, route: str = "gem"
) -> typing.Tuple[FrequencyRealization, float]:
    """Ranked PD(alpha, theta) frequencies with their importance weight.

    ``gem`` sorts stick-breaking draws and weighs 1; ``reweight`` returns a
    theta = 0 realization with the weight turning it into a theta draw.
    """
    partitions.CrpParams(alpha, theta)
    if route == "gem":
        return sample_gem(alpha, theta, J, seed).to_ordered(), 1.0
    elif route == "reweight":
        realization = sample_pd_theta0(alpha, J, seed)
        return realization, importance_weight(realization.diversity, alpha, theta)
    raise exceptions.InvalidParameters(f"unknown route {route!r}")


def gamma_from_freqs(real: FrequencyRealization) -> numpy.ndarray:
    if numpy.any(real.freqs <= 0):
        raise exceptions.ZeroFrequency("frequencies must be positive")
    return real.d_const * real.freqs ** -real.alpha


def _arrival_times(real: FrequencyRealization) -> numpy.ndarray:
    if real.arrivals is not None:
        return real.arrivals
    return gamma_from_freqs(real)


def truncated_d(real: FrequencyRealization, epsilon_n: float, n: int) -> float:
    """D restricted to the arrivals below ``epsilon_n * n ** alpha``."""
    if epsilon_n <= 0:
        raise exceptions.InvalidParameters("epsilon_n must be positive")
    window = epsilon_n * n ** real.alpha
    gammas = _arrival_times(real)
    inside = gammas[gammas <= window]
    if inside.size == 0:
        raise exceptions.EmptyWindow(window)
    return math.fsum(inside ** (-1 / real.alpha)) ** -real.alpha


def epsilon_schedule(n: int, c: float = 1.0) -> float:
    if n < 16:
        raise exceptions.InvalidParameters(f"epsilon schedule needs n >= 16, got {n}")
    if c <= 0:
        raise exceptions.InvalidParameters("schedule constant must be positive")
    return c / math.log(math.log(n))


def importance_weight(s_alpha: float, alpha: float, theta: float) -> float:
    """Density of PD(alpha, theta) against PD(alpha, 0) at diversity ``s_alpha``."""
    partitions.CrpParams(alpha, theta)
    if not s_alpha > 0:
        raise exceptions.InvalidParameters(f"s_alpha must be positive, got {s_alpha}")
    if theta == 0:
        return 1.0
    return math.exp(
        special.gammaln(theta + 1)
        - special.gammaln(theta / alpha + 1)
        + theta / alpha * math.log(s_alpha)
    )


def truncated_importance_weight(
    real: FrequencyRealization, epsilon_n: float, n: int, theta: float
) -> float:
    d_n = truncated_d(real, epsilon_n, n)
    return importance_weight(math.gamma(1 - real.alpha) * d_n, real.alpha, theta)


def diversity_moment(p: float, alpha: float, theta: float = 0.0) -> float:
    """E[S ** p] under PD(alpha, theta)."""
    partitions.CrpParams(alpha, theta)
    if theta + p * alpha + 1 <= 0 or theta / alpha + p + 1 <= 0:
        raise exceptions.InvalidParameters(f"moment of order {p} is infinite")
    return math.exp(
        special.gammaln(theta + 1)
        - special.gammaln(theta / alpha + 1)
        + special.gammaln(theta / alpha + p + 1)
        - special.gammaln(theta + p * alpha + 1)
    )


def counting_function(real: FrequencyRealization, t):
    """N(t), the number of arrivals up to time t."""
    counts = numpy.searchsorted(_arrival_times(real), t, side="right")
    if numpy.ndim(counts) == 0:
        return int(counts)
    return counts


def nu(real: FrequencyRealization, t):
    """Number of frequencies at least 1/t."""
    t = numpy.asarray(t, dtype=float)
    if numpy.any(t <= 0):
        raise exceptions.InvalidParameters("nu is defined for t > 0")
    counts = numpy.searchsorted(-real.freqs, -1 / t, side="right")
    if numpy.ndim(counts) == 0:
        return int(counts)
    return counts
