"""Energy-arrival process of the harvesting node.

The exact process accumulates Rayleigh-faded received power in an accumulator
and emits one battery unit whenever the running sum reaches the quantum; the
number of contributing slots Z then follows a shifted Poisson law with mean
1 + theta.  The equivalent memoryless description replaces Z by a geometric
inter-arrival with the same mean, i.e. a per-slot Bernoulli(1 / (1 + theta)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .params import PhysicalParams

TYPE_I = "type1"            # interferer (node 1) signal path
TYPE_II_SELF = "type2self"  # node-2 loopback self-interference path

_SOURCES = frozenset((TYPE_I, TYPE_II_SELF))


def z_pmf(theta: float, k: int) -> float:
    """P[Z = k]: probability that k slots are needed to harvest one unit.

    Shifted Poisson: exp(-theta) * theta**(k-1) / (k-1)!, evaluated in
    log-space so large k cannot overflow the factorial.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if theta < 0.0:
        raise ValueError(f"theta must be >= 0, got {theta}")
    if theta == 0.0:
        return 1.0 if k == 1 else 0.0
    return math.exp((k - 1) * math.log(theta) - theta - math.lgamma(k))


def z_pmf_truncation(theta: float) -> int:
    """Index K beyond which the remaining Z mass is below 1e-10."""
    return math.ceil(theta + 12.0 * math.sqrt(theta) + 30.0)


def erlang_cdf(m: int, theta: float) -> float:
    """P[sum of m unit-rate exponentials < theta], by stable partial sums.

    The complement is the Poisson tail: 1 - sum_{j<m} exp(-theta) theta^j / j!.
    An empty sum (m = 0) is below any theta > 0 with probability one.
    """
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if theta <= 0.0:
        return 0.0
    if m == 0:
        return 1.0
    term = math.exp(-theta)
    total = term
    for j in range(1, m):
        term *= theta / j
        total += term
    return 1.0 - total


def z_pmf_via_erlang(theta: float, k: int) -> float:
    """P[Z = k] computed as a difference of two accumulated-fading CDF values.

    Independent route to :func:`z_pmf`: the sum of slot gains up to k-1 slots
    is still short of theta while the sum over k slots is not.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if theta == 0.0:
        return 1.0 if k == 1 else 0.0
    return erlang_cdf(k - 1, theta) - erlang_cdf(k, theta)


@dataclass(frozen=True)
class ZDistribution:
    """Slots-to-harvest law for a given normalized quantum theta; mean 1 + theta."""

    theta: float

    def __post_init__(self) -> None:
        if self.theta < 0.0:
            raise ValueError(f"theta must be >= 0, got {self.theta}")

    def pmf(self, k: int) -> float:
        return z_pmf(self.theta, k)

    def pmf_via_erlang(self, k: int) -> float:
        return z_pmf_via_erlang(self.theta, k)

    @property
    def mean(self) -> float:
        return 1.0 + self.theta

    @property
    def truncation(self) -> int:
        return z_pmf_truncation(self.theta)

    def masses(self, kmax: int | None = None) -> np.ndarray:
        """pmf values for k = 1..kmax (default: the 1e-10-residual truncation)."""
        kmax = self.truncation if kmax is None else kmax
        return np.array([z_pmf(self.theta, k) for k in range(1, kmax + 1)])


@dataclass(frozen=True)
class EnergyAccumulator:
    """Running sub-quantum energy total; always < gamma at the start of a slot."""

    accumulated: float = 0.0


def accumulate_slot(
    acc: EnergyAccumulator, power: float, gamma: float
) -> tuple[EnergyAccumulator, int]:
    """Add one slot of received power; emit a unit arrival on crossing gamma.

    The residual above gamma is discarded (the accumulator resets to zero), so
    consecutive inter-arrival times are independent fresh sums.
    """
    total = acc.accumulated + power
    if total >= gamma:
        return EnergyAccumulator(0.0), 1
    return EnergyAccumulator(total), 0


def sample_received_power(rng, phys: PhysicalParams, sources: Iterable[str]) -> float:
    """Draw one slot of received harvestable power for the given transmit set.

    Each active source contributes an independent Exp(1) fading draw scaled by
    its link budget; an empty set contributes nothing and draws nothing.
    """
    power = 0.0
    for source in sources:
        if source == TYPE_I:
            power += phys.eta * phys.p1 * phys.pathloss_gain * rng.exponential()
        elif source == TYPE_II_SELF:
            power += phys.eta * phys.p2 * phys.loopback_c * rng.exponential()
        else:
            raise ValueError(f"unknown power source {source!r}")
    return power


def sample_interarrivals(rng, phys: PhysicalParams, n_arrivals: int) -> np.ndarray:
    """Simulate slot counts between unit arrivals under a persistent interferer.

    Drives :func:`accumulate_slot` with :func:`sample_received_power` slot by
    slot (node 1 always transmitting, node 2 silent) and records how many
    slots each unit arrival took.
    """
    if n_arrivals < 1:
        raise ValueError("n_arrivals must be >= 1")
    out = np.empty(n_arrivals, dtype=np.int64)
    sources = (TYPE_I,)
    acc = EnergyAccumulator()
    for i in range(n_arrivals):
        slots = 0
        while True:
            slots += 1
            acc, arrived = accumulate_slot(
                acc, sample_received_power(rng, phys, sources), phys.gamma
            )
            if arrived:
                break
        out[i] = slots
    return out


def estimate_p_h12(rng, phys: PhysicalParams, n_samples: int = 100_000) -> tuple[float, float]:
    """Monte-Carlo estimate of the harvest probability when both nodes transmit.

    Simulates the slots-to-harvest count with both the interferer signal and
    the self-interference accumulating every slot, and returns the equivalent
    Bernoulli rate (reciprocal mean count) with its standard error.
    """
    if n_samples < 10_000:
        raise ValueError(f"n_samples must be >= 10_000, got {n_samples}")
    gain1 = phys.eta * phys.p1 * phys.pathloss_gain
    gain2 = phys.eta * phys.p2 * phys.loopback_c
    if gain1 + gain2 <= 0.0:
        raise ValueError("no harvest path: both link budgets are zero")

    acc = np.zeros(n_samples)
    counts = np.zeros(n_samples, dtype=np.int64)
    pending = np.arange(n_samples)
    while pending.size:
        power = gain1 * rng.exponential(size=pending.size)
        if gain2 > 0.0:
            power += gain2 * rng.exponential(size=pending.size)
        acc[pending] += power
        counts[pending] += 1
        pending = pending[acc[pending] < phys.gamma]

    mean = counts.mean()
    se_mean = counts.std(ddof=1) / math.sqrt(n_samples)
    estimate = 1.0 / mean
    return estimate, se_mean / mean**2
