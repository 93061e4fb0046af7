"""Battery-occupancy analysis under backlogged data queues.

With both data queues backlogged the battery level is a birth-death chain:
one unit arrives per successful harvest, one leaves per node-2 transmission
attempt.  Closed forms cover the infinite half-duplex, finite half-duplex and
infinite full-duplex cases; a brute-force steady-state solver cross-checks
all of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import HarvestProbs

# Relative tolerance for detecting the equal-rate knife edge q2 = q2*, where
# the finite-capacity closed form is 0/0.
_KNIFE_EDGE_RTOL = 1e-12


@dataclass(frozen=True)
class BatteryChain:
    """Birth-death transition rates of the battery level.

    up_rate applies from an empty battery (the node cannot spend a unit in
    the slot it arrives), up_rate_busy from any non-empty level, down_rate is
    the per-slot probability of a net one-unit drop from a non-empty level.
    """

    up_rate: float
    up_rate_busy: float
    down_rate: float
    capacity: int | None = None

    def __post_init__(self) -> None:
        for name in ("up_rate", "up_rate_busy", "down_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.capacity is not None and self.capacity < 1:
            raise ValueError(f"capacity must be >= 1 or None, got {self.capacity}")

    @classmethod
    def half_duplex(cls, q1: float, q2: float, p_h1: float,
                    capacity: int | None = None) -> "BatteryChain":
        return cls(
            up_rate=q1 * p_h1,
            up_rate_busy=q1 * p_h1 * (1.0 - q2),
            down_rate=q2,
            capacity=capacity,
        )

    @classmethod
    def full_duplex(cls, q1: float, q2: float, probs: HarvestProbs,
                    capacity: int | None = None) -> "BatteryChain":
        # From a non-empty level the battery drops iff node 2 attempts and no
        # unit is harvested in the same slot; it rises iff node 2 stays silent
        # and the interferer transmission is harvested.
        down = q2 * (1.0 - q1 * probs.p_h12 - (1.0 - q1) * probs.p_h2)
        return cls(
            up_rate=q1 * probs.p_h1,
            up_rate_busy=q1 * (1.0 - q2) * probs.p_h1,
            down_rate=down,
            capacity=capacity,
        )


def occupancy_half_duplex_infinite(q1: float, q2: float, p_h1: float) -> float:
    """P[battery non-empty] for an unlimited half-duplex battery."""
    if q1 * p_h1 == 0.0:
        return 0.0
    if q2 == 0.0:
        return 1.0  # inflow with no drain
    return min(q1 * p_h1 / (q2 * (1.0 + q1 * p_h1)), 1.0)


def q2_knife_edge(q1: float, p_h1: float) -> float:
    """The q2 at which inflow and drain balance exactly: q1*p_h1 / (1 + q1*p_h1)."""
    return q1 * p_h1 / (1.0 + q1 * p_h1)


def occupancy_half_duplex_finite(q1: float, q2: float, p_h1: float, capacity: int) -> float:
    """P[battery non-empty] for a half-duplex battery holding up to `capacity` units."""
    if capacity < 1:
        raise ValueError(f"capacity must be >= 1, got {capacity}")
    if q1 * p_h1 == 0.0:
        return 0.0
    if q2 == 0.0:
        return 1.0
    edge = q2_knife_edge(q1, p_h1)
    if math.isclose(q2, edge, rel_tol=_KNIFE_EDGE_RTOL, abs_tol=0.0):
        return 1.0
    rho = q1 * p_h1 / (q2 * (1.0 + q1 * p_h1))
    x = q1 * p_h1 * (1.0 - q2) / q2
    xm = x**capacity
    return rho * (1.0 - xm) / (1.0 - rho * xm)


def occupancy_full_duplex_infinite(q1: float, q2: float, probs: HarvestProbs) -> float:
    """P[battery non-empty] for an unlimited full-duplex battery."""
    if q1 * probs.p_h1 == 0.0:
        return 0.0
    denom = q2 * (1.0 - q1 * (probs.p_h12 - probs.p_h1) - (1.0 - q1) * probs.p_h2)
    if denom <= 0.0:
        return 1.0  # harvest dominates drain
    return min(q1 * probs.p_h1 / denom, 1.0)


def steady_state_oracle(
    chain: BatteryChain, truncation: int = 10_000
) -> tuple[float, np.ndarray | None]:
    """Numerically solve the battery chain by balance recurrence + normalization.

    Returns (occupancy, pi).  For an unlimited chain the state space is cut at
    `truncation` levels and the geometric tail is required to hold less than
    1e-10 of the mass; a non-summable chain (busy up-rate >= down-rate)
    reports occupancy 1 with no distribution.
    """
    if chain.capacity is None and truncation < 10:
        raise ValueError("truncation must be >= 10 for an unlimited chain")
    if chain.up_rate == 0.0:
        return 0.0, np.array([1.0])
    if chain.down_rate == 0.0:
        return 1.0, None
    ratio = chain.up_rate_busy / chain.down_rate
    if chain.capacity is None and ratio >= 1.0:
        return 1.0, None

    n = chain.capacity if chain.capacity is not None else truncation
    pi = np.empty(n + 1)
    pi[0] = 1.0
    pi[1] = chain.up_rate / chain.down_rate
    for k in range(2, n + 1):
        pi[k] = pi[k - 1] * ratio

    if chain.capacity is None:
        tail = pi[n] * ratio / (1.0 - ratio)
        if tail > 1e-10 * (pi.sum() + tail):
            raise ValueError(
                f"tail mass {tail:.3e} too large at truncation {truncation}; increase it"
            )
    pi /= pi.sum()
    return 1.0 - pi[0], pi
