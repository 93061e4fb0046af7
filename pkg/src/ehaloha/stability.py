"""Closed-form stable-throughput regions and their boundary geometry.

Every region is a :class:`RegionSpec`: a vectorized membership predicate on
arrival-rate pairs in [0, 1]^2 plus a polyline tracing the upper boundary.
The deprived-system triangle doubles as the inner bound of the equivalent
system; the closure is its union over all transmission-probability pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .battery import (
    occupancy_full_duplex_infinite,
    occupancy_half_duplex_finite,
    q2_knife_edge,
)
from .params import HarvestProbs

# Stored boundary points are pulled this far below the exact curve so the
# polyline itself always passes the membership predicate in floating point.
_BOUNDARY_NUDGE = 1e-9


@dataclass(frozen=True)
class SaturatedRates:
    """Service rates with both data queues backlogged, plus derived landmarks."""

    mu1_s: float          # saturated service rate of node 1
    mu2_s: float          # saturated service rate of node 2
    lambda1_tilde: float  # node-1 arrival rate at which both queues saturate
    q2_star: float        # minimal q2 that maximizes node-2 service
    q2_eff: float         # renewal-reward effective node-2 transmission rate


def saturated_rates(q1: float, q2: float, p_h1: float) -> SaturatedRates:
    """Closed-form saturated service rates for given transmit/harvest parameters.

    Node 2's attempt rate saturates at q2* = q1*p_h1 / (1 + q1*p_h1): one
    transmission slot per harvested unit, each unit taking 1/(q1*p_h1) slots
    to collect, caps the sustainable duty cycle at that renewal-reward value.
    """
    q2_star = q2_knife_edge(q1, p_h1)
    m = min(q2_star, q2)
    mu1_s = q1 * (1.0 - m)
    mu2_s = (1.0 - q1) * m
    return SaturatedRates(
        mu1_s=mu1_s,
        mu2_s=mu2_s,
        lambda1_tilde=mu1_s,
        q2_star=q2_star,
        q2_eff=q2_star,
    )


@dataclass(frozen=True)
class RegionSpec:
    """A stability region: membership predicate plus traced upper boundary."""

    kind: str
    membership: Callable[[np.ndarray, np.ndarray], np.ndarray]
    boundary: np.ndarray  # (n, 2) polyline of (lambda1, lambda2) vertices

    def contains(self, lambda1, lambda2):
        """Vectorized membership test; scalars in, numpy bool out."""
        return self.membership(np.asarray(lambda1, float), np.asarray(lambda2, float))


def _aloha_condition(q1: float):
    """Node-1 stability condition lambda1 <= q1 * (1 - lambda2 / (1 - q1)).

    At q1 = 1 the divisor vanishes; by the continuity limit the region
    collapses to the lambda2 = 0 segment.
    """
    if q1 >= 1.0:
        def cond(l1, l2):
            return (l2 <= 0.0) & (l1 <= q1)
    else:
        def cond(l1, l2):
            return l1 <= q1 * (1.0 - l2 / (1.0 - q1))
    return cond


def _slope_condition(slope: float):
    """Node-2 bound lambda2 <= slope * lambda1, with slope = inf meaning no bound."""
    if math.isinf(slope):
        def cond(l1, l2):
            return (l1 > 0.0) | (l2 <= 0.0)
    else:
        def cond(l1, l2):
            return l2 <= slope * l1
    return cond


def _point_region(kind: str):
    def member(l1, l2):
        return (l1 <= 0.0) & (l2 <= 0.0)

    return RegionSpec(kind=kind, membership=member, boundary=np.zeros((1, 2)))


def _triangle_region(kind: str, q1: float, slope: float) -> RegionSpec:
    """Region bounded by the node-1 condition and lambda2 <= slope * lambda1."""
    if q1 == 0.0:
        return _point_region(kind)
    aloha = _aloha_condition(q1)
    ray = _slope_condition(slope)

    def member(l1, l2):
        return aloha(l1, l2) & ray(l1, l2)

    if q1 >= 1.0:
        boundary = np.array([[0.0, 0.0], [q1, 0.0]])
    elif math.isinf(slope):
        boundary = np.array([[0.0, (1.0 - q1) * (1.0 - _BOUNDARY_NUDGE)], [q1, 0.0]])
    else:
        # apex: intersection of the ray with the node-1 condition
        apex_x = q1 * (1.0 - q1) / ((1.0 - q1) + q1 * slope)
        apex_y = slope * apex_x * (1.0 - _BOUNDARY_NUDGE)
        boundary = np.array([[0.0, 0.0], [apex_x, apex_y], [q1, 0.0]])
    return RegionSpec(kind=kind, membership=member, boundary=boundary)


def _min_term_slope(q1: float, q2: float, p_h1: float) -> float:
    rates = saturated_rates(q1, q2, p_h1)
    m = min(rates.q2_star, q2)
    if q1 == 0.0:
        return 0.0
    return (1.0 - q1) * m / (q1 * (1.0 - m))


def _occupancy_slope(q1: float, q2: float, occupancy: float) -> float:
    if q1 == 0.0:
        return 0.0
    denom = 1.0 - q2 * occupancy
    if denom <= 0.0:
        return math.inf
    return q2 * (1.0 - q1) * occupancy / (q1 * denom)


def region_r_d(q1: float, q2: float, p_h1: float, kind: str = "rd") -> RegionSpec:
    """Stability region of the deprived system; also the equivalent-system inner bound."""
    return _triangle_region(kind, q1, _min_term_slope(q1, q2, p_h1))


def region_dominant_first(q1: float, q2: float, p_h1: float) -> RegionSpec:
    """Region of the first dominant system: node 2 backlogged with dummy packets."""
    kind = "dominant1"
    if q1 == 0.0:
        return _point_region(kind)
    rates = saturated_rates(q1, q2, p_h1)
    slope = _min_term_slope(q1, q2, p_h1)
    ray = _slope_condition(slope)
    lam1_max = rates.lambda1_tilde

    def member(l1, l2):
        return (l1 <= lam1_max) & ray(l1, l2)

    boundary = np.array([[0.0, 0.0], [lam1_max, slope * lam1_max * (1.0 - _BOUNDARY_NUDGE)]])
    return RegionSpec(kind=kind, membership=member, boundary=boundary)


def region_dominant_second_interference(q1: float, q2: float, p_h1: float) -> RegionSpec:
    """Interference-limited part of the second dominant system (node 1 backlogged)."""
    kind = "dominant2"
    rates = saturated_rates(q1, q2, p_h1)
    lam1_min = rates.lambda1_tilde
    assert lam1_min <= q1, "left bound beyond the node-1 corner"
    if q1 == 0.0:
        return _point_region(kind)
    aloha = _aloha_condition(q1)
    cap = rates.mu2_s

    def member(l1, l2):
        return (l1 >= lam1_min) & aloha(l1, l2) & (l2 <= cap)

    boundary = np.array([[lam1_min, cap * (1.0 - _BOUNDARY_NUDGE)], [q1, 0.0]])
    return RegionSpec(kind=kind, membership=member, boundary=boundary)


def closure_switch_point(p_h1: float) -> float:
    """lambda1 where the closure boundary hands off from the apex trace to the sqrt arc."""
    if not 0.0 < p_h1 <= 1.0:
        raise ValueError(f"p_h1 must be in (0, 1], got {p_h1}")
    return (1.0 + 2.0 * p_h1 - math.sqrt(1.0 + 4.0 * p_h1)) / (2.0 * p_h1**2)


def _apex_trace(p_h1: float, l1):
    """Trace of the region apex over all q1: lambda2 = p*x*(1 - x/(1 - p*x))."""
    return p_h1 * l1 * (1.0 - l1 / (1.0 - p_h1 * l1))


def region_closure(p_h1: float, n_boundary: int = 257) -> RegionSpec:
    """Union of the inner-bound triangles over all transmission-probability pairs.

    Membership evaluates the implicit bound directly at the query point: with
    s = sqrt((1 + l1 - l2)^2 - 4*l1), the point is inside iff the discriminant
    is nonnegative and l2 <= (p*l1/2) * (1 - l1 + l2 + s).  A negative
    discriminant only occurs above the sqrt(l1) + sqrt(l2) = 1 arc, which is
    outside.
    """
    if not 0.0 < p_h1 <= 1.0:
        raise ValueError(f"p_h1 must be in (0, 1], got {p_h1}")

    def member(l1, l2):
        disc = (1.0 + l1 - l2) ** 2 - 4.0 * l1
        ok = disc >= 0.0
        rhs = 0.5 * p_h1 * l1 * (1.0 - l1 + l2 + np.sqrt(np.where(ok, disc, 0.0)))
        return ok & (l2 <= rhs)

    switch = closure_switch_point(p_h1)
    n_left = max(n_boundary // 2, 2)
    n_right = max(n_boundary - n_left, 2)
    left_x = np.linspace(0.0, switch, n_left)
    right_x = np.linspace(switch, 1.0, n_right + 1)[1:]
    left_y = _apex_trace(p_h1, left_x)
    right_y = (1.0 - np.sqrt(right_x)) ** 2
    xs = np.concatenate([left_x, right_x])
    ys = np.concatenate([left_y, right_y]) * (1.0 - _BOUNDARY_NUDGE)
    return RegionSpec(kind="closure", membership=member, boundary=np.column_stack([xs, ys]))


def region_finite_battery(q1: float, q2: float, p_h1: float, capacity: int) -> RegionSpec:
    """Inner bound with a battery holding at most `capacity` units."""
    zeta = occupancy_half_duplex_finite(q1, q2, p_h1, capacity)
    return _triangle_region(f"finite[{capacity}]", q1, _occupancy_slope(q1, q2, zeta))


def region_full_duplex(q1: float, q2: float, probs: HarvestProbs) -> RegionSpec:
    """Inner bound with full-duplex harvesting (self-interference recycling)."""
    psi = occupancy_full_duplex_infinite(q1, q2, probs)
    return _triangle_region("full-duplex", q1, _occupancy_slope(q1, q2, psi))


def max_feasible_lambda2(region: RegionSpec, lambda1: float, tol: float = 1e-9) -> float:
    """Largest lambda2 with (lambda1, lambda2) inside the region, by bisection.

    Returns 0 when even the axis point is outside (empty column convention).
    All region predicates are monotone in lambda2, which makes bisection sound.
    """
    if not bool(region.contains(lambda1, 0.0)):
        return 0.0
    lo, hi = 0.0, 1.0
    if bool(region.contains(lambda1, hi)):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bool(region.contains(lambda1, mid)):
            lo = mid
        else:
            hi = mid
    return lo


def trace_boundary(
    region: RegionSpec, n_points: int, lambda1_max: float = 1.0, tol: float = 1e-9
) -> np.ndarray:
    """Numerically trace the upper boundary on a uniform lambda1 grid."""
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    xs = np.linspace(0.0, lambda1_max, n_points)
    ys = np.array([max_feasible_lambda2(region, x, tol) for x in xs])
    return np.column_stack([xs, ys])
