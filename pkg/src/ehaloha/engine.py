"""Slot-by-slot discrete-time simulator for the three system flavors.

Systems: "exact" accumulates faded received power and emits a battery unit on
crossing the quantum; "equivalent" replaces harvesting by a per-slot Bernoulli
draw conditioned on the transmitting set; "deprived" is the equivalent system
with node 2 additionally gated on node 1's queue being non-empty.

Slot order: read start-of-slot state, draw transmission decisions, resolve
the collision channel, charge node 2 one unit per attempt (dummy included),
draw the harvest, apply queue departures then arrivals, then update the
battery with the capacity clamp.  A harvested unit becomes spendable in the
next slot, never in the slot it arrives.

All randomness comes from pre-drawn per-slot streams (counter-based Philox
generators split from one seed), so runs are reproducible bit-for-bit and
several variants can be driven by the same draws for coupled comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .params import SystemParams

SYSTEMS = ("exact", "equivalent", "deprived")
DUPLEX_MODES = ("half", "full")


@dataclass(frozen=True)
class SystemVariant:
    """Which system to simulate and which dominance modifications to apply.

    node1_dummy / node2_dummy make the node transmit dummy packets when its
    data queue is empty (node 2 only if its battery allows), which is how the
    dominance arguments saturate a node: dummies collide and consume energy
    exactly like real packets but carry no payload.
    """

    system: str = "equivalent"
    duplex: str = "half"
    node1_dummy: bool = False
    node2_dummy: bool = False

    def __post_init__(self) -> None:
        if self.system not in SYSTEMS:
            raise ValueError(f"system must be one of {SYSTEMS}, got {self.system!r}")
        if self.duplex not in DUPLEX_MODES:
            raise ValueError(f"duplex must be one of {DUPLEX_MODES}, got {self.duplex!r}")

    @classmethod
    def saturated(cls, system: str = "equivalent", duplex: str = "half") -> "SystemVariant":
        """Both nodes backlogged via dummy packets: measures saturated rates."""
        return cls(system=system, duplex=duplex, node1_dummy=True, node2_dummy=True)


@dataclass
class SimState:
    q1_len: int = 0
    q2_len: int = 0
    battery: int = 0
    accumulator: float = 0.0
    slot: int = 0


@dataclass(frozen=True)
class SlotOutcome:
    tx1: bool
    tx2: bool
    success1: bool
    success2: bool
    collision: bool
    harvest_arrival: int
    arrival1: bool
    arrival2: bool


@dataclass(frozen=True)
class SlotDraws:
    """One slot worth of randomness: five uniforms and two Exp(1) fading draws."""

    u_arrival1: float
    u_arrival2: float
    u_decision1: float
    u_decision2: float
    u_harvest: float
    fade1: float = 0.0
    fade2: float = 0.0


@dataclass(frozen=True)
class Streams:
    """Pre-drawn per-slot randomness for a whole run."""

    u_arrival1: np.ndarray
    u_arrival2: np.ndarray
    u_decision1: np.ndarray
    u_decision2: np.ndarray
    u_harvest: np.ndarray
    fade1: np.ndarray
    fade2: np.ndarray

    @property
    def horizon(self) -> int:
        return self.u_arrival1.shape[0]


@dataclass(frozen=True, eq=False)
class SamplePaths:
    slot: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    battery: np.ndarray

    def __eq__(self, other) -> bool:
        if not isinstance(other, SamplePaths):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("slot", "q1", "q2", "battery")
        )


@dataclass(frozen=True)
class RunMetrics:
    """Time-averaged and counting statistics of one run."""

    avg_q1: float
    avg_q2: float
    throughput1: float        # node-1 successes (dummies included) per slot
    throughput2: float        # node-2 successes (dummies included) per slot
    cond_service2: float      # real node-2 successes per slot with Q2 non-empty
    harvest_rate: float       # battery-unit arrivals per slot
    battery_occupancy: float  # fraction of slots starting with a non-empty battery
    slots: int
    successes1: int
    successes2: int
    collisions: int
    harvest_arrivals: int
    energy_spent: int
    tx1_alone_slots: int
    final_q1: int
    final_q2: int
    final_battery: int
    sample_paths: SamplePaths | None = None


def split_seed(seed: int | np.random.SeedSequence, index: tuple[int, ...]):
    """Derive an independent child SeedSequence from (seed, index)."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(index))
    return np.random.SeedSequence(seed, spawn_key=tuple(index))


def draw_streams(
    seed: int | np.random.SeedSequence, horizon: int, fading: bool = False
) -> Streams:
    """Draw the seven per-slot streams from independent Philox substreams.

    Fading streams are only materialized when the exact system needs them;
    the kernel never touches them otherwise.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(7)
    gens = [np.random.Generator(np.random.Philox(child)) for child in children]
    empty = np.empty(0)
    return Streams(
        u_arrival1=gens[0].random(horizon),
        u_arrival2=gens[1].random(horizon),
        u_decision1=gens[2].random(horizon),
        u_decision2=gens[3].random(horizon),
        u_harvest=gens[4].random(horizon),
        fade1=gens[5].exponential(1.0, horizon) if fading else empty,
        fade2=gens[6].exponential(1.0, horizon) if fading else empty,
    )


@njit(cache=True)
def _run_kernel(
    q1_len, q2_len, battery, acc,
    tx_p1, tx_p2, lam1, lam2,
    sys_exact, sys_deprived, full_duplex,
    node1_dummy, node2_dummy,
    p_h1, p_h2, p_h12,
    gamma, gain1, gain2, cap,
    u_a1, u_a2, u_d1, u_d2, u_h, e1, e2,
    dec,
):
    horizon = u_a1.shape[0]
    n_rec = (horizon + dec - 1) // dec if dec > 0 else 0
    path_slot = np.empty(n_rec, np.int64)
    path_q1 = np.empty(n_rec, np.int64)
    path_q2 = np.empty(n_rec, np.int64)
    path_b = np.empty(n_rec, np.int64)

    sum_q1 = 0.0
    sum_q2 = 0.0
    succ1 = 0
    succ2 = 0
    succ2_real = 0
    coll = 0
    harv = 0
    spent = 0
    q2_busy = 0
    b_busy = 0
    tx1_alone = 0
    rec = 0

    for t in range(horizon):
        if q2_len > 0:
            q2_busy += 1
        if battery > 0:
            b_busy += 1

        tx1 = (node1_dummy or q1_len > 0) and u_d1[t] < tx_p1
        elig2 = battery > 0 and (node2_dummy or q2_len > 0)
        if sys_deprived and q1_len <= 0:
            elig2 = False
        tx2 = elig2 and u_d2[t] < tx_p2

        s1 = tx1 and not tx2
        s2 = tx2 and not tx1
        if tx1 and tx2:
            coll += 1
        if s1:
            succ1 += 1
            tx1_alone += 1
        if s2:
            succ2 += 1
            if q2_len > 0:
                succ2_real += 1

        arrival = 0
        if sys_exact:
            power = 0.0
            if full_duplex:
                if tx1:
                    power += gain1 * e1[t]
                if tx2:
                    power += gain2 * e2[t]
            elif s1:
                power = gain1 * e1[t]
            if power > 0.0:
                acc += power
                if acc >= gamma:
                    arrival = 1
                    acc = 0.0
        else:
            if full_duplex:
                if tx1 and tx2:
                    p = p_h12
                elif tx1:
                    p = p_h1
                elif tx2:
                    p = p_h2
                else:
                    p = 0.0
            else:
                p = p_h1 if s1 else 0.0
            if p > 0.0 and u_h[t] < p:
                arrival = 1
        harv += arrival

        if s1 and q1_len > 0:
            q1_len -= 1
        if s2 and q2_len > 0:
            q2_len -= 1
        if u_a1[t] < lam1:
            q1_len += 1
        if u_a2[t] < lam2:
            q2_len += 1

        if tx2:
            battery -= 1
            spent += 1
        battery += arrival
        if cap >= 0 and battery > cap:
            battery = cap

        sum_q1 += q1_len
        sum_q2 += q2_len
        if dec > 0 and t % dec == 0:
            path_slot[rec] = t
            path_q1[rec] = q1_len
            path_q2[rec] = q2_len
            path_b[rec] = battery
            rec += 1

    return (
        q1_len, q2_len, battery, acc,
        sum_q1, sum_q2, succ1, succ2, succ2_real, coll, harv, spent,
        q2_busy, b_busy, tx1_alone,
        path_slot, path_q1, path_q2, path_b,
    )


def _kernel_args(params: SystemParams, variant: SystemVariant):
    phys, proto, probs = params.phys, params.proto, params.probs
    full = variant.duplex == "full"
    # half duplex cannot harvest while node 2 transmits
    p_h2 = probs.p_h2 if full else 0.0
    p_h12 = probs.p_h12 if full else 0.0
    cap = -1 if proto.battery_capacity is None else int(proto.battery_capacity)
    return (
        proto.q1, proto.q2, proto.lambda1, proto.lambda2,
        variant.system == "exact", variant.system == "deprived", full,
        variant.node1_dummy, variant.node2_dummy,
        probs.p_h1, p_h2, p_h12,
        phys.gamma,
        phys.eta * phys.p1 * phys.pathloss_gain,
        phys.eta * phys.p2 * phys.loopback_c,
        cap,
    )


def step(
    state: SimState, params: SystemParams, variant: SystemVariant, draws: SlotDraws
) -> tuple[SimState, SlotOutcome]:
    """Execute one slot from explicit per-slot draws; returns (state', outcome)."""
    one = [
        np.array([value], dtype=np.float64)
        for value in (draws.u_arrival1, draws.u_arrival2, draws.u_decision1,
                      draws.u_decision2, draws.u_harvest, draws.fade1, draws.fade2)
    ]
    out = _run_kernel(
        state.q1_len, state.q2_len, state.battery, state.accumulator,
        *_kernel_args(params, variant),
        *one,
        0,
    )
    q1_len, q2_len, battery, acc = out[0], out[1], out[2], out[3]
    succ1, succ2, coll, harv = out[6], out[7], out[9], out[10]
    s1, s2, c = succ1 > 0, succ2 > 0, coll > 0
    outcome = SlotOutcome(
        tx1=s1 or c,
        tx2=s2 or c,
        success1=s1,
        success2=s2,
        collision=c,
        harvest_arrival=harv,
        arrival1=draws.u_arrival1 < params.proto.lambda1,
        arrival2=draws.u_arrival2 < params.proto.lambda2,
    )
    new_state = SimState(
        q1_len=q1_len, q2_len=q2_len, battery=battery, accumulator=acc,
        slot=state.slot + 1,
    )
    return new_state, outcome


def run(
    params: SystemParams,
    variant: SystemVariant,
    horizon: int,
    seed: int | np.random.SeedSequence | None = None,
    path_decimation: int = 0,
    streams: Streams | None = None,
) -> RunMetrics:
    """Simulate `horizon` slots from an empty start and aggregate metrics.

    Pass either a seed or explicit pre-drawn streams (for coupled runs).
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if streams is None:
        if seed is None:
            raise ValueError("either seed or streams must be given")
        streams = draw_streams(seed, horizon, fading=variant.system == "exact")
    if streams.horizon < horizon:
        raise ValueError(f"streams cover {streams.horizon} slots, need {horizon}")
    if variant.system == "exact" and streams.fade1.shape[0] < horizon:
        raise ValueError("exact system needs fading streams (fading=True)")

    out = _run_kernel(
        0, 0, 0, 0.0,
        *_kernel_args(params, variant),
        streams.u_arrival1[:horizon], streams.u_arrival2[:horizon],
        streams.u_decision1[:horizon], streams.u_decision2[:horizon],
        streams.u_harvest[:horizon], streams.fade1[:horizon], streams.fade2[:horizon],
        path_decimation,
    )
    (
        q1_len, q2_len, battery, _acc,
        sum_q1, sum_q2, succ1, succ2, succ2_real, coll, harv, spent,
        q2_busy, b_busy, tx1_alone,
        path_slot, path_q1, path_q2, path_b,
    ) = out
    paths = None
    if path_decimation > 0:
        paths = SamplePaths(slot=path_slot, q1=path_q1, q2=path_q2, battery=path_b)
    return RunMetrics(
        avg_q1=sum_q1 / horizon,
        avg_q2=sum_q2 / horizon,
        throughput1=succ1 / horizon,
        throughput2=succ2 / horizon,
        cond_service2=succ2_real / q2_busy if q2_busy else 0.0,
        harvest_rate=harv / horizon,
        battery_occupancy=b_busy / horizon,
        slots=horizon,
        successes1=succ1,
        successes2=succ2,
        collisions=coll,
        harvest_arrivals=harv,
        energy_spent=spent,
        tx1_alone_slots=tx1_alone,
        final_q1=q1_len,
        final_q2=q2_len,
        final_battery=battery,
        sample_paths=paths,
    )


def run_coupled(
    params: SystemParams,
    variants: list[SystemVariant],
    horizon: int,
    seed: int | np.random.SeedSequence,
    path_decimation: int = 1,
) -> list[RunMetrics]:
    """Run several variants on identical arrival/decision/harvest draws.

    Common random numbers make sample paths directly comparable, e.g. the
    deprived system's Q2 path against the equivalent system's.
    """
    if len(variants) < 2:
        raise ValueError("run_coupled needs at least two variants")
    fading = any(v.system == "exact" for v in variants)
    streams = draw_streams(seed, horizon, fading=fading)
    return [
        run(params, v, horizon, streams=streams, path_decimation=path_decimation)
        for v in variants
    ]
