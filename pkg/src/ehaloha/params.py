"""Validated parameter bundles shared by the analysis and simulation modules.

All bundles are frozen dataclasses: immutable after construction and safe to
share across threads/processes by value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path


class ConfigError(ValueError):
    """Malformed or unknown configuration input."""


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


@dataclass(frozen=True)
class PhysicalParams:
    """Physical-layer constants of the harvesting link.

    The pathloss is stored as the composite gain (1 + l**alpha)**-1 because
    every formula and the simulator consume only that number; use
    :meth:`from_distance` to build it from a distance/exponent pair.
    """

    eta: float = 0.7            # RF harvesting efficiency, (0, 1]
    p1: float = 1.0             # node-1 transmit power [W]
    p2: float = 1.0             # node-2 transmit power [W], used in full duplex only
    gamma: float = 0.2335       # energy quantum [J] per stored battery unit
    pathloss_gain: float = 0.5  # composite (1 + l**alpha)**-1, (0, 1]
    loopback_c: float = 0.0     # self-interference coefficient, [0, 1]

    def __post_init__(self) -> None:
        _require(0.0 < self.eta <= 1.0, f"eta must be in (0, 1], got {self.eta}")
        _require(self.p1 > 0.0, f"p1 must be > 0, got {self.p1}")
        _require(self.p2 > 0.0, f"p2 must be > 0, got {self.p2}")
        _require(self.gamma > 0.0, f"gamma must be > 0, got {self.gamma}")
        _require(
            0.0 < self.pathloss_gain <= 1.0,
            f"pathloss_gain must be in (0, 1], got {self.pathloss_gain}",
        )
        _require(
            0.0 <= self.loopback_c <= 1.0,
            f"loopback_c must be in [0, 1], got {self.loopback_c}",
        )

    @classmethod
    def from_distance(cls, distance: float, alpha: float, **kwargs) -> "PhysicalParams":
        """Build with pathloss_gain = 1 / (1 + distance**alpha)."""
        _require(distance >= 0.0, "distance must be >= 0")
        return cls(pathloss_gain=1.0 / (1.0 + distance**alpha), **kwargs)


@dataclass(frozen=True)
class ProtocolParams:
    """Slotted-Aloha protocol knobs: transmit probabilities, arrival rates, battery size."""

    q1: float = 0.4
    q2: float = 0.4
    lambda1: float = 0.0
    lambda2: float = 0.0
    battery_capacity: int | None = None  # None means unlimited

    def __post_init__(self) -> None:
        for name in ("q1", "q2", "lambda1", "lambda2"):
            value = getattr(self, name)
            _require(0.0 <= value <= 1.0, f"{name} must be in [0, 1], got {value}")
        if self.battery_capacity is not None:
            _require(
                isinstance(self.battery_capacity, int) and self.battery_capacity >= 1,
                f"battery_capacity must be a positive integer or None, "
                f"got {self.battery_capacity!r}",
            )


@dataclass(frozen=True)
class HarvestProbs:
    """Per-slot harvest success probabilities by transmitting set.

    p_h1 applies when only node 1 transmits, p_h2 when only node 2 transmits
    (self-interference recycling), p_h12 when both do.  A half-duplex node
    cannot harvest while transmitting, so p_h2 = p_h12 = 0 there.
    """

    p_h1: float
    p_h2: float = 0.0
    p_h12: float = 0.0

    def __post_init__(self) -> None:
        for name in ("p_h1", "p_h2", "p_h12"):
            value = getattr(self, name)
            _require(0.0 <= value <= 1.0, f"{name} must be in [0, 1], got {value}")

    @classmethod
    def half_duplex(cls, p_h1: float) -> "HarvestProbs":
        return cls(p_h1=p_h1, p_h2=0.0, p_h12=0.0)


@dataclass(frozen=True)
class SystemParams:
    """Everything a simulation or region computation needs."""

    phys: PhysicalParams
    proto: ProtocolParams
    probs: HarvestProbs


def derive_theta(phys: PhysicalParams) -> float:
    """Normalized energy quantum: mean number of extra slots needed per unit.

    theta = gamma / (eta * p1 * pathloss_gain).
    """
    return phys.gamma / (phys.eta * phys.p1 * phys.pathloss_gain)


def derive_p_h(theta: float) -> float:
    """Bernoulli harvest probability equivalent to a mean inter-arrival of 1 + theta."""
    _require(theta >= 0.0, f"theta must be >= 0, got {theta}")
    return 1.0 / (1.0 + theta)


def derive_p_h2(phys: PhysicalParams) -> float:
    """Harvest probability from self-interference alone; 0 without a loopback path."""
    if phys.loopback_c == 0.0:
        return 0.0
    return 1.0 / (1.0 + phys.gamma / (phys.eta * phys.p2 * phys.loopback_c))


# Flat key = value configuration namespace.  battery_capacity accepts a
# positive integer or "inf"; p_h* keys override the values otherwise derived
# from the physical parameters.
DEFAULTS: dict[str, object] = {
    "eta": 0.7,
    "p1": 1.0,
    "p2": 1.0,
    "gamma": 0.2335,
    "pathloss_gain": 0.5,
    "loopback_c": 0.0,
    "q1": 0.4,
    "q2": 0.4,
    "lambda1": 0.0,
    "lambda2": 0.0,
    "battery_capacity": None,
    "p_h1": None,
    "p_h2": None,
    "p_h12": None,
}

CONFIG_KEYS = tuple(DEFAULTS)

_PHYS_KEYS = ("eta", "p1", "p2", "gamma", "pathloss_gain", "loopback_c")
_PROTO_KEYS = ("q1", "q2", "lambda1", "lambda2", "battery_capacity")


def _parse_value(key: str, raw: str) -> object:
    if key == "battery_capacity":
        if raw.lower() in ("inf", "infinite", "none"):
            return None
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"battery_capacity must be an integer or 'inf', got {raw!r}") from exc
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"value for {key!r} is not a decimal number: {raw!r}") from exc


def load_config(path: str | Path) -> dict[str, object]:
    """Parse a flat ``key = value`` config file.  Unknown keys are a hard error."""
    values: dict[str, object] = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _parse_value(key, raw)
    return values


def build_system_params(values: dict[str, object] | None = None) -> SystemParams:
    """Assemble a validated SystemParams from defaults plus overrides.

    Harvest probabilities left unset are derived from the physical parameters:
    p_h1 via the mean-inter-arrival equivalence, p_h2 from the loopback path,
    p_h12 defaults to 0 (no closed form; supply it or estimate by Monte Carlo).
    """
    merged = dict(DEFAULTS)
    for key, value in (values or {}).items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown parameter {key!r}")
        merged[key] = value

    phys = PhysicalParams(**{k: merged[k] for k in _PHYS_KEYS})
    cap = merged["battery_capacity"]
    proto = ProtocolParams(
        q1=merged["q1"],
        q2=merged["q2"],
        lambda1=merged["lambda1"],
        lambda2=merged["lambda2"],
        battery_capacity=None if cap is None else int(cap),
    )
    p_h1 = merged["p_h1"]
    if p_h1 is None:
        p_h1 = derive_p_h(derive_theta(phys))
    p_h2 = merged["p_h2"]
    if p_h2 is None:
        p_h2 = derive_p_h2(phys)
    p_h12 = merged["p_h12"]
    if p_h12 is None:
        p_h12 = 0.0
    probs = HarvestProbs(p_h1=float(p_h1), p_h2=float(p_h2), p_h12=float(p_h12))
    return SystemParams(phys=phys, proto=proto, probs=probs)
