"""Stability analytics and discrete-time simulation of a two-node slotted-Aloha
network whose second node runs solely on opportunistically harvested RF energy."""

from .battery import (
    BatteryChain,
    occupancy_full_duplex_infinite,
    occupancy_half_duplex_finite,
    occupancy_half_duplex_infinite,
    steady_state_oracle,
)
from .engine import RunMetrics, SimState, SystemVariant, run, run_coupled, step
from .experiments import GridSpec, SweepResult, classify_stability, export_csv, sweep
from .harvest import (
    ZDistribution,
    EnergyAccumulator,
    accumulate_slot,
    estimate_p_h12,
    sample_received_power,
    z_pmf,
    z_pmf_via_erlang,
)
from .params import (
    HarvestProbs,
    PhysicalParams,
    ProtocolParams,
    SystemParams,
    build_system_params,
    derive_p_h,
    derive_p_h2,
    derive_theta,
    load_config,
)
from .stability import (
    RegionSpec,
    SaturatedRates,
    region_closure,
    region_dominant_first,
    region_dominant_second_interference,
    region_finite_battery,
    region_full_duplex,
    region_r_d,
    saturated_rates,
    trace_boundary,
)

__version__ = "0.1.0"
