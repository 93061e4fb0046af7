#!/usr/bin/env python3
"""Sweep the arrival-rate plane for the deprived, equivalent, and exact systems.

Writes one sweep CSV per system (average queue lengths, throughputs, harvest
rate per cell) plus the analytic inner-bound polyline to overlay on the maps.
"""

import argparse
from pathlib import Path

from ehaloha.engine import SystemVariant
from ehaloha.experiments import GridSpec, export_csv, sweep
from ehaloha.params import build_system_params
from ehaloha.stability import region_r_d


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=Path("results/maps"))
    parser.add_argument("--horizon", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--n1", type=int, default=30)
    parser.add_argument("--n2", type=int, default=30)
    parser.add_argument("--jobs", type=int, default=2)
    args = parser.parse_args()

    grid = GridSpec(lambda1_max=0.45, lambda2_max=0.2, n1=args.n1, n2=args.n2)
    eqv_params = build_system_params({"p_h1": 0.6})
    exact_params = build_system_params()

    for name, params, system in (
        ("deprived", eqv_params, "deprived"),
        ("equivalent", eqv_params, "equivalent"),
        ("exact", exact_params, "exact"),
    ):
        result = sweep(params, SystemVariant(system=system), grid,
                       args.horizon, args.seed, jobs=args.jobs)
        export_csv(result, args.out_dir / f"sweep_{name}.csv")
        print(f"swept {name}: {grid.n1}x{grid.n2} cells, {args.horizon} slots each")

    region = region_r_d(0.4, 0.4, 0.6)
    export_csv(region.boundary, args.out_dir / "inner_bound.csv",
               metadata={"kind": region.kind})
    print(f"wrote maps to {args.out_dir}/")


if __name__ == "__main__":
    main()
