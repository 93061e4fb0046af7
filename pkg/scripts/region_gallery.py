#!/usr/bin/env python3
"""Export boundary polylines for every region kind to plot-ready CSVs.

Covers the half-duplex inner bound, its closure, finite-battery shrinkage,
and the three full-duplex regimes (q2 above the battery occupancy, between,
and below the half-duplex knife edge).
"""

import argparse
from pathlib import Path

from ehaloha.experiments import export_csv
from ehaloha.params import HarvestProbs
from ehaloha.stability import (
    region_closure,
    region_finite_battery,
    region_full_duplex,
    region_r_d,
    trace_boundary,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=Path("results/regions"))
    parser.add_argument("--q1", type=float, default=0.4)
    parser.add_argument("--q2", type=float, default=0.4)
    parser.add_argument("--ph1", type=float, default=0.6)
    parser.add_argument("--points", type=int, default=201)
    args = parser.parse_args()
    out = args.out_dir

    base = region_r_d(args.q1, args.q2, args.ph1)
    export_csv(base.boundary, out / "inner_bound.csv", metadata={"kind": base.kind})
    closure = region_closure(args.ph1)
    export_csv(
        trace_boundary(closure, args.points),
        out / "closure.csv",
        metadata={"kind": closure.kind},
    )
    for capacity in (1, 5, 20):
        region = region_finite_battery(args.q1, args.q2, args.ph1, capacity)
        export_csv(region.boundary, out / f"finite_m{capacity}.csv",
                   metadata={"kind": region.kind})

    probs = HarvestProbs(p_h1=0.2, p_h2=0.2, p_h12=0.35)
    for q2 in (0.7, 0.1, 0.05):
        fd = region_full_duplex(args.q1, q2, probs)
        hd = region_r_d(args.q1, q2, probs.p_h1)
        tag = str(q2).replace(".", "p")
        export_csv(fd.boundary, out / f"full_duplex_q2_{tag}.csv",
                   metadata={"kind": fd.kind, "q2": q2})
        export_csv(hd.boundary, out / f"half_duplex_q2_{tag}.csv",
                   metadata={"kind": hd.kind, "q2": q2})
    print(f"wrote region polylines to {out}/")


if __name__ == "__main__":
    main()
