"""Command-line front end: one executable, one subcommand per capability."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import battery, harvest, stability
from .engine import SystemVariant, run, run_coupled
from .experiments import GridSpec, export_csv, export_membership_grid, sweep
from .params import (
    ConfigError,
    PhysicalParams,
    build_system_params,
    derive_p_h,
    derive_theta,
    load_config,
)

_FLAG_TO_KEY = {
    "eta": "eta",
    "p1": "p1",
    "p2": "p2",
    "gamma": "gamma",
    "pathloss_gain": "pathloss_gain",
    "loopback_c": "loopback_c",
    "q1": "q1",
    "q2": "q2",
    "lambda1": "lambda1",
    "lambda2": "lambda2",
    "ph1": "p_h1",
    "ph2": "p_h2",
    "ph12": "p_h12",
}

_DOMINANCE = {
    "none": (False, False),
    "node1-dummy": (True, False),
    "node2-dummy": (False, True),
    "saturated": (True, True),
}

_DUPLEX = ("half", "full")


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("parameters", "config file values; flags override")
    group.add_argument("--config", type=Path, metavar="FILE")
    for flag in _FLAG_TO_KEY:
        group.add_argument(f"--{flag.replace('_', '-')}", type=float, default=None)
    group.add_argument("--battery-capacity", metavar="M|inf", default=None)


def _build_params(args):
    values: dict[str, object] = {}
    if args.config is not None:
        values.update(load_config(args.config))
    for flag, key in _FLAG_TO_KEY.items():
        value = getattr(args, flag)
        if value is not None:
            values[key] = value
    if args.battery_capacity is not None:
        raw = str(args.battery_capacity)
        values["battery_capacity"] = None if raw.lower() in ("inf", "none") else int(raw)
    return build_system_params(values), values


def _build_variant(args) -> SystemVariant:
    node1_dummy, node2_dummy = _DOMINANCE[args.dominance]
    return SystemVariant(
        system=args.system, duplex=args.duplex,
        node1_dummy=node1_dummy, node2_dummy=node2_dummy,
    )


def _context_meta(params, values: dict, **extra) -> dict:
    """Sidecar context: explicit overrides plus the fully resolved parameters."""
    return {
        "overrides": values,
        "resolved": dataclasses.asdict(params),
        **extra,
    }


def _metrics_json(metrics) -> dict:
    data = dataclasses.asdict(metrics)
    data.pop("sample_paths", None)
    return {k: (v.item() if isinstance(v, np.generic) else v) for k, v in data.items()}


def _print_json(data) -> None:
    print(json.dumps(data, indent=2, sort_keys=True))


def _cmd_harvest_pmf(args) -> int:
    params, _ = _build_params(args)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed)))
    if args.estimate_ph12:
        estimate, stderr = harvest.estimate_p_h12(rng, params.phys, args.estimate_ph12)
        _print_json({"p_h12": estimate, "stderr": stderr, "n_samples": args.estimate_ph12})
        return 0
    theta = args.theta if args.theta is not None else derive_theta(params.phys)
    if args.theta is not None:
        # synthetic link with unit budget so gamma doubles as theta
        phys = PhysicalParams(eta=1.0, p1=1.0, p2=1.0, gamma=theta, pathloss_gain=1.0)
    else:
        phys = params.phys
    samples = harvest.sample_interarrivals(rng, phys, args.arrivals)
    law = harvest.ZDistribution(theta)
    kmax = args.kmax if args.kmax else law.truncation
    counts = np.bincount(samples, minlength=kmax + 1)[1 : kmax + 1]
    lines = ["k,pmf_analytic,pmf_empirical,abs_error"]
    for k in range(1, kmax + 1):
        analytic = law.pmf(k)
        empirical = counts[k - 1] / args.arrivals
        lines.append(
            f"{k},{analytic:.9g},{empirical:.9g},{abs(analytic - empirical):.9g}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_battery(args) -> int:
    params, _ = _build_params(args)
    q1, q2 = params.proto.q1, params.proto.q2
    probs = params.probs
    cap = params.proto.battery_capacity
    if args.duplex == "full":
        if cap is not None:
            raise ValueError("no closed form for a finite full-duplex battery")
        closed = battery.occupancy_full_duplex_infinite(q1, q2, probs)
        chain = battery.BatteryChain.full_duplex(q1, q2, probs)
    elif cap is not None:
        closed = battery.occupancy_half_duplex_finite(q1, q2, probs.p_h1, cap)
        chain = battery.BatteryChain.half_duplex(q1, q2, probs.p_h1, capacity=cap)
    else:
        closed = battery.occupancy_half_duplex_infinite(q1, q2, probs.p_h1)
        chain = battery.BatteryChain.half_duplex(q1, q2, probs.p_h1)
    oracle, _pi = battery.steady_state_oracle(chain, truncation=args.truncation)
    _print_json(
        {"closed_form": closed, "oracle": oracle, "abs_diff": abs(closed - oracle)}
    )
    return 0


def _make_region(kind: str, params) -> stability.RegionSpec:
    q1, q2 = params.proto.q1, params.proto.q2
    p_h1 = params.probs.p_h1
    if kind == "rd":
        return stability.region_r_d(q1, q2, p_h1)
    if kind == "dominant1":
        return stability.region_dominant_first(q1, q2, p_h1)
    if kind == "dominant2":
        return stability.region_dominant_second_interference(q1, q2, p_h1)
    if kind == "closure":
        return stability.region_closure(p_h1)
    if kind == "finite":
        cap = params.proto.battery_capacity
        if cap is None:
            raise ValueError("--kind finite needs --battery-capacity")
        return stability.region_finite_battery(q1, q2, p_h1, cap)
    if kind == "full-duplex":
        return stability.region_full_duplex(q1, q2, params.probs)
    raise ValueError(f"unknown region kind {kind!r}")


def _cmd_region(args) -> int:
    params, values = _build_params(args)
    region = _make_region(args.kind, params)
    if args.trace:
        polyline = stability.trace_boundary(region, args.points)
    else:
        polyline = region.boundary
    meta = _context_meta(params, values, kind=region.kind)
    export_csv(polyline, args.out, metadata=meta)
    if args.grid_out:
        export_membership_grid(region, args.grid_out, n=args.grid, metadata=meta)
    return 0


def _cmd_simulate(args) -> int:
    params, values = _build_params(args)
    variant = _build_variant(args)
    decimation = args.decimation if args.paths else 0
    metrics = run(params, variant, args.horizon, seed=args.seed, path_decimation=decimation)
    if args.paths:
        export_csv(
            metrics.sample_paths,
            args.paths,
            metadata=_context_meta(
                params, values,
                variant=dataclasses.asdict(variant),
                horizon=args.horizon, seed=args.seed,
            ),
        )
    _print_json(_metrics_json(metrics))
    return 0


def _cmd_sweep(args) -> int:
    params, values = _build_params(args)
    variant = _build_variant(args)
    grid = GridSpec(
        lambda1_max=args.lambda1_max, lambda2_max=args.lambda2_max,
        n1=args.n1, n2=args.n2,
    )
    result = sweep(params, variant, grid, args.horizon, args.seed, jobs=args.jobs)
    result.metadata["effective_config"] = values
    export_csv(result, args.out)
    return 0


def _cmd_coupled_paths(args) -> int:
    params, values = _build_params(args)
    systems = [s.strip() for s in args.systems.split(",") if s.strip()]
    if len(systems) < 2:
        raise ValueError("--systems needs at least two comma-separated systems")
    node1_dummy, node2_dummy = _DOMINANCE[args.dominance]
    variants = [
        SystemVariant(system=s, duplex=args.duplex,
                      node1_dummy=node1_dummy, node2_dummy=node2_dummy)
        for s in systems
    ]
    results = run_coupled(params, variants, args.horizon, args.seed,
                          path_decimation=args.decimation)
    summary: dict = {"systems": {}}
    for system, metrics in zip(systems, results):
        path = Path(f"{args.out_prefix}_{system}.csv")
        export_csv(
            metrics.sample_paths,
            path,
            metadata=_context_meta(
                params, values,
                system=system, horizon=args.horizon, seed=args.seed,
            ),
        )
        summary["systems"][system] = _metrics_json(metrics) | {"paths": str(path)}
    if "deprived" in systems and "equivalent" in systems:
        q2_dep = results[systems.index("deprived")].sample_paths.q2
        q2_eqv = results[systems.index("equivalent")].sample_paths.q2
        diff = q2_dep - q2_eqv
        summary["q2_dominance"] = {
            "holds_everywhere": bool((diff >= 0).all()),
            "min_gap": int(diff.min()),
            "max_gap": int(diff.max()),
        }
    _print_json(summary)
    return 0


def run_validation(params, truncation: int = 10_000) -> list[tuple[str, bool, str]]:
    """Closed-form-versus-oracle consistency suite; all checks deterministic."""
    checks: list[tuple[str, bool, str]] = []

    phys_ref = PhysicalParams(eta=0.7, p1=1.0, gamma=0.2335, pathloss_gain=0.5)
    theta_ref = derive_theta(phys_ref)
    ph_ref = derive_p_h(theta_ref)
    ok = abs(theta_ref - 0.667) <= 1e-3 and abs(ph_ref - 0.6) <= 1e-3
    checks.append(
        ("reference-scenario constants", ok, f"theta={theta_ref:.6f} p_h={ph_ref:.6f}")
    )

    worst = 0.0
    for theta in (0.1, 0.667, 2.0, 10.0):
        for k in range(1, 101):
            worst = max(worst, abs(harvest.z_pmf(theta, k) - harvest.z_pmf_via_erlang(theta, k)))
    checks.append(("pmf two-route identity", worst <= 1e-12, f"max |diff|={worst:.3e}"))

    worst_norm = 0.0
    worst_mean = 0.0
    for theta in (0.1, 0.667, 2.0, 10.0):
        kmax = harvest.z_pmf_truncation(theta)
        masses = [harvest.z_pmf(theta, k) for k in range(1, kmax + 1)]
        worst_norm = max(worst_norm, abs(1.0 - sum(masses)))
        mean = sum(k * m for k, m in enumerate(masses, start=1))
        worst_mean = max(worst_mean, abs(mean - (1.0 + theta)))
    checks.append(
        (
            "pmf normalization and mean",
            worst_norm <= 1e-10 and worst_mean <= 1e-8,
            f"norm err={worst_norm:.3e} mean err={worst_mean:.3e}",
        )
    )

    worst_b = 0.0
    qs = (0.1, 0.3, 0.5, 0.7, 0.9)
    phs = (0.2, 0.5, 0.8)
    probs_fd = params.probs
    for q1 in qs:
        for q2 in qs:
            for ph in phs:
                closed = battery.occupancy_half_duplex_infinite(q1, q2, ph)
                oracle, _ = battery.steady_state_oracle(
                    battery.BatteryChain.half_duplex(q1, q2, ph), truncation
                )
                worst_b = max(worst_b, abs(closed - oracle))
                for cap in (1, 2, 5, 20):
                    closed = battery.occupancy_half_duplex_finite(q1, q2, ph, cap)
                    oracle, _ = battery.steady_state_oracle(
                        battery.BatteryChain.half_duplex(q1, q2, ph, capacity=cap)
                    )
                    worst_b = max(worst_b, abs(closed - oracle))
    own = (params.proto.q1, params.proto.q2, params.probs.p_h1)
    closed = battery.occupancy_half_duplex_infinite(*own)
    oracle, _ = battery.steady_state_oracle(
        battery.BatteryChain.half_duplex(*own), truncation
    )
    worst_b = max(worst_b, abs(closed - oracle))
    closed = battery.occupancy_full_duplex_infinite(params.proto.q1, params.proto.q2, probs_fd)
    oracle, _ = battery.steady_state_oracle(
        battery.BatteryChain.full_duplex(params.proto.q1, params.proto.q2, probs_fd), truncation
    )
    worst_b = max(worst_b, abs(closed - oracle))
    checks.append(("battery closed forms vs oracle", worst_b <= 1e-9, f"max |diff|={worst_b:.3e}"))

    q1, q2, ph = own
    grid = np.linspace(0.0, 1.0, 200)
    l1, l2 = np.meshgrid(grid, grid, indexing="ij")
    r_d = stability.region_r_d(q1, q2, ph).contains(l1, l2)
    r_1 = stability.region_dominant_first(q1, q2, ph).contains(l1, l2)
    r_2 = stability.region_dominant_second_interference(q1, q2, ph).contains(l1, l2)
    identity = bool((r_d == (r_1 | r_2)).all())
    checks.append(("dominant-union identity", identity, "200x200 grid"))

    closure = stability.region_closure(ph).contains(l1, l2)
    nested = bool((~r_d | closure).all())
    for cap in (1, 5, 20):
        fin = stability.region_finite_battery(q1, q2, ph, cap).contains(l1, l2)
        nested = nested and bool((~fin | r_d).all())
    checks.append(("region nesting finite within rd within closure", nested, "200x200 grid"))

    return checks


def _cmd_validate(args) -> int:
    params, _ = _build_params(args)
    checks = run_validation(params, truncation=args.truncation)
    width = max(len(name) for name, _, _ in checks)
    all_ok = True
    for name, ok, detail in checks:
        all_ok &= ok
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    print(f"{'overall':<{width}}  {'PASS' if all_ok else 'FAIL'}")
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ehaloha",
        description="Stability analytics and simulation of energy-harvesting slotted Aloha",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("harvest-pmf", help="slots-to-harvest distribution, analytic vs empirical")
    p.add_argument("--theta", type=float, default=None, help="override the derived value")
    p.add_argument("--kmax", type=int, default=0, help="largest k to emit (default: auto)")
    p.add_argument("--arrivals", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.add_argument(
        "--estimate-ph12", type=int, default=0, metavar="N",
        help="instead of the pmf table, estimate the both-transmitting harvest "
             "probability by Monte Carlo over N samples (JSON output)",
    )
    _add_param_flags(p)
    p.set_defaults(func=_cmd_harvest_pmf)

    p = sub.add_parser("battery", help="battery occupancy: closed form vs numeric oracle")
    p.add_argument("--duplex", choices=_DUPLEX, default="half")
    p.add_argument("--truncation", type=int, default=10_000)
    _add_param_flags(p)
    p.set_defaults(func=_cmd_battery)

    p = sub.add_parser("region", help="stability-region boundary and membership grid")
    p.add_argument(
        "--kind", required=True,
        choices=("rd", "closure", "finite", "full-duplex", "dominant1", "dominant2"),
    )
    p.add_argument("--out", required=True, help="boundary polyline CSV path")
    p.add_argument("--trace", action="store_true", help="bisection trace instead of vertices")
    p.add_argument("--points", type=int, default=201, help="trace resolution")
    p.add_argument("--grid", type=int, default=200, help="membership grid resolution")
    p.add_argument("--grid-out", default=None, help="membership grid CSV path")
    _add_param_flags(p)
    p.set_defaults(func=_cmd_region)

    p = sub.add_parser("simulate", help="single run, JSON metrics")
    p.add_argument("--system", choices=("exact", "equivalent", "deprived"), required=True)
    p.add_argument("--duplex", choices=_DUPLEX, default="half")
    p.add_argument("--dominance", choices=tuple(_DOMINANCE), default="none")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--paths", default=None, help="sample-path CSV path")
    p.add_argument("--decimation", type=int, default=1)
    _add_param_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="arrival-rate grid sweep, CSV output")
    p.add_argument("--system", choices=("exact", "equivalent", "deprived"), required=True)
    p.add_argument("--duplex", choices=_DUPLEX, default="half")
    p.add_argument("--dominance", choices=tuple(_DOMINANCE), default="none")
    p.add_argument("--n1", type=int, default=30)
    p.add_argument("--n2", type=int, default=30)
    p.add_argument("--lambda1-max", type=float, default=0.45)
    p.add_argument("--lambda2-max", type=float, default=0.2)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    _add_param_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("coupled-paths", help="variants on common random numbers")
    p.add_argument("--systems", default="deprived,equivalent",
                   help="comma-separated systems to couple")
    p.add_argument("--duplex", choices=_DUPLEX, default="half")
    p.add_argument("--dominance", choices=tuple(_DOMINANCE), default="none")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--decimation", type=int, default=1)
    p.add_argument("--out-prefix", required=True)
    _add_param_flags(p)
    p.set_defaults(func=_cmd_coupled_paths)

    p = sub.add_parser("validate", help="closed-form vs oracle consistency table")
    p.add_argument("--truncation", type=int, default=10_000)
    _add_param_flags(p)
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
