"""Arrival-rate grid sweeps, stability classification, and plot-data export."""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import RunMetrics, SamplePaths, SystemVariant, run, split_seed
from .params import SystemParams
from .stability import RegionSpec

SWEEP_COLUMNS = (
    "lambda1", "lambda2", "avg_q1", "avg_q2", "throughput1", "throughput2",
    "cond_service2", "harvest_rate", "battery_occupancy",
)
PATH_COLUMNS = ("slot", "q1", "q2", "battery")
POLYLINE_COLUMNS = ("lambda1", "lambda2")
GRID_COLUMNS = ("lambda1", "lambda2", "inside")


@dataclass(frozen=True)
class GridSpec:
    """Rectangular arrival-rate grid: n1 x n2 points over [0, max1] x [0, max2]."""

    lambda1_max: float
    lambda2_max: float
    n1: int
    n2: int

    def __post_init__(self) -> None:
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError("grid needs at least 2 points per axis")

    def lambda1_values(self) -> np.ndarray:
        return np.linspace(0.0, self.lambda1_max, self.n1)

    def lambda2_values(self) -> np.ndarray:
        return np.linspace(0.0, self.lambda2_max, self.n2)


@dataclass(frozen=True)
class SweepResult:
    lambda1: np.ndarray
    lambda2: np.ndarray
    cells: list[list[RunMetrics]]  # indexed [i][j] matching lambda1[i], lambda2[j]
    metadata: dict

    def metrics_at(self, i: int, j: int) -> RunMetrics:
        return self.cells[i][j]


def _cell_params(params: SystemParams, lam1: float, lam2: float) -> SystemParams:
    proto = dataclasses.replace(params.proto, lambda1=float(lam1), lambda2=float(lam2))
    return dataclasses.replace(params, proto=proto)


def _run_cell(args) -> tuple[int, int, RunMetrics]:
    params, variant, horizon, seed, i, j, lam1, lam2 = args
    metrics = run(
        _cell_params(params, lam1, lam2),
        variant,
        horizon,
        seed=split_seed(seed, (i, j)),
    )
    return i, j, metrics


def sweep(
    params: SystemParams,
    variant: SystemVariant,
    grid: GridSpec,
    horizon: int,
    seed: int,
    jobs: int = 1,
) -> SweepResult:
    """Run one simulation per grid cell with independent per-cell substreams.

    Cell seeds depend only on (seed, i, j), so results are identical whatever
    the execution order or degree of parallelism.
    """
    l1 = grid.lambda1_values()
    l2 = grid.lambda2_values()
    tasks = [
        (params, variant, horizon, seed, i, j, l1[i], l2[j])
        for i in range(grid.n1)
        for j in range(grid.n2)
    ]
    cells: list[list[RunMetrics | None]] = [[None] * grid.n2 for _ in range(grid.n1)]
    if jobs <= 1:
        results = map(_run_cell, tasks)
    else:
        pool = ProcessPoolExecutor(max_workers=jobs)
        try:
            results = list(pool.map(_run_cell, tasks, chunksize=8))
        finally:
            pool.shutdown()
    for i, j, metrics in results:
        cells[i][j] = metrics
    assert all(m is not None for row in cells for m in row), "incomplete grid"
    metadata = {
        "params": _jsonable(dataclasses.asdict(params)),
        "variant": dataclasses.asdict(variant),
        "horizon": horizon,
        "seed": seed,
        "grid": dataclasses.asdict(grid),
    }
    return SweepResult(lambda1=l1, lambda2=l2, cells=cells, metadata=metadata)


def classify_stability(
    metrics_base: RunMetrics,
    metrics_doubled: RunMetrics,
    grow_ratio: float = 1.5,
    settle_ratio: float = 1.1,
    small_queue: float = 2.0,
) -> str:
    """Horizon-doubling ratio test: 'stable', 'unstable', or 'indeterminate'.

    An unstable cell's time-averaged backlog roughly doubles with the horizon;
    a stable one converges.  Tiny averages are classified stable outright to
    keep the ratio of two near-zero numbers from flapping.
    """
    base = metrics_base.avg_q1 + metrics_base.avg_q2
    doubled = metrics_doubled.avg_q1 + metrics_doubled.avg_q2
    if doubled <= small_queue:
        return "stable"
    ratio = doubled / max(base, 1e-12)
    if ratio > grow_ratio:
        return "unstable"
    if ratio < settle_ratio:
        return "stable"
    return "indeterminate"


def near_boundary(
    region: RegionSpec, lambda1: float, lambda2: float, margin: float = 0.02, n_probe: int = 16
) -> bool:
    """True when a circle of radius `margin` around the point mixes inside/outside.

    Finite-horizon classification is unreliable close to criticality, so
    sweep scoring excludes these cells.
    """
    angles = np.linspace(0.0, 2.0 * np.pi, n_probe, endpoint=False)
    xs = np.clip(lambda1 + margin * np.cos(angles), 0.0, 1.0)
    ys = np.clip(lambda2 + margin * np.sin(angles), 0.0, 1.0)
    flags = region.contains(xs, ys)
    return bool(flags.any() and not flags.all())


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".9g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _write_rows(path: Path, columns: tuple[str, ...], rows) -> None:
    lines = [",".join(columns)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def export_csv(obj, path: str | Path, metadata: dict | None = None) -> Path:
    """Write a sweep, sample-path bundle, or polyline as CSV plus a JSON sidecar.

    Column order and float formatting (9 significant digits) are fixed, so
    re-exporting the same object reproduces the file byte for byte.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sidecar: dict = {"columns": None, "rows": 0}
    if isinstance(obj, SweepResult):
        rows = [
            (
                obj.lambda1[i], obj.lambda2[j],
                m.avg_q1, m.avg_q2, m.throughput1, m.throughput2,
                m.cond_service2, m.harvest_rate, m.battery_occupancy,
            )
            for i in range(obj.lambda1.shape[0])
            for j in range(obj.lambda2.shape[0])
            for m in (obj.cells[i][j],)
        ]
        _write_rows(path, SWEEP_COLUMNS, rows)
        sidecar.update(columns=list(SWEEP_COLUMNS), rows=len(rows))
        sidecar["sweep"] = _jsonable(obj.metadata)
    elif isinstance(obj, SamplePaths):
        rows = list(zip(obj.slot, obj.q1, obj.q2, obj.battery))
        _write_rows(path, PATH_COLUMNS, rows)
        sidecar.update(columns=list(PATH_COLUMNS), rows=len(rows))
    elif isinstance(obj, np.ndarray) and obj.ndim == 2 and obj.shape[1] == 2:
        _write_rows(path, POLYLINE_COLUMNS, list(obj))
        sidecar.update(columns=list(POLYLINE_COLUMNS), rows=obj.shape[0])
    else:
        raise TypeError(f"cannot export object of type {type(obj).__name__}")
    if metadata:
        sidecar["context"] = _jsonable(metadata)
    sidecar_path = Path(str(path) + ".meta.json")
    sidecar_path.write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return path


def export_membership_grid(
    region: RegionSpec, path: str | Path, n: int = 200, metadata: dict | None = None
) -> Path:
    """Write an n x n membership grid over [0, 1]^2 as lambda1, lambda2, inside."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = np.linspace(0.0, 1.0, n)
    rows = []
    for x in values:
        inside = region.contains(np.full_like(values, x), values)
        rows.extend((x, y, int(flag)) for y, flag in zip(values, inside))
    _write_rows(path, GRID_COLUMNS, rows)
    sidecar = {"columns": list(GRID_COLUMNS), "rows": len(rows), "kind": region.kind}
    if metadata:
        sidecar["context"] = _jsonable(metadata)
    Path(str(path) + ".meta.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return path
