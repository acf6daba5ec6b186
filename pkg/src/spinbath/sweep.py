"""Deterministic parallel grid sweeps with CSV output and run manifests.

Grid points are indexed row-major over (t_M, t_I); every Monte Carlo stream
is seeded from (seed, grid index, sample index), so the CSV body is
byte-identical for a given (config, seed) at any thread count. Workers
consume points (or contiguous blocks, for the vectorised uniaxial model)
from the deterministic index sequence; the single-threaded writer emits
rows in index order.
"""
from __future__ import annotations

import datetime as _dt
import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .kernels import backend as kernel_backend
from .oracles import protocol_oracle
from .results import CorrelationResult
from .semiclassical import correlation_semiclassical
from .uniaxial import correlation_uniaxial_grid

__all__ = ["SweepOutput", "run_sweep", "format_rows", "CSV_HEADER"]

CSV_HEADER = "t_M_s,t_I_s,C,stderr,n_samples"

# fraction of degenerate Monte Carlo samples that fails the whole run
_RUN_DEGENERATE_BUDGET = 0.01


@dataclass(frozen=True)
class SweepOutput:
    csv_path: Path
    manifest_path: Path
    rows: tuple[CorrelationResult, ...]
    wall_time_s: float
    degenerate_samples: int
    total_samples: int


def _f(x: float) -> str:
    """17 significant digits: round-trips float64 exactly."""
    return f"{x:.17g}"


def format_rows(rows) -> str:
    """CSV body (header + rows, newline-terminated)."""
    lines = [CSV_HEADER]
    lines.extend(
        f"{_f(r.t_M)},{_f(r.t_I)},{_f(r.C)},{_f(r.stderr)},{r.n_samples}"
        for r in rows)
    return "\n".join(lines) + "\n"


def _grid_pairs(config: RunConfig):
    tM = config.t_M.values()
    tI = config.t_I.values()
    mm, ii = np.meshgrid(tM, tI, indexing="ij")
    return mm.ravel(), ii.ravel()


def _evaluate_uniaxial(config: RunConfig, threads: int):
    tM, tI = _grid_pairs(config)
    clusters = config.uniaxial_clusters()
    p = config.physics["polarization_p"]
    symmetric = config.physics["symmetric_dots"]
    n = len(tM)
    blocks = [(i, min(i + 256, n)) for i in range(0, n, 256)]

    def run_block(block):
        lo, hi = block
        return correlation_uniaxial_grid(clusters, tM[lo:hi], tI[lo:hi],
                                         p=p, symmetric_dots=symmetric)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(run_block, blocks))
    C = np.concatenate(parts) if parts else np.array([])
    return [CorrelationResult(t_M=float(a), t_I=float(b), C=float(c),
                              stderr=0.0, n_samples=1)
            for a, b, c in zip(tM, tI, C)]


def _evaluate_semiclassical(config: RunConfig, threads: int):
    tM, tI = _grid_pairs(config)
    components = config.semiclassical_components()

    def run_point(index: int):
        point = config.semiclassical_point(components, float(tM[index]),
                                           float(tI[index]))
        return correlation_semiclassical(point, grid_index=index)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run_point, range(len(tM))))


def _evaluate_oracle(config: RunConfig, threads: int):
    tM, tI = _grid_pairs(config)
    bath = config.oracle_bath()

    def run_point(index: int):
        res = protocol_oracle(bath, float(tM[index]), float(tI[index]),
                              seed=config.seed)
        return CorrelationResult(t_M=float(tM[index]), t_I=float(tI[index]),
                                 C=res.C_exact, stderr=res.stderr_exact,
                                 n_samples=res.n_states)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run_point, range(len(tM))))


_EVALUATORS = {
    "uniaxial": _evaluate_uniaxial,
    "semiclassical": _evaluate_semiclassical,
    "oracle": _evaluate_oracle,
}


def run_sweep(config: RunConfig, out_dir, *, name: str = "sweep") -> SweepOutput:
    """Evaluate the configured model on the full grid and write CSV + manifest.

    The manifest restates the fully resolved configuration (defaults
    included), the software version, kernel backend, wall time and
    degenerate-sample counters; rerunning from the manifest alone reproduces
    the CSV byte for byte.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    start = time.perf_counter()
    rows = _EVALUATORS[config.kind](config, config.threads)
    wall = time.perf_counter() - start

    degenerate = sum(r.n_degenerate for r in rows)
    total = sum(r.n_samples + r.n_degenerate for r in rows)
    if total and degenerate > _RUN_DEGENERATE_BUDGET * total:
        raise RuntimeError(
            f"{degenerate}/{total} Monte Carlo samples were degenerate, "
            f"over the {_RUN_DEGENERATE_BUDGET:.0%} budget")

    body = format_rows(rows)
    csv_path = out_dir / f"{name}.csv"
    csv_path.write_text(body, newline="")

    manifest = {
        "spinbath_version": __version__,
        "kernel_backend": kernel_backend(),
        "model": config.kind,
        "config": config.resolved,
        "seed": config.seed,
        "threads": config.threads,
        "grid_points": len(rows),
        "total_samples": total,
        "degenerate_samples": degenerate,
        "wall_time_s": wall,
        "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "csv": csv_path.name,
        "csv_sha256": hashlib.sha256(body.encode()).hexdigest(),
    }
    manifest_path = out_dir / f"{name}.manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")

    return SweepOutput(csv_path=csv_path, manifest_path=manifest_path,
                       rows=tuple(rows), wall_time_s=wall,
                       degenerate_samples=degenerate, total_samples=total)
