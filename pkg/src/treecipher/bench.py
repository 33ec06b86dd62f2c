"""Timing grid over random tree pairs."""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass

import numpy as np

from .solver import is_ciphering_isomorphic
from .synthgen import GenerationFailure, GenSpec, gen_pair, instance_seed, n_labels

__all__ = ["BenchRow", "BENCH_HEADER", "parse_range", "bench_rows", "summarize", "worker_count"]

BENCH_HEADER = ["n", "p", "rep", "pair_kind", "verdict", "states_visited", "deduction_N_final", "wall_time_ns"]
OUTLIER_FACTOR = 50
MAX_RESAMPLES = 20


@dataclass(frozen=True)
class BenchRow:
    n: int
    p: float
    rep: int
    pair_kind: str
    verdict: str
    states_visited: int
    deduction_N_final: int | str
    wall_time_ns: int

    def as_list(self) -> list:
        return list(astuple(self))


def parse_range(text: str, kind=float) -> list:
    """``start:stop:step`` with ``stop`` included, or a comma list, or one value."""
    if ":" not in text:
        return [kind(x) for x in text.split(",") if x.strip()]
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"range must be start:stop:step, got {text!r}")
    start, stop, step = (float(x) for x in parts)
    if step <= 0:
        raise ValueError("range step must be positive")
    count = math.floor((stop - start) / step + 1e-9) + 1
    values = [round(start + i * step, 10) for i in range(max(count, 0))]
    return [kind(v) for v in values]


def worker_count() -> int:
    raw = os.environ.get("TREECIPHER_THREADS", "0").strip() or "0"
    k = int(raw)
    if k < 0:
        raise ValueError("TREECIPHER_THREADS must be >= 0")
    return k if k > 0 else (os.cpu_count() or 1)


def _solve_one(task: tuple) -> BenchRow:
    n, p, p_index, rep, seed, pair_kind, step_limit = task
    if pair_kind == "noniso" and not 1 < n_labels(n, p) < n:
        return BenchRow(n, p, rep, pair_kind, "Skipped", 0, "", 0)
    for attempt in range(MAX_RESAMPLES):
        spec = GenSpec(n, p, instance_seed(seed, n, p_index, rep, attempt), pair_kind)
        try:
            t1, t2 = gen_pair(spec)
            break
        except GenerationFailure:
            continue
    else:
        return BenchRow(n, p, rep, pair_kind, "GenerationFailure", 0, "", 0)
    start = time.perf_counter_ns()
    res = is_ciphering_isomorphic(t1, t2, step_limit=step_limit)
    elapsed = time.perf_counter_ns() - start
    n_final = res.trace.n_after_deductions
    return BenchRow(
        n, p, rep, pair_kind, res.verdict.value, res.trace.states_visited,
        "" if n_final is None else n_final, elapsed,
    )


def bench_rows(
    sizes: list[int],
    props: list[float],
    reps: int,
    seed: int,
    pair_kind: str = "iso",
    step_limit: int | None = None,
    workers: int = 1,
):
    """Yield one :class:`BenchRow` per pair, in (n, p, rep) order whatever the worker count."""
    if pair_kind not in ("iso", "noniso"):
        raise ValueError("pair_kind must be iso or noniso")
    tasks = [
        (n, p, j, rep, seed, pair_kind, step_limit)
        for n in sizes
        for j, p in enumerate(props)
        for rep in range(reps)
    ]
    if workers <= 1 or len(tasks) < 2:
        yield from map(_solve_one, tasks)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_solve_one, tasks, chunksize=max(1, len(tasks) // (8 * workers)))


def summarize(rows: list[BenchRow]) -> list[dict]:
    """Per (n, p): 5th/50th/95th percentiles of wall time and the share of outliers."""
    groups: dict[tuple, list[BenchRow]] = {}
    for r in rows:
        if r.verdict in ("Skipped", "GenerationFailure"):
            continue
        groups.setdefault((r.n, r.p), []).append(r)
    out = []
    for (n, p), rs in groups.items():
        times = np.array([r.wall_time_ns for r in rs], dtype=float)
        q05, q50, q95 = np.quantile(times, [0.05, 0.5, 0.95])
        verdicts: dict[str, int] = {}
        for r in rs:
            verdicts[r.verdict] = verdicts.get(r.verdict, 0) + 1
        out.append({
            "n": n,
            "p": p,
            "count": len(rs),
            "q05_ns": float(q05),
            "q50_ns": float(q50),
            "q95_ns": float(q95),
            "outlier_fraction": float(np.mean(times > OUTLIER_FACTOR * q50)),
            "median_states": float(np.median([r.states_visited for r in rs])),
            "verdicts": verdicts,
        })
    return out
