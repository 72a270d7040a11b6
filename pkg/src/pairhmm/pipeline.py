"""Chunked, multi-worker orchestration with deterministic score collection.

Work items are enumerated, bound to lane configurations, cut into
memory-bounded chunks, and executed on a thread pool (the engine kernels
release the GIL).  Chunks run in order; while one chunk computes, the next
chunk's task groups are prepared.  Items inside a chunk may finish in any
order but every score lands in the slot of its global_id, so output is
independent of the worker count, the chunk budget, and scheduling.
"""
from __future__ import annotations

import time
from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import groupby

import numpy as np

from .errors import InvalidMeasurementError
from .model import default_configs, enumerate_work_items
from .partition import DEFAULT_BUDGET_BYTES, _assign, _cut_chunks
from .wavefront import forward_wavefront_batch, group_capacity

# error kinds raised before any cell is computed; their items do not count
# toward throughput
_NOT_EXECUTED = ("config-too-small", "degenerate-transition", "data")


def throughput(total_cells: int, wall_seconds: float) -> float:
    """Giga cell updates per second: cells / (seconds * 1e9)."""
    if wall_seconds <= 0.0:
        raise InvalidMeasurementError("non-positive runtime %r" % wall_seconds)
    return total_cells / (wall_seconds * 1.0e9)


@dataclass(frozen=True)
class ConfigStats:
    cells: int
    seconds: float            # summed task time; exceeds wall when concurrent


@dataclass(frozen=True)
class RunReport:
    total_cells: int          # sum of true m*n over executed items
    wall_seconds: float
    gcups: float
    per_config: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)


def _chunk_tasks(chunk, items, by_config):
    """(config, item window) tasks for one chunk.

    Windows pack consecutive same-read runs up to roughly one fused kernel
    call, so a task is big enough to amortize dispatch but small enough
    that a pool keeps every worker busy."""
    tasks = []
    for cfg, ids in by_config.items():
        lo = bisect_left(ids, chunk.start)
        hi = bisect_left(ids, chunk.stop)
        if lo == hi:
            continue
        sub = [items[g] for g in ids[lo:hi]]
        target = group_capacity(cfg.p)
        window = []
        for _, group in groupby(sub, key=lambda w: (w.batch_index, w.read_index)):
            window.extend(group)
            if len(window) >= target:
                tasks.append((cfg, window))
                window = []
        if window:
            tasks.append((cfg, window))
    return tasks


def run(batches, configs=None, budget_bytes: int = DEFAULT_BUDGET_BYTES,
        workers: int = 1):
    """Score every work item of ``batches``.

    Returns (scores, report): a float64 array of log10 likelihoods in
    global_id order (NaN where an item failed) and the run report.  Errors
    are per item and never abort the rest of the run.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if configs is None:
        configs = default_configs()

    items = enumerate_work_items(batches)
    scores = np.full(len(items), np.nan)
    errors = []

    by_config, unassignable = _assign(batches, items, configs)
    for item in unassignable:
        errors.append((item.global_id, "config-too-small"))
    chunks = _cut_chunks(batches, items, by_config, budget_bytes)

    def run_task(cfg, group):
        t0 = time.perf_counter()
        errs = forward_wavefront_batch(batches, group, cfg, scores)
        elapsed = time.perf_counter() - t0
        skipped = {gid for gid, kind in errs if kind in _NOT_EXECUTED}
        cells = 0
        for item in group:
            if item.global_id in skipped:
                continue
            batch = batches[item.batch_index]
            cells += (batch.reads[item.read_index].length
                      * batch.haps[item.hap_index].length)
        return cfg, cells, elapsed, errs

    total_cells = 0
    per_config = {}
    t_start = time.perf_counter()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        pending = _chunk_tasks(chunks[0], items, by_config) if chunks else []
        index = 0
        while index < len(chunks):
            futures = [pool.submit(run_task, cfg, group) for cfg, group in pending]
            # stage the next chunk while this one computes
            if index + 1 < len(chunks):
                pending = _chunk_tasks(chunks[index + 1], items, by_config)
            else:
                pending = []
            for fut in futures:
                cfg, cells, elapsed, errs = fut.result()
                total_cells += cells
                prev = per_config.get(cfg.geometry)
                if prev is None:
                    per_config[cfg.geometry] = ConfigStats(cells, elapsed)
                else:
                    per_config[cfg.geometry] = ConfigStats(
                        prev.cells + cells, prev.seconds + elapsed)
                errors.extend(errs)
            index += 1
    wall = time.perf_counter() - t_start

    errors.sort(key=lambda e: e[0])
    report = RunReport(total_cells, wall, throughput(total_cells, wall),
                       per_config, errors)
    return scores, report
