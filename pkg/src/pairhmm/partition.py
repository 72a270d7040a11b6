"""Read-length binning and memory-bounded chunking.

Every read is bound to the registered lane configuration with the smallest
padded capacity p*k that still holds it, giving one index list of work-item
ids per configuration.  Work items are then cut into contiguous global-id
chunks whose estimated in-flight footprint fits a byte budget.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, ConfigTooSmallError
from .model import EngineConfig, enumerate_work_items

DEFAULT_BUDGET_BYTES = 512 * 1024 * 1024


def select_config(m: int, configs) -> EngineConfig:
    """Smallest configuration with p*k >= m; ties broken by fewer lanes.

    Fewer lanes win ties because the engine's vector width comes from the
    fused lane*haplotype axis either way, while every extra lane adds a
    pipeline fill/drain step and lane-shift traffic (measured ~35% faster
    at capacity 256 with 8 lanes than with 32).
    """
    best = None
    for cfg in configs:
        if cfg.m_max < m:
            continue
        if best is None or (cfg.m_max, cfg.p) < (best.m_max, best.p):
            best = cfg
    if best is None:
        raise ConfigTooSmallError(
            "no registered configuration holds a read of length %d" % m)
    return best


def estimate_item_bytes(read_len: int, hap_len: int, cfg: EngineConfig) -> int:
    """Approximate bytes a work item keeps live: padded read, quality
    tracks, haplotype, staged emission and transition tables, score slot."""
    real = np.dtype(cfg.dtype).itemsize
    return (cfg.m_max + 4 * read_len + hap_len
            + 5 * cfg.m_max * real + 5 * cfg.m_max * real + 8)


@dataclass(frozen=True)
class Chunk:
    start: int            # first global_id in the chunk
    stop: int             # one past the last
    bytes_estimate: int


@dataclass(frozen=True)
class PartitionPlan:
    items: tuple                  # all work items, global_id order
    by_config: dict               # EngineConfig -> list of global_ids
    chunks: tuple                 # Chunk ranges covering all ids in order


def _assign(batches, items, configs):
    """Map each work item to its configuration.

    Returns (config -> [global_id]) plus the items no configuration can
    hold, so callers choose between failing fast and recording per-item
    errors.
    """
    by_config = {cfg: [] for cfg in configs}
    unassignable = []
    cache = {}
    for item in items:
        m = batches[item.batch_index].reads[item.read_index].length
        cfg = cache.get(m)
        if cfg is None and m not in cache:
            try:
                cfg = select_config(m, configs)
            except ConfigTooSmallError:
                cfg = None
            cache[m] = cfg
        if cfg is None:
            unassignable.append(item)
        else:
            by_config[cfg].append(item.global_id)
    return by_config, unassignable


def _cut_chunks(batches, items, by_config, budget_bytes):
    cfg_of = {}
    for cfg, ids in by_config.items():
        for gid in ids:
            cfg_of[gid] = cfg
    chunks = []
    start = None
    acc = 0
    last = None
    for item in items:
        gid = item.global_id
        cfg = cfg_of.get(gid)
        if cfg is None:
            continue
        batch = batches[item.batch_index]
        est = estimate_item_bytes(batch.reads[item.read_index].length,
                                  batch.haps[item.hap_index].length, cfg)
        if est > budget_bytes:
            raise BudgetError(
                "work item %d alone needs ~%d bytes, over the %d-byte budget"
                % (gid, est, budget_bytes))
        if start is None:
            start, acc = gid, est
        elif acc + est > budget_bytes:
            chunks.append(Chunk(start, last + 1, acc))
            start, acc = gid, est
        else:
            acc += est
        last = gid
    if start is not None:
        chunks.append(Chunk(start, last + 1, acc))
    return tuple(chunks)


def build_plan(batches, configs, budget_bytes: int = DEFAULT_BUDGET_BYTES) -> PartitionPlan:
    """Assign every work item to a configuration and cut chunk boundaries.

    Raises config-too-small naming the first read no configuration holds;
    use the pipeline for per-item error recording instead of a hard stop.
    """
    if not configs:
        raise ConfigTooSmallError("no configurations registered")
    items = enumerate_work_items(batches)
    by_config, unassignable = _assign(batches, items, configs)
    if unassignable:
        item = unassignable[0]
        m = batches[item.batch_index].reads[item.read_index].length
        raise ConfigTooSmallError(
            "read %d of batch %d (length %d) exceeds every registered "
            "configuration" % (item.read_index, item.batch_index, m))
    chunks = _cut_chunks(batches, items, by_config, budget_bytes)
    return PartitionPlan(tuple(items), by_config, chunks)
