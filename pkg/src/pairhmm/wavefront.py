"""Lane-tiled, linear-space engine for the forward recursion.

Geometry: a group of p lanes sweeps the haplotype one row per step.  Lane t
owns read positions t*k+1 .. (t+1)*k of the N-padded read and, at step s,
holds row j = s - t.  A full pass takes n + p steps (pipeline fill and
drain included).  Per lane the engine keeps:

  * k-vectors of the current and previous row's M/I/D values,
  * boundary values carried from the left neighbour's rightmost column for
    the previous and current rows (the lane-shift), and
  * the haplotype character for its row; one character enters at lane 0
    each step and shifts down the lane vector.

Lane 0's left neighbour is the matrix boundary: M = I = 0, D = S/n at
every row.  The lane owning the true last read position m accumulates
M(m,j) + I(m,j) in j-increasing order, so the result is bit-identical to
the row-major reference oracle whenever both run in the same precision.

Lanes outside the active window are masked through the store threshold:
every cell value is stored through "v if v >= threshold else 0", where the
threshold is the flush-to-zero limit for live lanes and +inf for idle
ones.  Masked lanes therefore hold exact zeros, which doubles as the
row-0 boundary for lanes that have not started yet.

One kernel call scores a whole group of read/haplotype pairs that share a
lane configuration.  The group is the kernel's SIMD axis: lane-local
vectors widen to the fused index x = lane * P + pair, state arrays are
laid out [column, x], and per-read tables are broadcast across each
read's slots, so the hot loops are long, contiguous, dependency-free runs
the compiler vectorizes well.  Pairs differ freely in read and haplotype
length; each activates and drains its lanes on its own schedule, and every
pair's cell values and accumulation order are identical to a single-pair
run because idle stores are exact zeros and masked accumulator updates
are skipped outright.  Emission values come exclusively from the five
staged table rows, picked per cell by haplotype character code.  The step
body is written out twice (even/odd roles of the two scratch buffer sets)
instead of swapping buffer pointers; like the flat layout, that keeps
alias analysis trivial for the vectorizer.

The three step bodies in _kernel must stay textually identical up to the
A_*/B_* buffer roles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import groupby

import numpy as np
from numba import njit

from .errors import ConfigTooSmallError, NumericOverflowError, PairHmmError
from .model import Batch, EngineConfig, Haplotype, ReadRecord, Score
from .prob import LOG10_2, build_emission_table, build_transitions, flush_threshold

# pairs per kernel call are capped so the fused lane*pair axis stays near
# this width; wider adds cache pressure, narrower wastes vector lanes
_FUSED_WIDTH_TARGET = 384


@njit(nogil=True, cache=True)
def _kernel(hap_codes, hap_offsets, e0, e1, e2, e3, e4,
            alpha_x, beta_x, delta_x, epsilon_x, zeta_x,
            m_arr, lanes, flush, inactive, boundaries, acc_out, steps_out):
    k = alpha_x.shape[0]
    X = alpha_x.shape[1]
    p = lanes
    P = X // p
    zero = flush - flush
    A_m = np.zeros((k, X), type(flush))
    A_i = np.zeros((k, X), type(flush))
    A_d = np.zeros((k, X), type(flush))
    B_m = np.zeros((k, X), type(flush))
    B_i = np.zeros((k, X), type(flush))
    B_d = np.zeros((k, X), type(flush))
    nbr_cur_m = np.zeros(X, type(flush))
    nbr_cur_i = np.zeros(X, type(flush))
    nbr_cur_d = np.zeros(X, type(flush))
    nbr_diag_m = np.zeros(X, type(flush))
    nbr_diag_i = np.zeros(X, type(flush))
    nbr_diag_d = np.zeros(X, type(flush))
    code_x = np.full(X, 4, np.int8)
    act = np.full(X, inactive, type(flush))
    n_arr = np.empty(P, np.int64)
    t_m = np.empty(P, np.int64)
    c_m = np.empty(P, np.int64)
    max_n = 0
    for q in range(P):
        n_arr[q] = hap_offsets[q + 1] - hap_offsets[q]
        if n_arr[q] > max_n:
            max_n = n_arr[q]
        nbr_cur_d[q] = boundaries[q]       # lane-0 boundary injection
        nbr_diag_d[q] = boundaries[q]
        t_m[q] = (m_arr[q] - 1) // k
        c_m[q] = (m_arr[q] - 1) % k
        acc_out[q] = zero
    total = max_n + p
    steps = 0
    s = 1
    while s + 1 <= total:
        # ---- odd step: previous row in A, current row written to B ----
        if s <= p:
            base = (s - 1) * P
            for q in range(P):
                act[base + q] = flush
        for q in range(P):
            ti = s - n_arr[q] - 1
            if 0 <= ti < p:
                act[ti * P + q] = inactive
        for t in range(p - 1, 0, -1):
            bt = t * P
            for q in range(P):
                code_x[bt + q] = code_x[bt - P + q]
        for q in range(P):
            if s <= n_arr[q]:
                code_x[q] = hap_codes[hap_offsets[q] + s - 1]
            else:
                code_x[q] = 4
        for x in range(X):
            ch = code_x[x]
            lam = e0[0, x]
            if ch == 1:
                lam = e1[0, x]
            elif ch == 2:
                lam = e2[0, x]
            elif ch == 3:
                lam = e3[0, x]
            elif ch == 4:
                lam = e4[0, x]
            mv = lam * (alpha_x[0, x] * nbr_diag_m[x] + beta_x[0, x] * (nbr_diag_i[x] + nbr_diag_d[x]))
            iv = delta_x[0, x] * nbr_cur_m[x] + epsilon_x[0, x] * nbr_cur_i[x]
            dv = zeta_x[0, x] * A_m[0, x] + epsilon_x[0, x] * A_d[0, x]
            thr = act[x]
            B_m[0, x] = mv if mv >= thr else zero
            B_i[0, x] = iv if iv >= thr else zero
            B_d[0, x] = dv if dv >= thr else zero
        for c in range(1, k):
            for x in range(X):
                ch = code_x[x]
                lam = e0[c, x]
                if ch == 1:
                    lam = e1[c, x]
                elif ch == 2:
                    lam = e2[c, x]
                elif ch == 3:
                    lam = e3[c, x]
                elif ch == 4:
                    lam = e4[c, x]
                mv = lam * (alpha_x[c, x] * A_m[c - 1, x] + beta_x[c, x] * (A_i[c - 1, x] + A_d[c - 1, x]))
                iv = delta_x[c, x] * B_m[c - 1, x] + epsilon_x[c, x] * B_i[c - 1, x]
                dv = zeta_x[c, x] * A_m[c, x] + epsilon_x[c, x] * A_d[c, x]
                thr = act[x]
                B_m[c, x] = mv if mv >= thr else zero
                B_i[c, x] = iv if iv >= thr else zero
                B_d[c, x] = dv if dv >= thr else zero
        for q in range(P):
            row = s - t_m[q]
            if 1 <= row <= n_arr[q]:
                x = t_m[q] * P + q
                acc_out[q] = acc_out[q] + (B_m[c_m[q], x] + B_i[c_m[q], x])
        for t in range(p - 1, 0, -1):
            bt = t * P
            for q in range(P):
                nbr_diag_m[bt + q] = nbr_cur_m[bt + q]
                nbr_diag_i[bt + q] = nbr_cur_i[bt + q]
                nbr_diag_d[bt + q] = nbr_cur_d[bt + q]
                nbr_cur_m[bt + q] = B_m[k - 1, bt - P + q]
                nbr_cur_i[bt + q] = B_i[k - 1, bt - P + q]
                nbr_cur_d[bt + q] = B_d[k - 1, bt - P + q]
        steps += 1
        s += 1
        # ---- even step: previous row in B, current row written to A ----
        if s <= p:
            base = (s - 1) * P
            for q in range(P):
                act[base + q] = flush
        for q in range(P):
            ti = s - n_arr[q] - 1
            if 0 <= ti < p:
                act[ti * P + q] = inactive
        for t in range(p - 1, 0, -1):
            bt = t * P
            for q in range(P):
                code_x[bt + q] = code_x[bt - P + q]
        for q in range(P):
            if s <= n_arr[q]:
                code_x[q] = hap_codes[hap_offsets[q] + s - 1]
            else:
                code_x[q] = 4
        for x in range(X):
            ch = code_x[x]
            lam = e0[0, x]
            if ch == 1:
                lam = e1[0, x]
            elif ch == 2:
                lam = e2[0, x]
            elif ch == 3:
                lam = e3[0, x]
            elif ch == 4:
                lam = e4[0, x]
            mv = lam * (alpha_x[0, x] * nbr_diag_m[x] + beta_x[0, x] * (nbr_diag_i[x] + nbr_diag_d[x]))
            iv = delta_x[0, x] * nbr_cur_m[x] + epsilon_x[0, x] * nbr_cur_i[x]
            dv = zeta_x[0, x] * B_m[0, x] + epsilon_x[0, x] * B_d[0, x]
            thr = act[x]
            A_m[0, x] = mv if mv >= thr else zero
            A_i[0, x] = iv if iv >= thr else zero
            A_d[0, x] = dv if dv >= thr else zero
        for c in range(1, k):
            for x in range(X):
                ch = code_x[x]
                lam = e0[c, x]
                if ch == 1:
                    lam = e1[c, x]
                elif ch == 2:
                    lam = e2[c, x]
                elif ch == 3:
                    lam = e3[c, x]
                elif ch == 4:
                    lam = e4[c, x]
                mv = lam * (alpha_x[c, x] * B_m[c - 1, x] + beta_x[c, x] * (B_i[c - 1, x] + B_d[c - 1, x]))
                iv = delta_x[c, x] * A_m[c - 1, x] + epsilon_x[c, x] * A_i[c - 1, x]
                dv = zeta_x[c, x] * B_m[c, x] + epsilon_x[c, x] * B_d[c, x]
                thr = act[x]
                A_m[c, x] = mv if mv >= thr else zero
                A_i[c, x] = iv if iv >= thr else zero
                A_d[c, x] = dv if dv >= thr else zero
        for q in range(P):
            row = s - t_m[q]
            if 1 <= row <= n_arr[q]:
                x = t_m[q] * P + q
                acc_out[q] = acc_out[q] + (A_m[c_m[q], x] + A_i[c_m[q], x])
        for t in range(p - 1, 0, -1):
            bt = t * P
            for q in range(P):
                nbr_diag_m[bt + q] = nbr_cur_m[bt + q]
                nbr_diag_i[bt + q] = nbr_cur_i[bt + q]
                nbr_diag_d[bt + q] = nbr_cur_d[bt + q]
                nbr_cur_m[bt + q] = A_m[k - 1, bt - P + q]
                nbr_cur_i[bt + q] = A_i[k - 1, bt - P + q]
                nbr_cur_d[bt + q] = A_d[k - 1, bt - P + q]
        steps += 1
        s += 1
    if s <= total:
        # ---- trailing odd step ----
        if s <= p:
            base = (s - 1) * P
            for q in range(P):
                act[base + q] = flush
        for q in range(P):
            ti = s - n_arr[q] - 1
            if 0 <= ti < p:
                act[ti * P + q] = inactive
        for t in range(p - 1, 0, -1):
            bt = t * P
            for q in range(P):
                code_x[bt + q] = code_x[bt - P + q]
        for q in range(P):
            if s <= n_arr[q]:
                code_x[q] = hap_codes[hap_offsets[q] + s - 1]
            else:
                code_x[q] = 4
        for x in range(X):
            ch = code_x[x]
            lam = e0[0, x]
            if ch == 1:
                lam = e1[0, x]
            elif ch == 2:
                lam = e2[0, x]
            elif ch == 3:
                lam = e3[0, x]
            elif ch == 4:
                lam = e4[0, x]
            mv = lam * (alpha_x[0, x] * nbr_diag_m[x] + beta_x[0, x] * (nbr_diag_i[x] + nbr_diag_d[x]))
            iv = delta_x[0, x] * nbr_cur_m[x] + epsilon_x[0, x] * nbr_cur_i[x]
            dv = zeta_x[0, x] * A_m[0, x] + epsilon_x[0, x] * A_d[0, x]
            thr = act[x]
            B_m[0, x] = mv if mv >= thr else zero
            B_i[0, x] = iv if iv >= thr else zero
            B_d[0, x] = dv if dv >= thr else zero
        for c in range(1, k):
            for x in range(X):
                ch = code_x[x]
                lam = e0[c, x]
                if ch == 1:
                    lam = e1[c, x]
                elif ch == 2:
                    lam = e2[c, x]
                elif ch == 3:
                    lam = e3[c, x]
                elif ch == 4:
                    lam = e4[c, x]
                mv = lam * (alpha_x[c, x] * A_m[c - 1, x] + beta_x[c, x] * (A_i[c - 1, x] + A_d[c - 1, x]))
                iv = delta_x[c, x] * B_m[c - 1, x] + epsilon_x[c, x] * B_i[c - 1, x]
                dv = zeta_x[c, x] * A_m[c, x] + epsilon_x[c, x] * A_d[c, x]
                thr = act[x]
                B_m[c, x] = mv if mv >= thr else zero
                B_i[c, x] = iv if iv >= thr else zero
                B_d[c, x] = dv if dv >= thr else zero
        for q in range(P):
            row = s - t_m[q]
            if 1 <= row <= n_arr[q]:
                x = t_m[q] * P + q
                acc_out[q] = acc_out[q] + (B_m[c_m[q], x] + B_i[c_m[q], x])
        for t in range(p - 1, 0, -1):
            bt = t * P
            for q in range(P):
                nbr_diag_m[bt + q] = nbr_cur_m[bt + q]
                nbr_diag_i[bt + q] = nbr_cur_i[bt + q]
                nbr_diag_d[bt + q] = nbr_cur_d[bt + q]
                nbr_cur_m[bt + q] = B_m[k - 1, bt - P + q]
                nbr_cur_i[bt + q] = B_i[k - 1, bt - P + q]
                nbr_cur_d[bt + q] = B_d[k - 1, bt - P + q]
        steps += 1
    for q in range(P):
        steps_out[q] = steps - max_n + n_arr[q]


@dataclass(frozen=True)
class StagedRead:
    """Per-read engine inputs staged into [column, lane] layout; built once
    per read and reused for every pair slot that read occupies."""

    emis_s: np.ndarray        # (5, k, p)
    alpha_s: np.ndarray       # (k, p) each
    beta_s: np.ndarray
    delta_s: np.ndarray
    epsilon_s: np.ndarray
    zeta_s: np.ndarray
    m: int


def stage_read(read: ReadRecord, cfg: EngineConfig) -> StagedRead:
    """Pad a read to p*k positions and lay its tables out lane-major.

    Padding positions get identity transitions (alpha = beta = 1, gaps 0)
    and unit emissions, so they propagate bounded values and never touch
    the accumulated score.
    """
    m = read.length
    if m > cfg.m_max:
        raise ConfigTooSmallError(
            "read length %d exceeds %d (p=%d, k=%d)" % (m, cfg.m_max, cfg.p, cfg.k))
    p, k, mp = cfg.p, cfg.k, cfg.m_max
    dtype = cfg.dtype

    table = build_emission_table(read, mp)
    emis_s = np.ascontiguousarray(
        table.values.reshape(5, p, k).transpose(0, 2, 1)).astype(dtype)

    trans = build_transitions(read)

    def lane_major(values, pad):
        padded = np.full(mp, pad)
        padded[:m] = values
        return np.ascontiguousarray(padded.reshape(p, k).T).astype(dtype)

    return StagedRead(
        emis_s,
        lane_major(trans.alpha, 1.0),
        lane_major(trans.beta, 1.0),
        lane_major(trans.delta, 0.0),
        lane_major(trans.epsilon, 0.0),
        lane_major(trans.zeta, 0.0),
        m,
    )


def group_capacity(p: int) -> int:
    """Pairs per kernel call for a p-lane configuration."""
    return max(1, _FUSED_WIDTH_TARGET // p)


def _score_slots(runs, haps, cfg: EngineConfig):
    """Score pair slots in one kernel call.

    ``runs`` is a list of (StagedRead, count) spans covering ``haps`` in
    order: consecutive slots sharing a read broadcast its staged tables.
    Returns linear accumulators and per-pair step counts.
    """
    dtype = cfg.dtype
    p, k = cfg.p, cfg.k
    P = len(haps)
    X = p * P

    ex = [np.empty((k, X), dtype) for _ in range(10)]
    views = [a.reshape(k, p, P) for a in ex]
    m_arr = np.empty(P, dtype=np.int64)
    q0 = 0
    for staged, count in runs:
        sl = slice(q0, q0 + count)
        for c in range(5):
            views[c][:, :, sl] = staged.emis_s[c][:, :, None]
        views[5][:, :, sl] = staged.alpha_s[:, :, None]
        views[6][:, :, sl] = staged.beta_s[:, :, None]
        views[7][:, :, sl] = staged.delta_s[:, :, None]
        views[8][:, :, sl] = staged.epsilon_s[:, :, None]
        views[9][:, :, sl] = staged.zeta_s[:, :, None]
        m_arr[sl] = staged.m
        q0 += count
    assert q0 == P

    offsets = np.zeros(P + 1, dtype=np.int64)
    np.cumsum([h.length for h in haps], out=offsets[1:])
    flat = np.concatenate([h.bases for h in haps]) if P > 1 else haps[0].bases
    scale = 2.0 ** cfg.scale_log2
    boundaries = np.array([scale / h.length for h in haps]).astype(dtype)
    accs = np.empty(P, dtype=dtype)
    steps = np.empty(P, dtype=np.int64)
    _kernel(flat, offsets, *ex, m_arr, p, flush_threshold(dtype),
            dtype(np.inf), boundaries, accs, steps)
    return accs, steps


def _run_group(staged: StagedRead, haps, cfg: EngineConfig):
    """Score one staged read against haplotypes, splitting into kernel
    calls of at most group_capacity(p) pairs."""
    accs = np.empty(len(haps), dtype=cfg.dtype)
    steps = np.empty(len(haps), dtype=np.int64)
    span = group_capacity(cfg.p)
    for start in range(0, len(haps), span):
        sub = haps[start:start + span]
        a, st = _score_slots([(staged, len(sub))], sub, cfg)
        accs[start:start + len(sub)] = a
        steps[start:start + len(sub)] = st
    return accs, steps


def _finish_value(acc, scale_log2: int) -> float:
    value = float(acc)
    if value <= 0.0 or not math.isfinite(value):
        raise NumericOverflowError(
            "accumulator %r out of range; retry in double precision or with "
            "a different scale" % value)
    return math.log10(value) - scale_log2 * LOG10_2


def _finish(acc, scale_log2: int) -> Score:
    return Score(_finish_value(acc, scale_log2))


def forward_wavefront(read: ReadRecord, hap: Haplotype, cfg: EngineConfig) -> Score:
    """Score one read/haplotype pair with the tiled engine."""
    acc, _ = _run_group(stage_read(read, cfg), [hap], cfg)
    return _finish(acc[0], cfg.scale_log2)


def forward_wavefront_counted(read: ReadRecord, hap: Haplotype, cfg: EngineConfig):
    """As forward_wavefront, also returning the executed step count."""
    acc, steps = _run_group(stage_read(read, cfg), [hap], cfg)
    return _finish(acc[0], cfg.scale_log2), int(steps[0])


def forward_wavefront_batch(batches, items, cfg: EngineConfig, out,
                            errors=None) -> list:
    """Score a list of work items, writing each result into out[global_id].

    Items sharing a read (consecutive in enumeration order) reuse one
    staged table set; consecutive read runs are packed together into fused
    kernel calls.  Failures never abort the rest of the batch; they are
    appended to ``errors`` as (global_id, kind) pairs and the corresponding
    output slot is left as NaN.
    """
    if errors is None:
        errors = []
    capacity = group_capacity(cfg.p)
    pending_runs = []          # (StagedRead, count)
    pending_items = []
    pending_haps = []

    def flush_pending():
        if not pending_items:
            return
        accs, _ = _score_slots(pending_runs, pending_haps, cfg)
        for item, acc in zip(pending_items, accs):
            try:
                out[item.global_id] = _finish_value(acc, cfg.scale_log2)
            except PairHmmError as exc:
                out[item.global_id] = np.nan
                errors.append((item.global_id, exc.kind))
        pending_runs.clear()
        pending_items.clear()
        pending_haps.clear()

    for (b, r), group in groupby(items, key=lambda w: (w.batch_index, w.read_index)):
        group = list(group)
        batch: Batch = batches[b]
        try:
            staged = stage_read(batch.reads[r], cfg)
        except PairHmmError as exc:
            for item in group:
                out[item.global_id] = np.nan
                errors.append((item.global_id, exc.kind))
            continue
        start = 0
        while start < len(group):
            room = capacity - len(pending_items)
            span = group[start:start + room]
            pending_runs.append((staged, len(span)))
            pending_items.extend(span)
            pending_haps.extend(batch.haps[item.hap_index] for item in span)
            start += len(span)
            if len(pending_items) >= capacity:
                flush_pending()
    flush_pending()
    return errors
