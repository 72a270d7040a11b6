import inspect
import math

import numpy as np
import pytest

import pairhmm.wavefront as wavefront_mod
from pairhmm import (EngineConfig, enumerate_work_items, forward_reference,
                     forward_wavefront, forward_wavefront_batch,
                     forward_wavefront_counted)
from pairhmm.errors import ConfigTooSmallError, NumericOverflowError
from pairhmm.model import Batch

from conftest import make_hap, make_read, random_pair

SOME_CONFIGS = [(2, 4), (4, 8), (8, 12), (16, 16), (32, 8)]


def test_hand_case_small_lane_group():
    read = make_read("A", base_q=10, ins_q=40, del_q=40, gcp_q=10)
    score = forward_wavefront(read, make_hap("A"), EngineConfig(2, 4, "f64"))
    assert score.log10_likelihood == pytest.approx(-0.0915149811213503, abs=1e-9)


def test_double_precision_matches_reference_bitwise(rng):
    for _ in range(120):
        n = int(rng.integers(1, 160))
        m = int(rng.integers(1, n + 1))
        read, hap = random_pair(rng, m, n)
        expected = forward_reference(read, hap).log10_likelihood
        for p, k in SOME_CONFIGS:
            if p * k < m:
                continue
            got = forward_wavefront(read, hap, EngineConfig(p, k, "f64"))
            assert got.log10_likelihood == expected


def test_single_precision_close_to_reference(rng):
    worst = 0.0
    for _ in range(60):
        n = int(rng.integers(1, 700))
        m = int(rng.integers(1, n + 1))
        read, hap = random_pair(rng, m, n, base_q=(15, 41))
        expected = forward_reference(read, hap).log10_likelihood
        got = forward_wavefront(read, hap, EngineConfig(32, 32, "f32"))
        worst = max(worst, abs(got.log10_likelihood - expected))
    assert worst <= 1e-3


def test_step_count_is_rows_plus_lanes(rng):
    for m, n, p, k in [(1, 1, 2, 4), (5, 200, 4, 8), (60, 3, 32, 8),
                       (256, 64, 32, 8), (17, 17, 4, 8)]:
        read, hap = random_pair(rng, m, n)
        _, steps = forward_wavefront_counted(read, hap, EngineConfig(p, k, "f64"))
        assert steps == n + p


def test_padding_and_tiling_invariance(rng):
    # growing the padded capacity or re-tiling never changes the score bits
    for precision in ("f32", "f64"):
        for _ in range(25):
            n = int(rng.integers(1, 100))
            m = int(rng.integers(1, min(n, 64) + 1))
            read, hap = random_pair(rng, m, n)
            values = set()
            for p, k in [(2, 4), (4, 8), (8, 8), (16, 16), (32, 32)]:
                if p * k < m:
                    continue
                cfg = EngineConfig(p, k, precision)
                values.add(forward_wavefront(read, hap, cfg).log10_likelihood)
            assert len(values) == 1


def test_config_too_small():
    read = make_read("ACGTACGTACGT")
    with pytest.raises(ConfigTooSmallError):
        forward_wavefront(read, make_hap("ACGT"), EngineConfig(2, 4))


def test_kernel_consumes_only_staged_tables():
    # the hot path must not see read bases or qualities; emissions come
    # exclusively from the five staged table rows
    params = list(inspect.signature(wavefront_mod._kernel.py_func).parameters)
    assert params == ["hap_codes", "hap_offsets", "e0", "e1", "e2", "e3", "e4",
                      "alpha_x", "beta_x", "delta_x", "epsilon_x", "zeta_x",
                      "m_arr", "lanes", "flush", "inactive", "boundaries",
                      "acc_out", "steps_out"]


def test_f32_underflow_suggests_double(rng):
    # healthy in double precision, below the representable single floor
    n = 700
    read, hap = random_pair(rng, n, n, mutation_rate=0.10, base_q=(10, 11))
    ref = forward_reference(read, hap).log10_likelihood
    assert ref < -70
    with pytest.raises(NumericOverflowError, match="double precision"):
        forward_wavefront(read, hap, EngineConfig(32, 32, "f32"))


def _cross_batch(rng, num_reads=3, num_haps=2, read_len=24, hap_len=40):
    reads = tuple(random_pair(rng, read_len, hap_len)[0] for _ in range(num_reads))
    haps = tuple(random_pair(rng, read_len, hap_len)[1] for _ in range(num_haps))
    return Batch(reads, haps)


def test_batch_matches_per_item_calls(rng):
    batches = [_cross_batch(rng)]
    items = enumerate_work_items(batches)
    out = np.full(len(items), np.nan)
    errors = forward_wavefront_batch(batches, items, EngineConfig(4, 8, "f64"), out)
    assert errors == []
    for item in items:
        single = forward_wavefront(batches[0].reads[item.read_index],
                                   batches[0].haps[item.hap_index],
                                   EngineConfig(4, 8, "f64"))
        assert out[item.global_id] == single.log10_likelihood


def test_batch_is_order_independent(rng):
    batches = [_cross_batch(rng)]
    items = enumerate_work_items(batches)
    cfg = EngineConfig(4, 8, "f64")
    out_a = np.full(len(items), np.nan)
    forward_wavefront_batch(batches, items, cfg, out_a)
    shuffled = [items[i] for i in np.random.default_rng(5).permutation(len(items))]
    out_b = np.full(len(items), np.nan)
    forward_wavefront_batch(batches, shuffled, cfg, out_b)
    assert np.array_equal(out_a, out_b)


def test_batch_isolates_failing_items(rng):
    good, hap = random_pair(rng, 20, 40)
    too_long, _ = random_pair(rng, 60, 70)
    batches = [Batch((good, too_long), (hap,))]
    items = enumerate_work_items(batches)
    out = np.full(len(items), np.nan)
    errors = forward_wavefront_batch(batches, items, EngineConfig(4, 8, "f64"), out)
    assert errors == [(1, "config-too-small")]
    assert math.isfinite(out[0]) and math.isnan(out[1])


def test_batch_isolates_numeric_failures(rng):
    good, hap = random_pair(rng, 30, 700)
    bad_bases, _ = random_pair(rng, 700, 700, mutation_rate=0.10, base_q=(10, 11))
    batches = [Batch((good, bad_bases), (hap,))]
    items = enumerate_work_items(batches)
    out = np.full(len(items), np.nan)
    errors = forward_wavefront_batch(batches, items, EngineConfig(32, 32, "f32"), out)
    assert errors == [(1, "numeric-overflow")]
    assert math.isfinite(out[0]) and math.isnan(out[1])


def test_batch_builds_one_table_per_read(rng, monkeypatch):
    calls = []
    original = wavefront_mod.build_emission_table

    def counting(read, m_padded):
        calls.append(id(read))
        return original(read, m_padded)

    monkeypatch.setattr(wavefront_mod, "build_emission_table", counting)
    read, _ = random_pair(rng, 16, 30)
    haps = tuple(random_pair(rng, 16, 30)[1] for _ in range(5))
    batches = [Batch((read,), haps)]
    items = enumerate_work_items(batches)
    out = np.full(len(items), np.nan)
    forward_wavefront_batch(batches, items, EngineConfig(4, 8, "f64"), out)
    assert len(calls) == 1
