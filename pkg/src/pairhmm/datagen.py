"""Synthetic dataset generation.

Two flavours:

* ``independent`` draws every read and haplotype base uniformly over
  {A,C,G,T}.  This matches the plain synthetic-batch contract but long
  independent pairs score astronomically low and can underflow even double
  precision, so it suits format/round-trip work and short sequences.
* ``derived`` builds each batch like a variant-calling locus: all of the
  batch's haplotypes are lightly mutated prefixes of one shared sequence
  and every read is a mutated substring of it, so the whole read x hap
  cross product aligns and scores stay inside floating-point range at any
  length.

Everything is deterministic for a given seed.
"""
from __future__ import annotations

import numpy as np

from .errors import DataError
from .model import Batch, Haplotype, ReadRecord

DEFAULT_BASE_QUAL = (10, 40)
DEFAULT_INDEL_QUAL = (30, 45)
DEFAULT_GCP_QUAL = 10
DEFAULT_MUTATION_RATE = 0.01


def _length_sampler(spec, what):
    """A length spec is either a fixed int or an inclusive (min, max) range."""
    if isinstance(spec, int):
        if spec < 1:
            raise DataError("%s length must be >= 1, got %d" % (what, spec))
        return lambda rng: spec
    try:
        lo, hi = int(spec[0]), int(spec[1])
    except (TypeError, ValueError, IndexError):
        raise DataError("%s length spec %r is neither an int nor (min, max)"
                        % (what, spec)) from None
    if not 1 <= lo <= hi:
        raise DataError("%s length range (%d, %d) is invalid" % (what, lo, hi))
    return lambda rng: int(rng.integers(lo, hi + 1))


def _qual_sampler(spec):
    if isinstance(spec, int):
        return lambda rng, size: np.full(size, spec, dtype=np.uint8)
    lo, hi = spec
    return lambda rng, size: rng.integers(lo, hi + 1, size=size).astype(np.uint8)


def _random_bases(rng, length):
    return rng.integers(0, 4, size=length, dtype=np.int8)


def _mutate(rng, bases, rate):
    out = bases.copy()
    hits = rng.random(out.shape[0]) < rate
    count = int(hits.sum())
    if count:
        out[hits] = (out[hits] + rng.integers(1, 4, size=count)) % 4
    return out


def _derive_read(rng, hap_bases, m, mutation_rate):
    """A read of length m sampled from a haplotype: a mutated substring,
    extended with random bases when the read is longer than the source."""
    n = hap_bases.shape[0]
    if m <= n:
        start = int(rng.integers(0, n - m + 1))
        core = hap_bases[start:start + m]
    else:
        core = np.concatenate([hap_bases, _random_bases(rng, m - n)])
    return _mutate(rng, core, mutation_rate)


def generate_synthetic(num_batches, reads_per_batch, haps_per_batch,
                       read_len_spec, hap_len_spec, seed,
                       mode="independent",
                       mutation_rate=DEFAULT_MUTATION_RATE,
                       base_qual=DEFAULT_BASE_QUAL,
                       indel_qual=DEFAULT_INDEL_QUAL,
                       gcp_qual=DEFAULT_GCP_QUAL):
    """Generate batches of reads and haplotypes.

    Length specs are fixed ints or inclusive (min, max) ranges.  Qualities
    are drawn uniformly from the configured Phred ranges.
    """
    if mode not in ("independent", "derived"):
        raise DataError("unknown generation mode %r" % mode)
    read_len = _length_sampler(read_len_spec, "read")
    hap_len = _length_sampler(hap_len_spec, "haplotype")
    bq = _qual_sampler(base_qual)
    iq = _qual_sampler(indel_qual)
    dq = _qual_sampler(indel_qual)
    gq = _qual_sampler(gcp_qual)
    rng = np.random.default_rng(seed)

    batches = []
    for _ in range(num_batches):
        lengths = [hap_len(rng) for _ in range(haps_per_batch)]
        if mode == "independent":
            haps = [Haplotype(_random_bases(rng, n)) for n in lengths]
        else:
            # one locus per batch: haplotypes are variant prefixes of a
            # shared sequence, reads substrings of its common region
            base = _random_bases(rng, max(lengths))
            haps = [Haplotype(_mutate(rng, base[:n], mutation_rate))
                    for n in lengths]
        reads = []
        for _ in range(reads_per_batch):
            m = read_len(rng)
            if mode == "independent":
                bases = _random_bases(rng, m)
            else:
                bases = _derive_read(rng, base[:min(lengths)], m, mutation_rate)
            reads.append(ReadRecord(bases, bq(rng, m), iq(rng, m),
                                    dq(rng, m), gq(rng, m)))
        batches.append(Batch(tuple(reads), tuple(haps)))
    return batches


def generate_verification_pairs(num_pairs, seed, max_read_len=1024,
                                max_hap_len=1024,
                                mutation_rate=0.005):
    """Single-pair batches for oracle comparisons.

    Lengths cover [1, max] on both axes but are sampled jointly: reads are
    derived from their haplotype and mostly fit inside it, with strata for
    equal lengths, near-maximal reads, and small read overhangs.  Base
    qualities start at 15 so even maximal-length pairs keep their scores
    well above the single-precision representable floor.
    """
    rng = np.random.default_rng(seed)
    bq = _qual_sampler((15, 40))
    iq = _qual_sampler(DEFAULT_INDEL_QUAL)
    gq = _qual_sampler(DEFAULT_GCP_QUAL)

    batches = []
    for _ in range(num_pairs):
        u = rng.random()
        if u < 0.10:
            m = int(rng.integers(max(1, max_read_len * 3 // 4), max_read_len + 1))
            n = int(rng.integers(min(m, max_hap_len), max_hap_len + 1))
        elif u < 0.25:
            m = n = int(rng.integers(1, min(max_read_len, max_hap_len) + 1))
        elif u < 0.30:
            n = int(rng.integers(1, max_hap_len + 1))
            m = min(n + int(rng.integers(1, 17)), max_read_len)
        else:
            n = int(rng.integers(1, max_hap_len + 1))
            m = int(rng.integers(1, min(n, max_read_len) + 1))
        hap = _random_bases(rng, n)
        read = _derive_read(rng, hap, m, mutation_rate)
        record = ReadRecord(read, bq(rng, m), iq(rng, m), iq(rng, m), gq(rng, m))
        batches.append(Batch((record,), (Haplotype(hap),)))
    return batches
