import numpy as np
import pytest

from pairhmm import Haplotype, ReadRecord, encode_bases


def make_read(bases, base_q=30, ins_q=40, del_q=40, gcp_q=10):
    """ReadRecord from a base string and per-track qualities (scalar or list)."""
    codes = encode_bases(bases)
    m = codes.shape[0]

    def track(q):
        return np.full(m, q, dtype=np.uint8) if np.isscalar(q) else np.asarray(q)

    return ReadRecord(codes, track(base_q), track(ins_q), track(del_q), track(gcp_q))


def make_hap(bases):
    return Haplotype(encode_bases(bases))


def random_pair(rng, m, n, mutation_rate=0.01, base_q=(10, 41), indel_q=(30, 46),
                gcp_q=10):
    """A read derived from a random haplotype, GATK-benchmark style."""
    hap = rng.integers(0, 4, size=n, dtype=np.int8)
    if m <= n:
        start = int(rng.integers(0, n - m + 1))
        read = hap[start:start + m].copy()
    else:
        read = np.concatenate([hap, rng.integers(0, 4, size=m - n, dtype=np.int8)])
    hits = rng.random(m) < mutation_rate
    count = int(hits.sum())
    if count:
        read[hits] = (read[hits] + rng.integers(1, 4, size=count)) % 4
    record = ReadRecord(read,
                        rng.integers(*base_q, size=m),
                        rng.integers(*indel_q, size=m),
                        rng.integers(*indel_q, size=m),
                        np.full(m, gcp_q))
    return record, Haplotype(hap)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
