"""Domain types: reads, haplotypes, batches, work items, engine configurations.

All types are immutable after construction (arrays are marked read-only) and
safe to share across concurrent workers.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, InvalidQualityError

ALPHABET = "ACGTN"
N_CODE = 4
MAX_PHRED = 93

_CODE_OF = {ch: np.int8(i) for i, ch in enumerate(ALPHABET)}

# lane-group geometry domain; products of these give the valid padded lengths
LANE_COUNTS = (2, 4, 8, 16, 32)
COLUMNS_PER_LANE = (4, 8, 12, 16, 20, 24, 28, 32)
VALID_PADDED_LENGTHS = frozenset(p * k for p in LANE_COUNTS for k in COLUMNS_PER_LANE)


def encode_bases(text: str) -> np.ndarray:
    """Encode a base string over ACGTN into an int8 code array."""
    out = np.empty(len(text), dtype=np.int8)
    for pos, ch in enumerate(text):
        code = _CODE_OF.get(ch)
        if code is None:
            raise DataError("illegal base character %r at position %d" % (ch, pos + 1))
        out[pos] = code
    return out


def decode_bases(codes: np.ndarray) -> str:
    return "".join(ALPHABET[c] for c in codes)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def _check_qual(name: str, qual: np.ndarray, m: int) -> np.ndarray:
    if qual.shape[0] != m:
        raise DataError("%s track has length %d, expected %d" % (name, qual.shape[0], m))
    if qual.min(initial=0) < 0 or qual.max(initial=0) > MAX_PHRED:
        raise InvalidQualityError("%s values must be in [0, %d]" % (name, MAX_PHRED))
    return _freeze(qual.astype(np.uint8))


@dataclass(frozen=True)
class ReadRecord:
    """A read: base codes plus four per-base Phred quality tracks."""

    bases: np.ndarray
    base_qual: np.ndarray
    ins_qual: np.ndarray
    del_qual: np.ndarray
    gcp_qual: np.ndarray

    def __post_init__(self):
        bases = np.asarray(self.bases, dtype=np.int8)
        if bases.ndim != 1 or bases.shape[0] < 1:
            raise DataError("read must contain at least one base")
        m = bases.shape[0]
        object.__setattr__(self, "bases", _freeze(bases))
        for name in ("base_qual", "ins_qual", "del_qual", "gcp_qual"):
            qual = np.asarray(getattr(self, name))
            object.__setattr__(self, name, _check_qual(name, qual, m))

    @property
    def length(self) -> int:
        return self.bases.shape[0]


@dataclass(frozen=True)
class Haplotype:
    """A candidate haplotype base string."""

    bases: np.ndarray

    def __post_init__(self):
        bases = np.asarray(self.bases, dtype=np.int8)
        if bases.ndim != 1 or bases.shape[0] < 1:
            raise DataError("haplotype must contain at least one base")
        object.__setattr__(self, "bases", _freeze(bases))

    @property
    def length(self) -> int:
        return self.bases.shape[0]


@dataclass(frozen=True)
class Batch:
    """A set of reads and a set of haplotypes; denotes their full cross product."""

    reads: tuple
    haps: tuple

    def __post_init__(self):
        object.__setattr__(self, "reads", tuple(self.reads))
        object.__setattr__(self, "haps", tuple(self.haps))
        if not self.reads or not self.haps:
            raise DataError("batch must contain at least one read and one haplotype")

    @property
    def num_items(self) -> int:
        return len(self.reads) * len(self.haps)


@dataclass(frozen=True)
class WorkItem:
    batch_index: int
    read_index: int
    hap_index: int
    global_id: int


def enumerate_work_items(batches) -> list:
    """Cross product of every batch in batch-major, read-major, hap-minor order.

    global_id equals the position in this enumeration; repeated calls yield
    identical orderings.
    """
    items = []
    gid = 0
    for b, batch in enumerate(batches):
        for r in range(len(batch.reads)):
            for h in range(len(batch.haps)):
                items.append(WorkItem(b, r, h, gid))
                gid += 1
    return items


@dataclass(frozen=True)
class EngineConfig:
    """Lane-group geometry plus numeric policy for the tiled engine.

    p lanes each own k read positions; reads up to m_max = p*k fit after
    N-padding.  scale_log2 sets the boundary scale (reported scores have the
    offset removed); it defaults to 120 in single precision to keep long
    alignments inside range, 0 in double.
    """

    p: int
    k: int
    precision: str = "f32"
    scale_log2: int = field(default=None)

    def __post_init__(self):
        if self.p not in LANE_COUNTS:
            raise DataError("lane count p=%r not in %s" % (self.p, LANE_COUNTS))
        if self.k not in COLUMNS_PER_LANE:
            raise DataError("columns per lane k=%r not in %s" % (self.k, COLUMNS_PER_LANE))
        if self.p * self.k < 8:
            raise DataError("p*k must be at least 8")
        if self.precision not in ("f32", "f64"):
            raise DataError("precision must be 'f32' or 'f64'")
        if self.scale_log2 is None:
            object.__setattr__(self, "scale_log2", 120 if self.precision == "f32" else 0)
        if not isinstance(self.scale_log2, int) or self.scale_log2 < 0:
            raise DataError("scale_log2 must be a non-negative integer")

    @property
    def m_max(self) -> int:
        return self.p * self.k

    @property
    def dtype(self):
        return np.float32 if self.precision == "f32" else np.float64

    @property
    def geometry(self) -> str:
        return "%dx%d" % (self.p, self.k)


def default_configs(precision: str = "f32", scale_log2: int = None) -> list:
    """The default kernel configuration set.

    The {4,8,16,32} x {4,8,12,16,20,24,28,32} grid covers reads up to 1024
    bases; a (2,4) entry is added so reads of length <= 8 do not waste lanes.
    Sorted by (m_max, p) to match selection order.
    """
    configs = [EngineConfig(2, 4, precision, scale_log2)]
    for p in (4, 8, 16, 32):
        for k in COLUMNS_PER_LANE:
            configs.append(EngineConfig(p, k, precision, scale_log2))
    configs.sort(key=lambda c: (c.m_max, c.p))
    return configs


@dataclass(frozen=True)
class Score:
    """Base-10 log of the forward probability, boundary scale divided out."""

    log10_likelihood: float
