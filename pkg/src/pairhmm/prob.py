"""Quality-score conversion, per-read transition profiles, emission tables.

Transition convention (per read position i):
    delta_i  = P(open insertion)      = 10^(-ins_qual_i / 10)
    zeta_i   = P(open deletion)       = 10^(-del_qual_i / 10)
    epsilon_i= P(extend gap)          = 10^(-gcp_qual_i / 10)
    alpha_i  = P(match -> match)      = 1 - delta_i - zeta_i
    beta_i   = P(gap -> match)        = 1 - epsilon_i

Emission for read base r_i with base-error probability Q_i against
haplotype base c:
    1 - Q_i   if r_i == c, or either side is N
    Q_i / 3   otherwise
Padding positions past the true read length emit 1 so padded lanes stay
numerically tame; they never contribute to a score.

Arithmetic policy shared by every engine: cell values below FLUSH_* are
stored as exact zero.  This mirrors the flush-to-zero behaviour of the SIMD
units this design targets and keeps the whole dynamic-programming recursion
out of the subnormal range, where x86 cores fall into microcode assists.
The thresholds sit far enough above the smallest normal number that no
product of a stored value with a legal per-step factor (>= 10^-9.3 / 3) can
land in the subnormal range either.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateTransitionError, InvalidQualityError
from .model import MAX_PHRED, N_CODE, VALID_PADDED_LENGTHS, ReadRecord

# Phred -> probability lookup; scalar evaluation so each entry is exactly
# the platform's 10^(-q/10) (numpy's vectorized pow can be off by one ulp)
PHRED_TO_PROB = np.array([10.0 ** (-q / 10.0) for q in range(MAX_PHRED + 1)])

FLUSH_F32 = np.float32(2.0 ** -90)
FLUSH_F64 = np.float64(2.0 ** -970)

LOG10_2 = np.log10(2.0)


def flush_threshold(dtype) -> float:
    return FLUSH_F32 if np.dtype(dtype) == np.float32 else FLUSH_F64


def phred_to_prob(q: int) -> float:
    """Convert one Phred integer to its error probability 10^(-q/10)."""
    if not 0 <= q <= MAX_PHRED:
        raise InvalidQualityError("Phred value %r outside [0, %d]" % (q, MAX_PHRED))
    return float(PHRED_TO_PROB[q])


@dataclass(frozen=True)
class TransitionProfile:
    """Per-read-position transition probabilities (float64, length m)."""

    alpha: np.ndarray
    beta: np.ndarray
    delta: np.ndarray
    epsilon: np.ndarray
    zeta: np.ndarray


def build_transitions(read: ReadRecord) -> TransitionProfile:
    """Derive the transition profile of a read from its quality tracks."""
    delta = PHRED_TO_PROB[read.ins_qual]
    zeta = PHRED_TO_PROB[read.del_qual]
    epsilon = PHRED_TO_PROB[read.gcp_qual]
    if np.any(delta + zeta >= 1.0):
        i = int(np.argmax(delta + zeta >= 1.0))
        raise DegenerateTransitionError(
            "insertion+deletion probability >= 1 at read position %d "
            "(ins_qual=%d, del_qual=%d)" % (i + 1, read.ins_qual[i], read.del_qual[i]))
    alpha = 1.0 - delta - zeta
    beta = 1.0 - epsilon
    return TransitionProfile(alpha, beta, delta, epsilon, zeta)


@dataclass(frozen=True)
class EmissionTable:
    """Precomputed emissions: values[c, i-1] holds the emission of read
    position i against haplotype base code c.  Shape (5, m_padded)."""

    values: np.ndarray
    m: int


def base_error_probs(read: ReadRecord):
    """(1 - Q_i, Q_i / 3) arrays; the two emission branches of a read."""
    q = PHRED_TO_PROB[read.base_qual]
    return 1.0 - q, q / 3.0


def build_emission_table(read: ReadRecord, m_padded: int) -> EmissionTable:
    """Tabulate emissions for all five haplotype base codes.

    Costs O(5 * m_padded) once per read; engines look values up instead of
    re-evaluating the match/mismatch branch per cell.
    """
    m = read.length
    if m_padded < m:
        raise DataError("m_padded=%d smaller than read length %d" % (m_padded, m))
    if m_padded not in VALID_PADDED_LENGTHS:
        raise DataError("m_padded=%d is not a valid lane-group product" % m_padded)
    one_minus_q, q_third = base_error_probs(read)
    values = np.ones((len("ACGTN"), m_padded), dtype=np.float64)
    for code in range(values.shape[0]):
        match = (read.bases == code) | (read.bases == N_CODE) | (code == N_CODE)
        values[code, :m] = np.where(match, one_minus_q, q_third)
    return EmissionTable(values, m)
