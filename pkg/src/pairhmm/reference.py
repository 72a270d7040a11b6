"""Brute-force full-matrix oracle for the forward recursion.

Fills the M/I/D matrices exactly as the recurrences read, row-major over
read positions with the haplotype index innermost, evaluating the emission
branch inline per cell:

    M(i,j) = lambda_ij * (alpha_i * M(i-1,j-1) + beta_i * (I(i-1,j-1) + D(i-1,j-1)))
    I(i,j) = delta_i * M(i-1,j) + epsilon_i * I(i-1,j)
    D(i,j) = zeta_i  * M(i,j-1) + epsilon_i * D(i,j-1)

Boundary: row i=0 has M = I = 0 and D = S/n for every column (including
j=0); column j=0 is zero for i >= 1.  The result is
log10(sum_j M(m,j) + I(m,j)) with the scale exponent removed.

This module is the ground truth for the tiled engine and is allowed to be
slow; score-only callers should prefer forward_reference_linear_space,
which keeps two rows and is bit-identical by construction (same evaluation
order, same expressions, same flush-to-zero store policy).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import NumericOverflowError
from .model import Haplotype, ReadRecord, Score
from .prob import FLUSH_F64, LOG10_2, base_error_probs, build_transitions

N_CODE = 4


@njit(nogil=True, cache=True)
def _full_kernel(read_codes, hap_codes, one_minus_q, q_third,
                 alpha, beta, delta, epsilon, zeta,
                 boundary_d, flush, M, I, D):
    m = read_codes.shape[0]
    n = hap_codes.shape[0]
    zero = boundary_d - boundary_d
    for j in range(n + 1):
        M[0, j] = zero
        I[0, j] = zero
        D[0, j] = boundary_d
    for i in range(1, m + 1):
        M[i, 0] = zero
        I[i, 0] = zero
        D[i, 0] = zero
    for i in range(1, m + 1):
        r = read_codes[i - 1]
        al = alpha[i - 1]
        be = beta[i - 1]
        dl = delta[i - 1]
        ep = epsilon[i - 1]
        zt = zeta[i - 1]
        lam_match = one_minus_q[i - 1]
        lam_miss = q_third[i - 1]
        for j in range(1, n + 1):
            h = hap_codes[j - 1]
            if r == h or r == N_CODE or h == N_CODE:
                lam = lam_match
            else:
                lam = lam_miss
            mv = lam * (al * M[i - 1, j - 1] + be * (I[i - 1, j - 1] + D[i - 1, j - 1]))
            iv = dl * M[i - 1, j] + ep * I[i - 1, j]
            dv = zt * M[i, j - 1] + ep * D[i, j - 1]
            M[i, j] = mv if mv >= flush else zero
            I[i, j] = iv if iv >= flush else zero
            D[i, j] = dv if dv >= flush else zero
    acc = zero
    for j in range(1, n + 1):
        acc = acc + (M[m, j] + I[m, j])
    return acc


@njit(nogil=True, cache=True)
def _linear_kernel(read_codes, hap_codes, one_minus_q, q_third,
                   alpha, beta, delta, epsilon, zeta, boundary_d, flush):
    m = read_codes.shape[0]
    n = hap_codes.shape[0]
    zero = boundary_d - boundary_d
    M_prev = np.empty(n + 1, type(boundary_d))
    I_prev = np.empty(n + 1, type(boundary_d))
    D_prev = np.empty(n + 1, type(boundary_d))
    M_cur = np.empty(n + 1, type(boundary_d))
    I_cur = np.empty(n + 1, type(boundary_d))
    D_cur = np.empty(n + 1, type(boundary_d))
    for j in range(n + 1):
        M_prev[j] = zero
        I_prev[j] = zero
        D_prev[j] = boundary_d
    for i in range(1, m + 1):
        r = read_codes[i - 1]
        al = alpha[i - 1]
        be = beta[i - 1]
        dl = delta[i - 1]
        ep = epsilon[i - 1]
        zt = zeta[i - 1]
        lam_match = one_minus_q[i - 1]
        lam_miss = q_third[i - 1]
        M_cur[0] = zero
        I_cur[0] = zero
        D_cur[0] = zero
        for j in range(1, n + 1):
            h = hap_codes[j - 1]
            if r == h or r == N_CODE or h == N_CODE:
                lam = lam_match
            else:
                lam = lam_miss
            mv = lam * (al * M_prev[j - 1] + be * (I_prev[j - 1] + D_prev[j - 1]))
            iv = dl * M_prev[j] + ep * I_prev[j]
            dv = zt * M_cur[j - 1] + ep * D_cur[j - 1]
            M_cur[j] = mv if mv >= flush else zero
            I_cur[j] = iv if iv >= flush else zero
            D_cur[j] = dv if dv >= flush else zero
        M_prev, M_cur = M_cur, M_prev
        I_prev, I_cur = I_cur, I_prev
        D_prev, D_cur = D_cur, D_prev
    acc = zero
    for j in range(1, n + 1):
        acc = acc + (M_prev[j] + I_prev[j])
    return acc


@dataclass(frozen=True)
class DpMatrices:
    """The filled (m+1) x (n+1) float64 tables, boundaries included."""

    M: np.ndarray
    I: np.ndarray
    D: np.ndarray


def _inputs(read: ReadRecord, hap: Haplotype, scale_log2: int):
    trans = build_transitions(read)
    one_minus_q, q_third = base_error_probs(read)
    boundary_d = 2.0 ** scale_log2 / hap.length
    return (read.bases, hap.bases, one_minus_q, q_third,
            trans.alpha, trans.beta, trans.delta, trans.epsilon, trans.zeta,
            boundary_d, FLUSH_F64)


def _finish(acc: float, scale_log2: int) -> Score:
    if acc <= 0.0 or not math.isfinite(acc):
        raise NumericOverflowError(
            "accumulator %r out of range; retry in double precision or with "
            "a different scale" % acc)
    return Score(math.log10(acc) - scale_log2 * LOG10_2)


def forward_matrices(read: ReadRecord, hap: Haplotype, scale_log2: int = 0) -> DpMatrices:
    """Fill and return the complete dynamic-programming matrices."""
    M = np.empty((read.length + 1, hap.length + 1))
    I = np.empty_like(M)
    D = np.empty_like(M)
    _full_kernel(*_inputs(read, hap, scale_log2), M, I, D)
    return DpMatrices(M, I, D)


def forward_reference(read: ReadRecord, hap: Haplotype, scale_log2: int = 0) -> Score:
    """Score one pair with the full-matrix double-precision oracle."""
    M = np.empty((read.length + 1, hap.length + 1))
    I = np.empty_like(M)
    D = np.empty_like(M)
    acc = _full_kernel(*_inputs(read, hap, scale_log2), M, I, D)
    return _finish(acc, scale_log2)


def forward_reference_linear_space(read: ReadRecord, hap: Haplotype,
                                   scale_log2: int = 0) -> Score:
    """Score-only variant keeping two matrix rows; bit-identical to
    forward_reference."""
    acc = _linear_kernel(*_inputs(read, hap, scale_log2))
    return _finish(acc, scale_log2)
