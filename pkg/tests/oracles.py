"""Independent oracles used by the test suite.

These deliberately avoid the package's dynamic-programming code paths:
``path_sum_score`` expands the full recursion tree (every state path is
enumerated and its weight product summed), and ``smallest_fitting`` is a
one-line restatement of the binning rule.  Both are exponential/naive on
purpose and only usable on tiny instances.
"""
import numpy as np

N_CODE = 4


def _phred(q):
    return 10.0 ** (-np.asarray(q, dtype=np.float64) / 10.0)


def path_sum_score(read_bases, base_qual, ins_qual, del_qual, gcp_qual,
                   hap_bases, scale=1.0):
    """Sum of all alignment-path weights, evaluated by plain recursion.

    Returns the linear-domain score sum_j (M(m,j) + I(m,j)).  Only for
    m, n <= ~5: the recursion tree is exponential and unmemoized.
    """
    read_bases = np.asarray(read_bases, dtype=np.int8)
    hap_bases = np.asarray(hap_bases, dtype=np.int8)
    m, n = read_bases.shape[0], hap_bases.shape[0]
    q = _phred(base_qual)
    delta = _phred(ins_qual)
    zeta = _phred(del_qual)
    epsilon = _phred(gcp_qual)
    alpha = 1.0 - delta - zeta
    beta = 1.0 - epsilon
    boundary_d = scale / n

    def lam(i, j):
        r, h = read_bases[i - 1], hap_bases[j - 1]
        if r == h or r == N_CODE or h == N_CODE:
            return 1.0 - q[i - 1]
        return q[i - 1] / 3.0

    def value(i, j, state):
        if i == 0:
            return boundary_d if state == "D" else 0.0
        if j == 0:
            return 0.0
        if state == "M":
            return lam(i, j) * (alpha[i - 1] * value(i - 1, j - 1, "M")
                                + beta[i - 1] * value(i - 1, j - 1, "I")
                                + beta[i - 1] * value(i - 1, j - 1, "D"))
        if state == "I":
            return (delta[i - 1] * value(i - 1, j, "M")
                    + epsilon[i - 1] * value(i - 1, j, "I"))
        return (zeta[i - 1] * value(i, j - 1, "M")
                + epsilon[i - 1] * value(i, j - 1, "D"))

    return sum(value(m, j, "M") + value(m, j, "I") for j in range(1, n + 1))


def smallest_fitting(m, configs):
    """Brute-force restatement of the config selection rule."""
    fitting = [c for c in configs if c.p * c.k >= m]
    if not fitting:
        return None
    return sorted(fitting, key=lambda c: (c.p * c.k, c.p))[0]
