"""Hot numeric kernels with numba and pure-numpy implementations.

Both implementations of each kernel follow the same arithmetic order for the
tableau update so that results agree bit-for-bit on the pivoting path.
``simplex_iterate`` and ``enumerate_pipeline`` dispatch on the backend flag
from :mod:`coplan._jit`.
"""
import numpy as np

from ._jit import USE_NUMBA, njit

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2

# ratios closer than this count as tied for Bland's leaving rule
RATIO_TIE = 1e-12


# ---------------------------------------------------------------------------
# simplex
#
# Tableau layout: rows 0..m-1 are constraints, row m holds reduced costs, the
# last column holds right-hand sides (T[m, -1] is minus the objective value).


@njit(cache=True)
def _simplex_numba(T, basis, allowed, tol, max_iter):
    m = T.shape[0] - 1
    ncol = T.shape[1] - 1
    for it in range(max_iter):
        j = -1
        for k in range(ncol):
            if allowed[k] and T[m, k] < -tol:
                j = k
                break
        if j < 0:
            return OPTIMAL, it

        best = np.inf
        for i in range(m):
            a = T[i, j]
            if a > tol:
                ratio = T[i, ncol] / a
                if ratio < best:
                    best = ratio
        if best == np.inf:
            return UNBOUNDED, it
        r = -1
        for i in range(m):
            a = T[i, j]
            if a > tol:
                ratio = T[i, ncol] / a
                if ratio <= best + RATIO_TIE and (r < 0 or basis[i] < basis[r]):
                    r = i

        piv = T[r, j]
        for c in range(ncol + 1):
            T[r, c] = T[r, c] / piv
        T[r, j] = 1.0
        for i in range(m + 1):
            if i == r:
                continue
            f = T[i, j]
            if f != 0.0:
                for c in range(ncol + 1):
                    T[i, c] = T[i, c] - f * T[r, c]
                T[i, j] = 0.0
        basis[r] = j
    return ITERATION_LIMIT, max_iter


def _simplex_numpy(T, basis, allowed, tol, max_iter):
    m = T.shape[0] - 1
    ncol = T.shape[1] - 1
    for it in range(max_iter):
        cand = np.flatnonzero(allowed & (T[m, :ncol] < -tol))
        if cand.size == 0:
            return OPTIMAL, it
        j = cand[0]

        col = T[:m, j]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            return UNBOUNDED, it
        ratios = T[rows, ncol] / col[rows]
        tied = rows[ratios <= ratios.min() + RATIO_TIE]
        r = tied[np.argmin(basis[tied])]

        T[r] = T[r] / T[r, j]
        T[r, j] = 1.0
        f = T[:, j].copy()
        f[r] = 0.0
        nz = np.flatnonzero(f)
        T[nz] = T[nz] - f[nz, None] * T[r]
        T[nz, j] = 0.0
        basis[r] = j
    return ITERATION_LIMIT, max_iter


def simplex_iterate(T, basis, allowed, tol, max_iter, backend=None):
    """Run primal simplex with Bland's rule on tableau ``T`` in place.

    ``allowed`` masks the columns that may enter the basis. Returns
    ``(status, iterations)``.
    """
    use_numba = USE_NUMBA if backend is None else backend == "numba"
    fn = _simplex_numba if use_numba else _simplex_numpy
    status, its = fn(T, basis, allowed, float(tol), int(max_iter))
    return int(status), int(its)


def pivot(T, basis, r, j):
    """Single pivot on (r, j); used for driving artificials out after phase 1."""
    T[r] = T[r] / T[r, j]
    T[r, j] = 1.0
    f = T[:, j].copy()
    f[r] = 0.0
    nz = np.flatnonzero(f)
    T[nz] = T[nz] - f[nz, None] * T[r]
    T[nz, j] = 0.0
    basis[r] = j


# ---------------------------------------------------------------------------
# pipeline enumeration
#
# Stage 0 is pinned to device 0 (the initiator). Assignment index ``idx``
# encodes stages 1..K-1 in mixed radix with stage 1 most significant, so
# index order is lexicographic order of the assignment tuple.


@njit(cache=True)
def _pipeline_numba(comp_t, comp_e, comp_ei, tr_t, tr_e, tr_ei, run_prob):
    K, n = comp_t.shape
    total = n ** (K - 1)
    times = np.zeros(total)
    energy = np.zeros(total)
    init_energy = np.zeros(total)
    assign = np.zeros(K, dtype=np.int64)
    for idx in range(total):
        rem = idx
        for k in range(K - 1, 0, -1):
            assign[k] = rem % n
            rem //= n
        assign[0] = 0
        t = 0.0
        e = 0.0
        ei = 0.0
        for k in range(K):
            d = assign[k]
            p = run_prob[k]
            if k > 0:
                prev = assign[k - 1]
                t += p * tr_t[k - 1, prev, d]
                e += p * tr_e[k - 1, prev, d]
                ei += p * tr_ei[k - 1, prev, d]
            t += p * comp_t[k, d]
            e += p * comp_e[k, d]
            ei += p * comp_ei[k, d]
            p_next = run_prob[k + 1] if k + 1 < K else 0.0
            # result of the last executed stage returns to the initiator
            t += (p - p_next) * tr_t[k, d, 0]
            e += (p - p_next) * tr_e[k, d, 0]
            ei += (p - p_next) * tr_ei[k, d, 0]
        times[idx] = t
        energy[idx] = e
        init_energy[idx] = ei
    return times, energy, init_energy


def _pipeline_numpy(comp_t, comp_e, comp_ei, tr_t, tr_e, tr_ei, run_prob):
    K, n = comp_t.shape
    total = n ** (K - 1)
    if K > 1:
        digits = np.array(np.unravel_index(np.arange(total), (n,) * (K - 1))).T
    else:
        digits = np.zeros((total, 0), dtype=np.int64)
    assign = np.hstack([np.zeros((total, 1), dtype=np.int64), digits])

    t = np.zeros(total)
    e = np.zeros(total)
    ei = np.zeros(total)
    for k in range(K):
        d = assign[:, k]
        p = run_prob[k]
        if k > 0:
            prev = assign[:, k - 1]
            t += p * tr_t[k - 1, prev, d]
            e += p * tr_e[k - 1, prev, d]
            ei += p * tr_ei[k - 1, prev, d]
        t += p * comp_t[k, d]
        e += p * comp_e[k, d]
        ei += p * comp_ei[k, d]
        p_next = run_prob[k + 1] if k + 1 < K else 0.0
        t += (p - p_next) * tr_t[k, d, 0]
        e += (p - p_next) * tr_e[k, d, 0]
        ei += (p - p_next) * tr_ei[k, d, 0]
    return t, e, ei


def enumerate_pipeline(comp_t, comp_e, comp_ei, tr_t, tr_e, tr_ei, run_prob, backend=None):
    """Expected (time, mobile energy, initiator energy) for every assignment.

    comp_* have shape (K, n); tr_* have shape (K, n, n) and give the cost of
    moving stage k's output from device a to device b; run_prob[k] is the
    probability that stage k executes at all.
    """
    use_numba = USE_NUMBA if backend is None else backend == "numba"
    fn = _pipeline_numba if use_numba else _pipeline_numpy
    args = [np.ascontiguousarray(a, dtype=np.float64) for a in (comp_t, comp_e, comp_ei, tr_t, tr_e, tr_ei, run_prob)]
    return fn(*args)


def decode_assignment(idx, n, K):
    """Inverse of the mixed-radix encoding used by ``enumerate_pipeline``."""
    out = [0] * K
    for k in range(K - 1, 0, -1):
        out[k] = idx % n
        idx //= n
    return tuple(out)
