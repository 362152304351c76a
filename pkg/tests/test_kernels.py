import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coplan import kernels
from coplan._jit import HAVE_NUMBA


def _tableau(rng, m, n):
    # feasible start: slack basis with non-negative rhs
    A = rng.uniform(-1, 2, size=(m, n))
    b = rng.uniform(0.5, 3, size=m)
    c = rng.uniform(-2, 2, size=n)
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = c
    basis = np.arange(n, n + m, dtype=np.int64)
    return T, basis


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 8), n=st.integers(1, 8))
def test_simplex_backends_agree(seed, m, n):
    rng = np.random.default_rng(seed)
    T, basis = _tableau(rng, m, n)
    allowed = np.ones(T.shape[1] - 1, dtype=np.bool_)
    T1, b1 = T.copy(), basis.copy()
    T2, b2 = T.copy(), basis.copy()
    s1 = kernels.simplex_iterate(T1, b1, allowed, 1e-10, 500, backend="numba")
    s2 = kernels.simplex_iterate(T2, b2, allowed, 1e-10, 500, backend="numpy")
    assert s1 == s2
    np.testing.assert_array_equal(b1, b2)
    np.testing.assert_allclose(T1, T2, rtol=1e-12, atol=1e-12)


def test_masked_columns_never_enter():
    rng = np.random.default_rng(3)
    T, basis = _tableau(rng, 4, 5)
    T[-1, :5] = -1.0
    allowed = np.ones(T.shape[1] - 1, dtype=np.bool_)
    allowed[2] = False
    for backend in ("numba", "numpy"):
        b = basis.copy()
        kernels.simplex_iterate(T.copy(), b, allowed, 1e-10, 500, backend=backend)
        assert 2 not in b


def _pipeline_inputs(rng, K, n):
    comp_t = rng.uniform(0, 1, (K, n))
    comp_e = rng.uniform(0, 1, (K, n))
    comp_ei = comp_e * (rng.uniform(size=(K, n)) < 0.5)
    tr_t = rng.uniform(0, 1, (K, n, n))
    tr_e = rng.uniform(0, 1, (K, n, n))
    tr_ei = tr_e * 0.5
    for arr in (tr_t, tr_e, tr_ei):
        for k in range(K):
            np.fill_diagonal(arr[k], 0.0)
    probs = np.cumprod(np.r_[1.0, rng.uniform(0.2, 1.0, K - 1)])
    return comp_t, comp_e, comp_ei, tr_t, tr_e, tr_ei, probs


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), K=st.integers(1, 5), n=st.integers(1, 4))
def test_pipeline_backends_agree(seed, K, n):
    args = _pipeline_inputs(np.random.default_rng(seed), K, n)
    a = kernels.enumerate_pipeline(*args, backend="numba")
    b = kernels.enumerate_pipeline(*args, backend="numpy")
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-12)


def test_pipeline_matches_direct_expectation():
    rng = np.random.default_rng(0)
    K, n = 3, 3
    comp_t, comp_e, comp_ei, tr_t, tr_e, tr_ei, probs = _pipeline_inputs(rng, K, n)
    times, _, _ = kernels.enumerate_pipeline(comp_t, comp_e, comp_ei, tr_t, tr_e, tr_ei, probs)
    for idx in range(n ** (K - 1)):
        a = kernels.decode_assignment(idx, n, K)
        # enumerate the stopping point explicitly
        expect = 0.0
        for last in range(K):
            p_stop = probs[last] - (probs[last + 1] if last + 1 < K else 0.0)
            t = sum(comp_t[k, a[k]] for k in range(last + 1))
            t += sum(tr_t[k - 1, a[k - 1], a[k]] for k in range(1, last + 1))
            t += tr_t[last, a[last], 0]
            expect += p_stop * t
        assert times[idx] == pytest.approx(expect, rel=1e-12)


def test_decode_is_lexicographic():
    n, K = 3, 4
    tuples = [kernels.decode_assignment(i, n, K) for i in range(n ** (K - 1))]
    assert tuples == sorted(tuples)
    assert all(t[0] == 0 for t in tuples)


def test_env_flag_selects_numpy_backend():
    code = "from coplan._jit import backend_name; print(backend_name())"
    env = dict(os.environ, COPLAN_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
