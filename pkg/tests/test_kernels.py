import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardy_lt import _kernels_py, kernels

compiled = pytest.importorskip("hardy_lt._kernels")


def random_pencil(rng, n):
    a = rng.uniform(-2, 4, n)
    e = rng.uniform(-1, 1, n - 1)
    b = np.exp(rng.uniform(-6, 3, n))
    return a, e, b


def dense_eigs(a, e, b):
    A = np.diag(a) + np.diag(e, 1) + np.diag(e, -1)
    s = 1 / np.sqrt(b)
    return np.linalg.eigvalsh(A * s[:, None] * s[None, :])


def test_backend_is_compiled():
    assert kernels.BACKEND == "compiled"


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 31), n=st.integers(2, 60), sigma=st.floats(-5, 5))
def test_counts_agree(seed, n, sigma):
    a, e, b = random_pencil(np.random.default_rng(seed), n)
    assert compiled.sturm_count(a, e, b, sigma) == _kernels_py.sturm_count(a, e, b, sigma)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 31), n=st.integers(2, 40))
def test_count_matches_inertia(seed, n):
    a, e, b = random_pencil(np.random.default_rng(seed), n)
    lam = dense_eigs(a, e, b)
    sigma = 0.5 * (lam[n // 2] + lam[n // 2 - 1]) if n > 1 else lam[0] + 1
    if lam[n // 2] - lam[n // 2 - 1] < 1e-8 * max(1.0, abs(sigma)):
        return
    assert compiled.sturm_count(a, e, b, sigma) == n // 2


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 31), n=st.integers(3, 40), k=st.integers(1, 3))
def test_bisection_backends_identical(seed, n, k):
    a, e, b = random_pencil(np.random.default_rng(seed), n)
    lam = dense_eigs(a, e, b)
    lo = lam[0] - 1.0
    c = np.asarray(compiled.bisect_eigenvalues(a, e, b, lo, lam[-1] + 1, k, 0.0))
    p = np.asarray(_kernels_py.bisect_eigenvalues(a, e, b, lo, lam[-1] + 1, k, 0.0))
    assert np.array_equal(c, p)
    assert np.allclose(c, lam[:k], atol=1e-9 * max(1.0, np.abs(lam).max()))


def test_bisection_diagonal():
    a = np.array([3.0, 1.0, 2.0])
    e = np.zeros(2)
    b = np.array([1.0, 1.0, 2.0])
    k = compiled.sturm_count(a, e, b, 2.5)
    assert k == 2
    out = compiled.bisect_eigenvalues(a, e, b, 0.0, 2.5, k, 0.0)
    assert np.allclose(out, [1.0, 1.0])
