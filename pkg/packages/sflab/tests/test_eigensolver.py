import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import linalg

from sflab.connections import ChartMap, pullback
from sflab.dirac import DiracFamily
from sflab.eigensolver import eigvalsh, jacobi_eigvalsh, jacobi_symmetric, off_norm, realify
from sflab.exterior import Chart
from sflab.families import maurer_cartan_u1


def _random_hermitian(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)


@settings(max_examples=40)
@given(st.integers(2, 12), st.integers(0, 2**16))
def test_jacobi_matches_lapack_on_hermitian_matrices(n, seed):
    h = _random_hermitian(n, seed)
    assert_allclose(jacobi_eigvalsh(h), linalg.eigvalsh(h), atol=1e-10)


def test_jacobi_on_real_symmetric_matrix():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((9, 9))
    a = a + a.T
    assert_allclose(jacobi_symmetric(a), np.linalg.eigvalsh(a), atol=1e-10)
    assert_allclose(jacobi_eigvalsh(a.astype(complex)), np.linalg.eigvalsh(a), atol=1e-10)


def test_realify_doubles_the_spectrum():
    h = _random_hermitian(5, 2)
    doubled = np.linalg.eigvalsh(realify(h))
    assert_allclose(doubled[::2], doubled[1::2], atol=1e-12)
    assert_allclose(doubled[::2], np.linalg.eigvalsh(h), atol=1e-12)


def test_off_norm_of_diagonal_is_zero():
    assert off_norm(np.diag([1.0, 2.0, 3.0])) == 0.0
    assert off_norm(np.array([[0.0, 3.0], [4.0, 0.0]])) == 5.0


def test_both_solvers_agree_on_a_dirac_matrix():
    base = maurer_cartan_u1(32)
    twist = pullback(base, ChartMap.circle_cover(Chart.circle(32), base.chart, 2, wobble=0.3))
    mat = DiracFamily.fourier_circle(twist, cutoff=6).matrix(0.4)
    assert_allclose(eigvalsh(mat, "jacobi"), eigvalsh(mat, "lapack"), atol=1e-10)


def test_unknown_method():
    with pytest.raises(ValueError):
        eigvalsh(np.eye(2), "qr")
