import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from fewbody.eigensolve import COMPLEX_SYMMETRIC, AssembledSystem, solve_gevp, truncate_overlap
from fewbody.errors import DegenerateBasis, NumericalFailure, ShapeMismatch


def random_system(rng, n, cond=1e3):
    A = rng.normal(size=(n, n))
    H = 0.5 * (A + A.T)
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    S = Q @ np.diag(np.geomspace(1.0, 1.0 / cond, n)) @ Q.T
    return H, 0.5 * (S + S.T)


def test_identity_overlap_is_untouched():
    X, kept = truncate_overlap(np.eye(3))
    assert kept == 3
    assert_allclose(np.abs(X), np.eye(3), atol=1e-15)


def test_near_duplicate_function_is_dropped():
    S = np.array([[1.0, 1 - 1e-14], [1 - 1e-14, 1.0]])
    assert truncate_overlap(S, 1e-10)[1] == 1


def test_transform_orthonormalizes(rng):
    _, S = random_system(rng, 5)
    X, kept = truncate_overlap(S)
    assert kept == 5
    assert_allclose(X.T @ S @ X, np.eye(5), atol=1e-10)


def test_all_below_cutoff_is_degenerate():
    with pytest.raises(DegenerateBasis):
        truncate_overlap(np.zeros((2, 2)))


def test_non_finite_entries():
    with pytest.raises(NumericalFailure):
        solve_gevp(AssembledSystem(np.array([[np.nan]]), np.eye(1)))


def test_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        AssembledSystem(np.eye(2), np.eye(3))


def test_trivial_spectra():
    assert_allclose(solve_gevp(AssembledSystem(np.diag([1.0, 2.0]), np.eye(2))).energies, [1, 2])
    assert_allclose(solve_gevp(AssembledSystem(np.array([[0.0, 1], [1, 0]]), np.eye(2))).energies, [-1, 1])


def test_matches_dense_generalized_solve(rng):
    H, S = random_system(rng, 4, cond=10)
    ref = np.sort(np.linalg.eigvals(np.linalg.solve(S, H)).real)
    assert_allclose(solve_gevp(AssembledSystem(H, S)).energies, ref, atol=1e-10)


def test_vectors_residual_and_normalization(rng):
    H, S = random_system(rng, 8)
    spec = solve_gevp(AssembledSystem(H, S), want_vectors=True)
    C = spec.vectors
    for k, E in enumerate(spec.energies):
        c = C[:, k]
        assert np.linalg.norm(H @ c - E * S @ c) <= 1e-8 * max(np.linalg.norm(H @ c), 1e-300)
    assert_allclose(C.T @ S @ C, np.eye(8), atol=1e-9)


def test_threshold_monotone_kept_dim(rng):
    _, S = random_system(rng, 12, cond=1e12)
    kept = [truncate_overlap(S, t)[1] for t in (1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-3)]
    assert all(a >= b for a, b in zip(kept, kept[1:]))


def test_complex_symmetric_path_on_real_system(rng):
    H, S = random_system(rng, 6)
    real = solve_gevp(AssembledSystem(H, S)).energies
    cplx = solve_gevp(AssembledSystem(H.astype(complex), S, COMPLEX_SYMMETRIC)).energies
    assert np.all(np.abs(cplx.imag) <= 1e-10 * np.maximum(1, np.abs(cplx.real)))
    assert_allclose(cplx.real, real, atol=1e-10)


def interlacing_holds(seed: int) -> bool:
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 12))
    H, S = random_system(rng, n + 1, cond=1e4)
    small = solve_gevp(AssembledSystem(H[:n, :n], S[:n, :n]), 1e-14).energies
    big = solve_gevp(AssembledSystem(H, S), 1e-14).energies
    return bool(np.all(big[:n] <= small + 1e-10) and np.all(big[1:] >= small - 1e-10))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_interlacing_property(seed):
    assert interlacing_holds(seed)
