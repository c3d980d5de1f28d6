import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from fewbody.basis import (
    RangeProgression,
    angular_measure,
    geometric_ranges,
    make_basis_2b,
    normalization,
)
from fewbody.errors import InvalidBasis


def self_overlap(f):
    omega = angular_measure(f.dim)
    integrand = lambda r: omega * r ** (f.dim - 1) * f(r) ** 2
    edge = 12.0 / np.sqrt(f.range)
    val, _ = quad(integrand, 0.0, edge, limit=400, epsabs=0, epsrel=1e-13)
    return val


def test_geometric_ranges_small_cases():
    assert_allclose(geometric_ranges(3, 1.0, 4.0), [1.0, 2.0, 4.0], rtol=1e-15)
    assert_allclose(geometric_ranges(2, 0.5, 2.0), [0.5, 2.0], rtol=0)


def test_geometric_ranges_endpoints_exact():
    r = geometric_ranges(10, 0.1, 30.0)
    assert r[0] == 0.1 and r[-1] == 30.0
    assert_allclose(r[1] / r[0], 300 ** (1 / 9), rtol=1e-14)


@pytest.mark.parametrize("nmax,r1,rn", [(1, 0.1, 1.0), (5, 0.0, 1.0), (5, 2.0, 1.0), (5, 1.0, 1.0), (2.5, 0.1, 1.0)])
def test_geometric_ranges_rejects(nmax, r1, rn):
    with pytest.raises(InvalidBasis):
        geometric_ranges(nmax, r1, rn)


def test_geometric_ranges_log_equispaced(rng):
    for _ in range(100):
        n = int(rng.integers(2, 60))
        r1 = 10 ** rng.uniform(-3, 1)
        rn = r1 * 10 ** rng.uniform(0.1, 4)
        r = geometric_ranges(n, r1, rn)
        steps = np.diff(np.log(r))
        assert np.all(steps > 0)
        assert_allclose(steps, steps[0], atol=1e-12)


def test_progression_ranges_are_inverse_squares():
    prog = RangeProgression(4, 0.5, 4.0)
    assert_allclose(prog.ranges(), 1.0 / prog.lengths() ** 2)


def test_normalization_closed_forms():
    nu = 0.37
    assert_allclose(normalization(nu, 0, 1), (2 * nu / np.pi) ** 0.25, rtol=1e-14)
    # 3D radial normalization with unit-normalized spherical harmonics
    assert_allclose(normalization(nu, 0, 3), np.sqrt(4 * np.pi) * (2 * nu / np.pi) ** 0.75, rtol=1e-14)


def test_normalization_against_quadrature():
    val, _ = quad(lambda r: r**4 * np.exp(-2 * r**2), 0, np.inf, epsrel=1e-14)
    assert_allclose(normalization(1.0, 1, 3), 1 / np.sqrt(val), rtol=1e-12)


def test_real_basis_count_and_unit_norm():
    basis = make_basis_2b(RangeProgression(4, 0.2, 5.0), 0, 3)
    assert len(basis) == 4
    for dim, l in [(1, 0), (1, 1), (2, 0), (2, 2), (3, 0), (3, 1), (3, 3)]:
        for f in make_basis_2b(RangeProgression(6, 0.1, 20.0), l, dim):
            assert_allclose(self_overlap(f), 1.0, atol=1e-10)


def test_cr_basis_pairs_share_range_and_are_normalized():
    prog = RangeProgression(8, 0.05, 50.0)
    basis = make_basis_2b(prog, 0, 3, cr=True, omega_cr=1.5)
    assert len(basis) == 2 * prog.nmax
    funcs = list(basis)
    for c, s in zip(funcs[::2], funcs[1::2]):
        assert (c.oscillation, s.oscillation) == ("cos", "sin")
        assert c.range == s.range
    for f in funcs:
        assert_allclose(self_overlap(f), 1.0, atol=1e-10)


def test_paper_sized_cr_basis():
    basis = make_basis_2b(RangeProgression(80, 0.015, 2000.0), 0, 3, cr=True, omega_cr=1.5)
    assert len(np.unique(basis.ranges)) == 80
    assert len(basis) == 160


def test_cr_cos_member_degenerates_to_real_gaussian():
    prog = RangeProgression(5, 0.1, 10.0)
    real = make_basis_2b(prog, 1, 3)
    cr = make_basis_2b(prog, 1, 3, cr=True, omega_cr=1e-8)
    r = np.linspace(0, 30, 301)
    for g, c in zip(real, list(cr)[::2]):
        assert_allclose(c(r), g(r), atol=1e-6)


def test_primitive_expansion_reproduces_functions():
    basis = make_basis_2b(RangeProgression(4, 0.3, 6.0), 1, 3, cr=True, omega_cr=1.5)
    z, W = basis.primitive_expansion()
    r = np.linspace(0, 10, 57)
    prims = r[:, None] * np.exp(-z[None, :] * r[:, None] ** 2)
    assert_allclose((prims @ W).real, basis.evaluate(r), atol=1e-13)
    assert_allclose((prims @ W).imag, 0, atol=1e-13)


@pytest.mark.parametrize("kwargs", [dict(l=0, dim=4), dict(l=2, dim=1), dict(l=-1, dim=3), dict(l=0, dim=3, cr=True, omega_cr=0.0)])
def test_make_basis_rejects(kwargs):
    with pytest.raises(InvalidBasis):
        make_basis_2b(RangeProgression(4, 0.1, 1.0), **kwargs)
