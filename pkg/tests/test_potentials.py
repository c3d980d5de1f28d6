import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import gamma

from fewbody.errors import IntegrationFailure, OutOfRange, UnsupportedComplexEvaluation, ValidationError
from fewbody.potentials import (
    FULL_LINE,
    HALF_LINE,
    CallablePotential,
    ContactPotential1D,
    GaussianPotential,
    KernelRequest,
    PotentialModel,
    TabulatedPotential,
    as_potential,
    build_alpha_interpolant,
    eval_potential,
    load_tabulated,
    radial_kernel,
)

ALPHAS = np.array([0.01, 1.0, 100.0])


def quadrature(p, n, alpha, domain=HALF_LINE, theta=0.0):
    """Force the generic numerical route even for closed-form models."""
    return PotentialModel.kernel(p, n, alpha, domain, theta)


def test_point_values():
    assert eval_potential(GaussianPotential(-10, 1), 0.0) == -10
    assert eval_potential("-1/r", 2.0) == -0.5
    z = np.exp(1j * np.pi / 9)
    assert_allclose(eval_potential(GaussianPotential(-10, 1), z), -10 * np.exp(-np.exp(2j * np.pi / 9)), rtol=1e-15)


def test_gaussian_requires_positive_width():
    with pytest.raises(ValidationError):
        GaussianPotential(-1.0, 0.0)


def test_tabulated_validation_and_complex_refusal():
    with pytest.raises(ValidationError):
        TabulatedPotential(np.array([0.0, 1.0, 1.0]), np.zeros(3))
    with pytest.raises(ValidationError):
        TabulatedPotential(np.array([0.0, 1.0]), np.array([0.0, np.inf]))
    tab = TabulatedPotential(np.linspace(0, 5, 11), np.ones(11))
    with pytest.raises(UnsupportedComplexEvaluation):
        eval_potential(tab, np.array([1 + 1j]))
    with pytest.raises(UnsupportedComplexEvaluation):
        tab.kernel(2, 1.0, theta=0.1)
    assert tab(6.0) == 0.0


def test_gaussian_closed_form_kernel():
    V0, mu = 3.0, 0.7
    got = radial_kernel(GaussianPotential(-V0, mu), KernelRequest(2, ALPHAS))
    assert_allclose(got, -V0 * np.sqrt(np.pi) / (4 * (ALPHAS + mu) ** 1.5), rtol=1e-14)


def test_coulomb_like_kernel_by_substitution():
    got = radial_kernel(CallablePotential(lambda r: 1 / r), KernelRequest(2, ALPHAS))
    assert_allclose(got, 1 / (2 * ALPHAS), rtol=1e-12)


def test_kernel_request_validation():
    with pytest.raises(ValidationError):
        KernelRequest(-1, 1.0)
    with pytest.raises(ValidationError):
        KernelRequest(0, -1.0)


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
@pytest.mark.parametrize("domain", [HALF_LINE, FULL_LINE])
def test_gaussian_closed_form_matches_quadrature(n, domain):
    g = GaussianPotential(-2.5, 0.8)
    exact = g.kernel(n, ALPHAS, domain)
    numeric = quadrature(g, n, ALPHAS, domain)
    assert_allclose(numeric, exact, rtol=1e-10, atol=1e-300 if domain == HALF_LINE or n % 2 == 0 else 1e-14)


@pytest.mark.parametrize("theta", [0.2, 0.6])
def test_gaussian_rotated_kernel_matches_quadrature(theta):
    g = GaussianPotential(-2.5, 0.8)
    assert_allclose(quadrature(g, 2, ALPHAS, HALF_LINE, theta), g.kernel(2, ALPHAS, HALF_LINE, theta), rtol=1e-10)


def test_contact_sifting():
    c = ContactPotential1D(-1.3, 0.4)
    got = c.kernel(1, ALPHAS)
    assert_allclose(got, -1.3 * 0.4 * np.exp(-ALPHAS * 0.16), rtol=1e-14)
    assert_allclose(ContactPotential1D(2.0).kernel(0, ALPHAS), 2.0)
    assert_allclose(ContactPotential1D(2.0).kernel(1, ALPHAS), 0.0)


def test_contact_has_no_point_value():
    with pytest.raises(TypeError):
        ContactPotential1D(1.0)(0.5)


def test_tabulated_gaussian_kernel(tmp_path):
    r = np.linspace(0, 12, 2401)
    path = tmp_path / "v.dat"
    np.savetxt(path, np.column_stack([r, -10 * np.exp(-r**2)]), header="r V")
    tab = load_tabulated(path)
    exact = GaussianPotential(-10, 1).kernel(2, ALPHAS)
    assert_allclose(tab.kernel(2, ALPHAS), exact, rtol=1e-6)


def test_linearity():
    v1, v2 = GaussianPotential(-1, 0.3), CallablePotential(lambda r: np.exp(-r) / r)
    combo = 2.0 * v1 + v2.scaled(-0.5)
    assert_allclose(combo.kernel(3, ALPHAS), 2 * v1.kernel(3, ALPHAS) - 0.5 * v2.kernel(3, ALPHAS), rtol=1e-12)
    assert_allclose(combo(1.3), 2 * v1(1.3) - 0.5 * v2(1.3), rtol=1e-14)


def test_divergent_integrand_is_reported():
    with pytest.raises(IntegrationFailure):
        as_potential("1/r^3").kernel(0, 1.0)


def test_interpolant_against_closed_form(rng):
    g = GaussianPotential(-10, 1)
    interp = build_alpha_interpolant(g, 2, 1e-4, 1e4, kmax_interpol=2000)
    probes = np.exp(rng.uniform(np.log(1e-4), np.log(1e4), 1000))
    assert_allclose(interp(probes), g.kernel(2, probes), rtol=1e-8)


def test_interpolant_constant_potential_power_law():
    const = CallablePotential(lambda r: 3.0 + 0 * r)
    interp = build_alpha_interpolant(const, 2, 1e-2, 1e2, kmax_interpol=64)
    a = np.geomspace(1e-2, 1e2, 333)
    assert_allclose(interp(a), 3.0 * gamma(1.5) / (2 * a**1.5), rtol=1e-8)


def test_interpolant_error_shrinks_with_grid():
    g = GaussianPotential(-1, 1)
    a = np.geomspace(1e-3, 1e3, 500)
    exact = g.kernel(0, a)
    errs = [np.max(np.abs(build_alpha_interpolant(g, 0, 1e-3, 1e3, k)(a) / exact - 1)) for k in (4, 8, 16, 32, 64)]
    assert errs[-1] < errs[0]
    assert all(b <= 2 * a_ for a_, b in zip(errs, errs[1:]))


def test_interpolant_out_of_range():
    interp = build_alpha_interpolant(GaussianPotential(-1, 1), 0, 0.1, 10.0, 16)
    with pytest.raises(OutOfRange):
        interp(np.array([0.01]))


def test_integrable_singularities_pass():
    # 1/r against the 3D measure and a log singularity stay finite
    assert np.isfinite(as_potential("-1/r").kernel(2, 1.0))
    assert np.isfinite(CallablePotential(lambda r: np.log(r)).kernel(0, 1.0))
    with pytest.raises(IntegrationFailure):
        as_potential("1/r").kernel(0, 1.0, FULL_LINE)
