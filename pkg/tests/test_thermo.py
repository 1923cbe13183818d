import numpy as np
import pytest
from scipy import integrate

from modsg import thermo as th
from modsg.errors import BranchError, PoleError, ValidationError
from modsg.modular import log_phi2


@pytest.fixture
def hom():
    return th.homogeneous_model(0.1)


@pytest.fixture
def gauss():
    return th.gaussian_model(0.1, 0.2, 0.35)


def test_kernel_values(p4):
    assert abs(th.kernel_K(0.0, p4) - 1 / (4 * p4.eta)) < 1e-15
    assert abs(th.kernel_K(0.0, p4) - 0.353553) < 1e-6
    x = 0.37
    assert abs(th.kernel_K(x + 1j * p4.eta, p4) + th.kernel_K(x - 1j * p4.eta, p4)) < 1e-14
    with pytest.raises(PoleError):
        th.kernel_K(1j * p4.eta, p4)


def test_kernel_fourier(p4):
    y = 0.3
    assert abs(th.kernel_fourier(y, p4) - 1 / (2 * np.cosh(2 * np.pi * p4.eta * y))) < 1e-8


def test_y_is_antiderivative(p4):
    h = 1e-5
    for x in (0.0, 0.5):
        d = (th.y_of_x(x + h, p4) - th.y_of_x(x - h, p4)) / (2 * h)
        assert abs(d - th.kernel_K(x, p4)) < 1e-7
    assert abs(th.y_of_x(-30.0, p4)) < 1e-12


def test_p_context(p4):
    ctx = th.ThermoContext(p4)
    assert ctx.minus_ip_check() < 1e-14


def test_density_validation():
    with pytest.raises(ValidationError):
        th.DensityModel(th.AtomDensity([0.1], [0.5]), th.AtomDensity([-0.1], [1.0]), 0.1)
    with pytest.raises(ValidationError):
        th.DensityModel(th.AtomDensity([0.2], [1.0]), th.AtomDensity([-0.1], [1.0]), 0.1)


def test_ground_density_closed_form(p4, hom):
    assert abs(th.ground_density(0.0, hom, p4) - th.ground_density_closed(0.0, 0.1, p4)) < 1e-14


@pytest.mark.parametrize("model", [th.homogeneous_model(0.1), th.gaussian_model(0.1, 0.2, 0.35),
                                   th.atom_model([0.3, -0.1], [0.5, 0.5], [-0.4, 0.2], [0.5, 0.5])])
def test_moments(p4, model):
    m0, m1, m2 = th.density_moments(model, p4)
    assert abs(m0 - 1) < 1e-9
    assert abs(m1) < 1e-9
    assert abs(m2 - (p4.eta ** 2 + (model.S_A + model.S_B) / 2)) < 1e-7


def test_primeq(p4, hom, gauss):
    y = np.linspace(-2, 2, 9)
    assert th.verify_primeq(hom, p4, y) < 1e-8
    assert th.verify_primeq(gauss, p4, y) < 1e-6


def test_phi_integrals(p4, hom):
    v1, v2, d = th.phi_integral_1(0.2, hom, p4)
    assert d < 1e-6
    a = th.phi_integral_2(0.35, hom, p4)[0]
    b = th.phi_integral_1(-0.35, hom, p4)[0]
    assert abs(a - b) < 1e-8
    z = th.homogeneous_model(0.0)
    assert abs(th.phi_integral_1(0.3, z, p4)[0] - 2 * log_phi2(0.3 + 1j * p4.eta, p4)) < 1e-8


@pytest.mark.parametrize("x", [0.4, -0.7, 1.5])
def test_I_closed_vs_direct(p4, x):
    for br in "+-":
        assert abs(th.closed_form_I(x, br, p4) - th.direct_I(x, br, p4)) < 1e-7
    jump = th.direct_I(x, "+", p4) - th.direct_I(x, "-", p4)
    assert abs(jump - 2j * np.pi * th.y_of_x(x, p4)) < 1e-7


def test_I_strip(p4):
    with pytest.raises(BranchError):
        th.closed_form_I(0.1 + 1.5j * p4.eta, "+", p4)


def test_log_T0_density(p4, gauss):
    c, d = th.log_T0_density(0.3, gauss, p4, "+")
    assert abs(c - d) < 1e-7


def test_delta(p4, hom, gauss):
    assert th.delta_negativity(0.0, hom, p4) < 0
    for x in (0.0, 0.5, -1.0):
        for m in (hom, gauss):
            assert abs(th.delta_negativity(x, m, p4) - th.delta_direct(x, m, p4)) < 1e-8


def test_delta_direct_quadrature_oracle(p4, gauss):
    # independent scipy.integrate.quad evaluation of the Gaussian-weighted log tanh
    x = 0.2
    sing = x - p4.sigma
    f = lambda x0, pdf: pdf(x0) * np.log(np.tanh(abs(np.pi * (x - x0 - p4.sigma) / (4 * p4.eta))))
    tot = 0.0
    for d in (gauss.PA, gauss.PB):
        tot += integrate.quad(f, -10, 10, args=(d.pdf,), points=[sing], limit=400)[0]
    assert abs(th.delta_negativity(x, gauss, p4) - tot) < 1e-8


def test_shift_2ieta(p4, hom, gauss):
    for m in (hom, gauss):
        assert abs(th.shift_2ieta_residual(0.3, m, p4)) < 1e-6


def test_bae_identity_symmetric(p4):
    two = th.atom_model([0.3, -0.1], [0.5, 0.5], [0.1, -0.3], [0.5, 0.5])
    for m in (th.homogeneous_model(0.1), two):
        r = th.bae_integral_identity([-0.5, 0.0, 0.7], m, p4)
        assert r["spread"] < 1e-6
        assert abs(r["values"].mean()) < 1e-6


def test_quantile_seeds_symmetric(p4):
    from modsg.model import make_model
    spec = make_model(p4, [0.3, 0.1, -0.1, -0.3], tau=-0.5)
    s = th.quantile_seeds(spec)
    model = th.density_from_spec(spec)
    assert np.allclose(s, -s[::-1], atol=1e-12)
    for k, v in enumerate(s, 1):
        assert abs(th.cdf(v, model, p4) - (k - 0.5) / 4) < 1e-10


def test_profiles(p4, hom):
    xs = np.linspace(-1, 1, 5)
    for f in th.PROFILE_FUNCTIONS:
        v = th.profile(f, xs, hom, p4)
        assert v.shape == xs.shape
    with pytest.raises(ValueError):
        th.profile("nope", xs, hom, p4)
