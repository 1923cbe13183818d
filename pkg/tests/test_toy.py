import numpy as np
import pytest

from modsg import bootstrap as bs
from modsg.model import make_model
from modsg.toy import closed_form_chi_plus, closed_form_W, toy_report


def test_toy_report(n1_spec):
    r = toy_report(n1_spec, 6)
    assert r["max_coeff_rel_err"] < 1e-10
    assert r["W_max_err"] < 1e-9
    assert r["T1_err"] < 1e-11 and r["T_higher_max"] < 1e-11


def test_toy_needs_n1(n2_sym):
    with pytest.raises(ValueError):
        toy_report(n2_sym, 2)


@pytest.mark.parametrize("mu", [0.0, 0.1, -0.25])
def test_closed_chi_solves_equation(params, mu):
    spec = make_model(params, [mu], [-mu], tau=-0.3)
    st = bs.bootstrap_run(spec, [0.0], 8)
    u = np.exp(2 * np.pi * params.b * np.array([-0.3, 0.2 + 0.1j]))
    assert np.max(np.abs(bs.chi_plus(u, st) - closed_form_chi_plus(u, spec))) < 1e-9
    assert np.max(np.abs(bs.wronskian(u, st) - closed_form_W(u, spec))) < 1e-9


def test_delta_prime_n1(params):
    mu = 0.13
    spec = make_model(params, [mu], [-mu], tau=-0.3)
    st = bs.bootstrap_run(spec, [0.0], 2)
    q, a = params.q, spec.a
    expected = (1 + q * a) * (1 + q / a) / (1 - q * q)
    assert abs(bs.delta_prime(st, 0, 1) - expected) < 1e-10
