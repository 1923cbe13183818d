import numpy as np
import pytest

from modsg import bootstrap as bs
from modsg.errors import DomainError, PrecisionError, ResonanceError, ValidationError
from modsg.model import make_model

from conftest import tau_for

PROBES_X = np.array([0.13 + 0.05j, -0.31, 0.42 - 0.1j, 0.07])


def _probes(params):
    return np.exp(2 * np.pi * params.b * PROBES_X)


@pytest.fixture
def n2_state(params):
    spec = make_model(params, [0.2, -0.2], tau=tau_for(params, 1e-2))
    return bs.bootstrap_run(spec, [0.31, -0.31], 3)


@pytest.fixture
def n3_state(p4):
    spec = make_model(p4, [0.3, -0.1, -0.2], [-0.25, 0.05, 0.2], tau=tau_for(p4, 2e-2), symmetric=False)
    return bs.bootstrap_run(spec, [0.4, -0.05, -0.35], 4)


def test_linear_system_residuals(n2_state, n3_state):
    for st in (n2_state, n3_state):
        assert max(st.residuals) < 1e-12
        assert max(st.endpoint_residuals, default=0.0) < 1e-12


def test_T0_and_TN_endpoints(n3_state):
    st = n3_state
    # T_m has the prescribed degree N with the expected constant structure
    for T in st.T:
        assert T.degree <= st.N


def test_T_symmetry_symmetric_model(n2_state):
    st = n2_state
    assert st.mirror_check < 1e-12


def test_chi_equations_truncation(n2_state):
    st = n2_state
    u = _probes(st.params)
    bound = abs(st.t) ** (2 * (st.order + 1))
    scale = np.max(np.abs(bs.chi_plus(u, st)))
    assert np.max(bs.chi_plus_residual(u, st)) < 10 * bound * scale
    assert np.max(bs.chi_minus_residual(u, st)) < 10 * bound * scale


def test_symmetric_chi_minus(n2_state):
    u = _probes(n2_state.params)
    assert np.max(np.abs(bs.chi_minus(u, n2_state) - bs.chi_minus_symmetric(u, n2_state))) < 1e-12


def test_wronskian_zeros_are_inputs(n3_state):
    rep = bs.w_root_drift(n3_state)
    assert rep.count == 3
    assert np.max(rep.drift) < 1e-10
    assert rep.rho_spread < 1e-8 * abs(rep.rho)


def test_count_w_zeros(n2_state):
    n, _ = bs.count_w_zeros(n2_state)
    assert n == 2


def test_dual_is_conjugate_for_real_data(params):
    spec = make_model(params, [0.2, -0.2], tau=tau_for(params, 1e-2))
    st = bs.bootstrap_run(spec, [0.31, -0.31], 2)
    sd = bs.bootstrap_run(spec, [0.31, -0.31], 2, dual=True)
    for Tp, Td in zip(st.T, sd.T):
        assert np.max(np.abs(np.conj(Tp.padded(3)) - Td.padded(3))) < 1e-13


def test_resonance_detected(p4):
    spec = make_model(p4, [0.2, -0.2], tau=-0.5)
    with pytest.raises(ResonanceError):
        bs.bootstrap_run(spec, [0.0, 0.0], 2)


def test_roots_must_be_centered(p4):
    spec = make_model(p4, [0.2, -0.2], tau=-0.5)
    with pytest.raises((ValidationError, DomainError)):
        bs.bootstrap_run(spec, [0.3, 0.1], 2)


def test_negative_order(p4):
    spec = make_model(p4, [0.2, -0.2], tau=-0.5)
    with pytest.raises(DomainError):
        bs.bootstrap_run(spec, [0.3, -0.3], -1)


def test_zero_asymptotics_n2(p4):
    spec = make_model(p4, [0.2, -0.2], tau=tau_for(p4, 1e-3))
    st = bs.bootstrap_run(spec, [0.3, -0.3], 4)
    rp, rm = bs.zero_asymptotics(st, 1).relative_errors()
    assert np.max(rp) < 1e-2 and np.max(rm) < 1e-2


def test_zero_asymptotics_precision_guard(p4):
    spec = make_model(p4, [0.2, -0.2], tau=tau_for(p4, 1e-7))
    st = bs.bootstrap_run(spec, [0.3, -0.3], 2)
    with pytest.raises(PrecisionError):
        bs.zero_asymptotics(st, 2)


def test_footnote_scaling(p4):
    # the chi_+ Taylor coefficients decay like |q|^{kappa n(n+1)}, kappa ~ 1/N
    spec = make_model(p4, [0.2, -0.2], tau=tau_for(p4, 1e-2))
    st = bs.bootstrap_run(spec, [0.3, -0.3], 3)
    fit = bs.footnote_fit(bs.chi_plus_coefficients(st, 10), st.q)
    assert abs(fit["kappa"] - 0.5) < 0.05


def test_state_json_roundtrip(n2_state):
    import json
    doc = json.loads(bs.state_json(n2_state))
    assert doc["N"] == 2 and len(doc["T"]) == n2_state.order + 1
