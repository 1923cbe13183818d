"""Closed forms for the one-site chain (N = 1, u_1 = 1)."""
import numpy as np

from .bootstrap import bootstrap_run, chi_plus, wronskian
from .modular import qpoch, theta1
from .qseries import CPoly


def _c(m, q, a, b):
    q2 = q * q
    return (q ** (m * (m + 1)) * (-1) ** m * qpoch(-q * a, q2, m) * qpoch(-q * b, q2, m)
            / qpoch(q2, q2, m))


def _inverse_poch_series(q2, m, K):
    """Coefficients g_k of t^{2k} in 1/(q^2 t^2; q^2)_m, k <= K."""
    g = np.zeros(K + 1, dtype=complex)
    g[0] = 1.0
    for i in range(1, m + 1):
        geo = (q2 ** i) ** np.arange(K + 1)
        g = np.convolve(g, geo)[: K + 1]
    return g


def closed_form_F(spec, M):
    """F_0..F_M of the one-site chain, from the exact q-series."""
    q = spec.params.q
    q2 = q * q
    a, b = spec.a, spec.bparam
    out = []
    for Mp in range(M + 1):
        acc = CPoly([0.0])
        for m in range(Mp + 1):
            g = _inverse_poch_series(q2, m, Mp - m)[Mp - m]
            term = np.zeros(m + 1, dtype=complex)
            term[m] = _c(m, q, a, b) * g
            poly = CPoly(term)
            for j in range(m + 1, Mp + 1):
                poly = poly * CPoly([1.0, -q2 ** j])
            acc = acc + poly
        out.append(acc)
    return out


def closed_form_chi_plus(u, spec, mmax=60):
    """chi_+(u) summed directly in m (not expanded in t)."""
    q = spec.params.q
    q2 = q * q
    a, b, t2 = spec.a, spec.bparam, spec.t ** 2
    u = np.asarray(u, dtype=complex)
    out = np.zeros_like(u)
    for m in range(mmax):
        term = (_c(m, q, a, b) * t2 ** m / qpoch(q2 * t2, q2, m)) * u ** m
        out = out + term * qpoch(q2 ** (m + 1) * u, q2)
        if abs(q) ** (m * (m + 1)) * abs(t2) ** m < 1e-300:
            break
    return out if out.ndim else complex(out)


def closed_form_W(u, spec):
    q = spec.params.q
    q2 = q * q
    t2 = spec.t ** 2
    pref = (qpoch(-q * t2 * spec.a, q2) * qpoch(-q * t2 * spec.bparam, q2)
            / qpoch(q2 * t2, q2) ** 2)
    return pref * theta1(u, spec.params)


def toy_report(spec, M, probes=None):
    """Bootstrap the one-site chain and compare with the closed forms."""
    if spec.N != 1:
        raise ValueError("toy comparison needs N = 1")
    if probes is None:
        probes = np.exp(2 * np.pi * spec.params.b * np.array([-0.4, -0.1 + 0.05j, 0.25, 0.6 - 0.1j]))
    st = bootstrap_run(spec, [0.0], M)
    Fc = closed_form_F(spec, M)
    rows = []
    for m in range(M + 1):
        n = max(len(Fc[m].coeffs), len(st.F[m].coeffs))
        cb, cc = st.F[m].padded(n), Fc[m].padded(n)
        for k in range(n):
            rel = abs(cb[k] - cc[k]) / max(abs(cc[k]), 1e-300)
            rows.append({"m": m, "k": k, "bootstrap": complex(cb[k]), "closed": complex(cc[k]),
                         "abs_err": float(abs(cb[k] - cc[k])), "rel_err": float(rel)})
    W_b = wronskian(probes, st)
    W_c = closed_form_W(probes, spec)
    chi_b = chi_plus(probes, st)
    chi_c = closed_form_chi_plus(probes, spec)
    T1_err = float(np.max(np.abs(st.T[1].padded(2) - np.array([1.0, -1.0])))) if M >= 1 else 0.0
    Thigh = max((float(np.max(np.abs(T.coeffs))) for T in st.T[2:]), default=0.0)
    return {
        "state": st,
        "coefficients": rows,
        "max_coeff_abs_err": max(r["abs_err"] for r in rows),
        "max_coeff_rel_err": max(r["rel_err"] for r in rows if abs(r["closed"]) > 0),
        "W_max_err": float(np.max(np.abs(W_b - W_c))),
        "chi_max_err": float(np.max(np.abs(chi_b - chi_c))),
        "T1_err": T1_err,
        "T_higher_max": Thigh,
        "endpoint_residual": max(st.endpoint_residuals, default=0.0),
        "truncation": float(abs(spec.t) ** (2 * (M + 1))),
    }
