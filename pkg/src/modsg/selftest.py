"""Special-function identity suite (product and quadrature forms)."""
import numpy as np

from .modular import (jacobi_ratio_check, log_one_minus_uus, log_phi, log_phi2,
                      log_phi_quadrature, make_modular_params, theta1)

DEFAULT_THETAS = (np.pi / 4, np.pi / 3, 0.5)


def _wrap(z):
    """Distance of a log difference from 0 modulo 2 pi i."""
    z = np.asarray(z, dtype=complex)
    return np.abs(z.real + 1j * np.angle(np.exp(1j * z.imag)))


def identity_residuals(params, xs):
    """Max abs residual of each identity over real probe points xs."""
    eta, cb = params.eta, params.c_b
    xs = np.asarray(xs, dtype=float)
    lp = lambda x: log_phi(x, params)
    q2 = params.q2
    w = params.u(xs)
    out = {}
    # product forms
    out["phi_inversion"] = ("product", np.max(np.abs(
        lp(xs) + lp(-xs) - 1j * np.pi * xs ** 2 - 1j * np.pi * cb)))
    out["phi_shift"] = ("product", np.max(_wrap(
        lp(xs - 1j * eta) - lp(xs + 1j * eta) - log_one_minus_uus(xs, params))))
    # relative form: theta1 grows like |u| along the real axis
    out["theta1_quasiperiod"] = ("product", np.max(np.abs(
        -w * theta1(q2 * w, params) / theta1(w, params) - 1)))
    out["jacobi"] = ("product", max(jacobi_ratio_check(x, params) for x in xs))
    # quadrature forms
    lq = np.array([log_phi_quadrature(x, params) for x in xs])
    lqm = np.array([log_phi_quadrature(-x, params) for x in xs])
    out["phi_inversion_quadrature"] = ("quadrature", np.max(np.abs(
        lq + lqm - 1j * np.pi * xs ** 2 - 1j * np.pi * cb)))
    out["phi_product_vs_quadrature"] = ("quadrature", np.max(np.abs(lq - lp(xs))))
    l2 = np.array([log_phi2(x, params) for x in xs])
    l2m = np.array([log_phi2(-x, params) for x in xs])
    out["phi2_inversion"] = ("quadrature", np.max(np.abs(
        l2 + l2m - 1j * np.pi * xs ** 2 / 2 - 2j * np.pi * cb - 1j * np.pi / 4)))
    l2p = np.array([log_phi2(x + 1j * eta, params) for x in xs])
    l2n = np.array([log_phi2(x - 1j * eta, params) for x in xs])
    out["phi2_shift"] = ("quadrature", np.max(np.abs(l2p + l2n - lp(xs))))
    return {k: (kind, float(v)) for k, (kind, v) in out.items()}


def run_selftest(thetas=DEFAULT_THETAS, n_points=20, seed=0, tol_product=1e-9,
                 tol_quadrature=1e-7, x_range=(-2.0, 2.0)):
    """Run the suite; returns a report dict with a per-check pass flag."""
    rng = np.random.default_rng(seed)
    xs = np.sort(rng.uniform(*x_range, n_points))
    checks = []
    for th in thetas:
        params = make_modular_params(th)
        for name, (kind, res) in identity_residuals(params, xs).items():
            tol = tol_product if kind == "product" else tol_quadrature
            checks.append({"theta": float(th), "identity": name, "form": kind,
                           "residual": res, "tol": tol, "pass": bool(res <= tol)})
    return {"points": xs.tolist(), "checks": checks,
            "passed": all(c["pass"] for c in checks)}
