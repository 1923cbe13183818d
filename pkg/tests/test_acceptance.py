"""Acceptance suite: one PASS/FAIL line per criterion (see the pytest summary)."""
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from modsg import bootstrap as bs
from modsg import thermo as th
from modsg.model import make_model
from modsg.modular import make_modular_params
from modsg.selftest import identity_residuals, run_selftest
from modsg.spectral import parity_bisect, solve_bae, tq_residuals
from modsg.toy import toy_report

from conftest import THETAS, tau_for

ROOT = Path(__file__).resolve().parents[1]
P4 = make_modular_params(np.pi / 4)


def test_criterion_1_special_functions(criterion):
    c = criterion(1, "special-function identities, 20 random x, three theta")
    t0 = time.perf_counter()
    rep = run_selftest(thetas=THETAS, n_points=20, seed=1, tol_product=1e-9, tol_quadrature=1e-7)
    dt = time.perf_counter() - t0
    prod = max(ch["residual"] for ch in rep["checks"] if ch["form"] == "product")
    quad = max(ch["residual"] for ch in rep["checks"] if ch["form"] == "quadrature")
    c.check(prod <= 1e-9, f"product max {prod:.1e} <= 1e-9")
    c.check(quad <= 1e-7, f"quadrature max {quad:.1e} <= 1e-7")
    c.check(dt <= 10, f"runtime {dt:.2f}s <= 10s")
    c.finish()


def test_criterion_2_representations(criterion):
    c = criterion(2, "product vs contour log phi; phi2 shift")
    rng = np.random.default_rng(2)
    xs = np.sort(rng.uniform(-2, 2, 20))
    worst_pq, worst_shift = 0.0, 0.0
    for th_ in THETAS:
        r = identity_residuals(make_modular_params(th_), xs)
        worst_pq = max(worst_pq, r["phi_product_vs_quadrature"][1])
        worst_shift = max(worst_shift, r["phi2_shift"][1])
    c.check(worst_pq <= 1e-7, f"product vs quadrature {worst_pq:.1e} <= 1e-7")
    c.check(worst_shift <= 1e-7, f"phi2 shift {worst_shift:.1e} <= 1e-7")
    c.finish()


def test_criterion_3_toy_oracle(criterion):
    c = criterion(3, "N=1 bootstrap vs closed forms, M=6")
    t0 = time.perf_counter()
    spec = make_model(P4, [0.15], [-0.15], tau=-0.4)
    r = toy_report(spec, 6)
    dt = time.perf_counter() - t0
    worst = max(row["abs_err"] / max(abs(row["closed"]), 1.0) for row in r["coefficients"])
    c.check(r["max_coeff_rel_err"] <= 1e-10, f"coefficient rel err {r['max_coeff_rel_err']:.1e}")
    c.check(worst <= 1e-10, f"coefficient err {worst:.1e} <= 1e-10")
    c.check(r["W_max_err"] <= 1e-9, f"W err {r['W_max_err']:.1e} <= 1e-9")
    c.check(r["T1_err"] <= 1e-11 and r["T_higher_max"] <= 1e-11,
            f"T1 err {r['T1_err']:.1e}, max|T_m>=2| {r['T_higher_max']:.1e} <= 1e-11")
    c.check(dt <= 5, f"runtime {dt:.2f}s <= 5s")
    c.finish()


def test_criterion_4_wronskian_shift(criterion):
    c = criterion(4, "W quasi-periodicity, N=2, |t^2| = 1e-2")
    rng = np.random.default_rng(4)
    ratios, bound_ok = [], True
    for th_ in (np.pi / 4, np.pi / 3):
        p = make_modular_params(th_)
        t2 = 1e-2
        for _ in range(2):
            a = rng.uniform(0.05, 0.35)
            r = rng.uniform(0.1, 0.6)
            spec = make_model(p, [a, -a], tau=tau_for(p, t2))
            u = np.exp(2 * np.pi * p.b * np.array([0.13 + 0.05j, -0.31, 0.42 - 0.1j, 0.07]))
            res = []
            for M in range(4):
                st = bs.bootstrap_run(spec, [r, -r], M)
                scale = np.max(np.abs(bs.wronskian(u, st)))
                res.append(np.max(bs.wshift_residual(u, st)) / scale)
                bound_ok &= res[-1] <= 10 * t2 ** (M + 1)
            ratios += [res[M + 1] / res[M] for M in range(3) if res[M + 1] > 1e-14]
    c.check(bound_ok, "residual <= 10 |t|^{2(M+1)} for M = 0..3")
    c.check(max(ratios) <= 2 * 1e-2,
            f"per-order decrease factor <= 2|t|^2 (observed {min(ratios):.1e}..{max(ratios):.1e})")
    c.finish()


def test_criterion_5_zero_asymptotics(criterion):
    c = criterion(5, "first zero family of chi_+ at |t^2| = 1e-3")
    worst = 0.0
    for alpha, roots in (([0.12], [0.0]), ([0.2, -0.2], [0.3, -0.3]),
                         ([0.25, 0.05, -0.3], [0.4, -0.1, -0.3])):
        spec = make_model(P4, alpha, tau=tau_for(P4, 1e-3))
        st = bs.bootstrap_run(spec, roots, 4)
        rp, _ = bs.zero_asymptotics(st, 1).relative_errors()
        worst = max(worst, float(np.max(rp)))
    c.check(worst <= 1e-2, f"relative error of the t^2 correction {worst:.1e} <= 1e-2")
    spec = make_model(P4, [0.12], [-0.12], tau=-0.3)
    st = bs.bootstrap_run(spec, [0.0], 2)
    q, a = P4.q, spec.a
    exact = (1 + q * a) * (1 + q / a) / (1 - q * q)
    err = abs(bs.delta_prime(st, 0, 1) - exact)
    c.check(err <= 1e-10, f"N=1 Delta' analytic value err {err:.1e} <= 1e-10")
    c.finish()


def test_criterion_6_bae_solve(criterion):
    c = criterion(6, "N=2 symmetric BAE solve")
    t0 = time.perf_counter()
    spec = make_model(P4, [0.2, -0.2], tau=-0.5)
    M = 3
    st = solve_bae(spec, th.quantile_seeds(spec), M, tol=1e-10, max_iter=30)
    c.check(st.iterations <= 30 and st.residual <= 1e-8,
            f"{st.iterations} Newton steps, residual {st.residual:.1e} <= 1e-8")
    s = abs(st.roots[0])
    sb, val = parity_bisect(spec, M, s - 0.05, s + 0.05)
    c.check(abs(sb - s) <= 1e-8, f"bisection oracle |dx| {abs(sb - s):.1e} <= 1e-8")
    dxi = min(abs(st.xi - 1), abs(st.xi + 1))
    c.check(dxi <= 1e-8, f"xi = {st.xi.real:+.0f} to {dxi:.1e}")
    bound = abs(spec.t) ** (2 * (M + 1))
    tq = [max(tq_residuals(x, st.context, st.xi)) for x in (0.11, -0.37, 0.58, -0.8, 0.23 + 0.1j)]
    c.check(max(tq) <= bound, f"TQ residuals {max(tq):.1e} <= |t|^{2 * (M + 1)} = {bound:.1e}")
    dt = time.perf_counter() - t0
    c.check(dt <= 120, f"runtime {dt:.1f}s <= 120s")
    c.finish()


def test_criterion_7_thermo(criterion):
    c = criterion(7, "thermodynamic ground-state suite")
    hom = th.homogeneous_model(0.1)
    r = th.verify_primeq(hom, P4, np.linspace(-2, 2, 21))
    c.check(r <= 1e-8, f"primeq {r:.1e} <= 1e-8")
    m0, _, m2 = th.density_moments(hom, P4)
    c.check(abs(m0 - 1) <= 1e-9, f"int P - 1 = {abs(m0 - 1):.1e}")
    c.check(abs(m2 - P4.eta ** 2 - 0.01) <= 1e-8, f"S_P - eta^2 - mu^2 = {abs(m2 - P4.eta ** 2 - 0.01):.1e}")
    d = max(th.phi_integral_1(x, hom, P4)[2] for x in (-1.5, -0.4, 0.2, 1.1))
    c.check(d <= 1e-6, f"Phi1 dual forms {d:.1e} <= 1e-6")
    xs = (-0.7, 0.4, 1.5)
    ci = max(abs(th.closed_form_I(x, "+", P4) - th.direct_I(x, "+", P4)) for x in xs)
    c.check(ci <= 1e-7, f"I+ closed vs direct {ci:.1e} <= 1e-7")
    jump = max(abs(th.direct_I(x, "+", P4) - th.direct_I(x, "-", P4) - 2j * np.pi * th.y_of_x(x, P4))
               for x in xs)
    c.check(jump <= 1e-7, f"I+ - I- - 2 pi i y {jump:.1e} <= 1e-7")
    dmax = max(th.delta_negativity(x, hom, P4) for x in np.linspace(-3, 3, 61))
    c.check(dmax < 0, f"max delta on 61 points {dmax:.2e} < 0")
    sh = max(abs(th.shift_2ieta_residual(x, hom, P4)) for x in (-1.0, 0.3, 2.0))
    c.check(sh <= 1e-6, f"2i eta shift {sh:.1e} <= 1e-6")
    c.finish()


def test_criterion_8_bae_integral_identity(criterion):
    c = criterion(8, "density-form BAE identity, asymmetric Gaussians")
    model = th.gaussian_model(0.1, 0.2, 0.35)
    r = th.bae_integral_identity([-0.8, -0.2, 0.3, 0.9], model, P4)
    # expected value from an independent moment computation (closed-form Gaussian variances)
    S_A, S_B = 0.1 ** 2 + 0.2 ** 2, 0.1 ** 2 + 0.35 ** 2
    expected = 1j * np.pi * (S_B - S_A) / 2
    err = abs(r["values"].mean() - expected)
    c.check(r["spread"] <= 1e-6, f"spread {r['spread']:.1e} <= 1e-6")
    c.check(err <= 1e-5, f"|value - i pi (S_B - S_A)/2| = {err:.1e} <= 1e-5")
    c.finish()


def _run_cli(*args):
    return subprocess.run([sys.executable, "-m", "modsg", *args], capture_output=True, check=True).stdout


def test_criterion_9_reproducibility(criterion, tmp_path):
    c = criterion(9, "byte-identical toy and thermo outputs")
    toy_cfg = str(ROOT / "configs" / "toy.json")
    thermo_cfg = str(ROOT / "configs" / "thermo_homogeneous.json")
    for name, args in (("toy json", ["toy", "--config", toy_cfg]),
                       ("toy csv", ["toy", "--config", toy_cfg, "--format", "csv"]),
                       ("thermo csv", ["thermo", "--config", thermo_cfg]),
                       ("thermo json", ["thermo", "--config", thermo_cfg, "--format", "json",
                                        "--grid=-1:1:0.25"])):
        a, b = _run_cli(*args), _run_cli(*args)
        c.check(a == b and len(a) > 0, f"{name} identical ({len(a)} bytes)")
    c.finish()


if __name__ == "__main__":
    import pytest

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
