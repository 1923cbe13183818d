"""t^2-expansion construction of chi_+, chi_-, the transfer matrix and W.

chi_+(u) = sum_m t^{2m} F_m(u) T0(q^{2(m+1)} u; q^2)_inf and
tT(u) = T0(u) + sum_{m>=1} t^{2m} T_m(u).  At each order m the q-difference
equation for chi_+ becomes a polynomial identity of degree (m+1)N; its
constant and top coefficients hold automatically and are checked, the rest
is a square linear system for F_m and the interior of T_m.

chi_- is obtained from the same machinery: with v = 1/u its equation has
exactly the chi_+ form for the mirrored model (alpha, beta, mu, x -> minus
themselves), so chi_-(u) = chi_+^mirror(1/u).
"""
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from . import kernels
from .errors import (DomainError, PrecisionError, ResonanceError, RootCountError,
                     SingularSystemError, ValidationError)
from .modular import theta1
from .qseries import CPoly, LinearSolution, linear_solve, model_polys, poly_from_factors, poly_from_roots, q_scale

RESONANCE_TOL = 1e-8
CENTER_TOL = 1e-12
PIVOT_TOL = 1e-13


@dataclass(eq=False)
class BootstrapState:
    spec: object            # ModelSpec in the view used (starred if dual)
    x: np.ndarray           # roots in the spectral plane
    u: np.ndarray           # e^{2 pi b x} for the view's b
    order: int
    F: list
    T: list
    residuals: list         # per-order max residual over all (m+1)N+1 equations
    endpoint_residuals: list
    dual: bool = False
    mirror: Optional["BootstrapState"] = None
    mirror_check: float = float("nan")
    polys: dict = field(default_factory=dict)

    @property
    def params(self):
        return self.spec.params

    @property
    def N(self):
        return self.spec.N

    @property
    def t(self):
        return self.spec.t

    @property
    def q(self):
        return self.spec.params.q

    def to_json(self):
        cj = lambda z: [float(np.real(z)), float(np.imag(z))]
        doc = {
            "dual": self.dual, "N": self.N, "order": self.order,
            "theta": self.params.theta, "tau": self.spec.tau,
            "alpha": list(self.spec.alpha), "beta": list(self.spec.beta), "mu": self.spec.mu,
            "x": [float(v) for v in self.x],
            "F": [p.to_json() for p in self.F],
            "T": [p.to_json() for p in self.T],
            "residuals": [float(r) for r in self.residuals],
        }
        return doc


def _check_roots(x, u, q2, M):
    x = np.asarray(x, dtype=float)
    if abs(np.sum(x)) > CENTER_TOL * max(1.0, np.max(np.abs(x), initial=0.0)) * len(x):
        raise ValidationError(f"roots must satisfy sum x = 0 (got {np.sum(x):.3e})")
    N = len(u)
    for i in range(N):
        for j in range(N):
            for k in range(0, M + 2):
                if i == j and k == 0:
                    continue
                if abs(u[i] * q2 ** k - u[j]) <= RESONANCE_TOL * abs(u[j]):
                    raise ResonanceError(f"roots {i} and {j} collide under q^{2 * k} shift")


def _graded_solve(A, rhs, nf):
    """Block solve of [[L, P], [Lb, Pb]] [g; tau] = [r; rb].

    L (nf x nf) is lower triangular with a dominant, q-graded diagonal, so
    forward substitution keeps every F coefficient relatively accurate even
    though the full matrix has a huge condition number.  The interior of T_m
    comes from the small Schur complement, solved with equilibrated LU.
    """
    L, P = A[:nf, :nf], A[:nf, nf:]
    Lb, Pb = A[nf:, :nf], A[nf:, nf:]
    r, rb = rhs[:nf], rhs[nf:]
    g0 = scipy.linalg.solve_triangular(L, r, lower=True)
    if P.shape[1] == 0:
        return LinearSolution(g0, 0.0, 1.0)
    G = scipy.linalg.solve_triangular(L, P, lower=True)
    S = Pb - Lb @ G
    sol = linear_solve(S, rb - Lb @ g0, pivot_tol=PIVOT_TOL)
    g = g0 - G @ sol.x
    return LinearSolution(np.concatenate([g, sol.x]), sol.residual, sol.cond)


def _bootstrap_polys(roots_u, C, q2, M, N):
    T0 = poly_from_roots(roots_u)
    F = [CPoly.one()]
    T = [T0]
    residuals, endpoint = [], []
    shifted = [q_scale(T0, q2 ** j) for j in range(M + 2)]
    for m in range(1, M + 1):
        deg = (m + 1) * N
        prodT = CPoly.one()
        for j in range(1, m + 1):
            prodT = prodT * shifted[j]
        rhs = -(C * q_scale(F[m - 1], q2))
        for k in range(1, m):
            pr = T[k] * F[m - k]
            for j in range(m - k + 1, m + 1):
                pr = pr * shifted[j]
            rhs = rhs + pr
        if m == 1:
            ends = np.zeros(N + 1, dtype=complex)
            ends[0], ends[N] = 1.0, (-1.0) ** N
            rhs = rhs + CPoly(ends) * prodT
        b = rhs.padded(deg + 1)
        cols = []
        Tm_shift = shifted[m]
        for j in range(1, m * N + 1):
            e = np.zeros(j + 1, dtype=complex)
            e[j] = 1.0
            col = (Tm_shift * CPoly(e * q2 ** (-j))) - (T0 * CPoly(e))
            cols.append(col.padded(deg + 1))
        for j in range(1, N):
            e = np.zeros(j + 1, dtype=complex)
            e[j] = 1.0
            cols.append((-(CPoly(e) * prodT)).padded(deg + 1))
        A = np.array(cols).T
        try:
            sol = _graded_solve(A[1:deg], b[1:deg], m * N)
        except SingularSystemError as exc:
            raise SingularSystemError(f"order {m}: {exc}", condition=exc.condition) from exc
        full = A @ sol.x - b
        scale = max(np.max(np.abs(b)), np.max(np.abs(A) @ np.abs(sol.x)), 1e-300)
        residuals.append(float(np.max(np.abs(full)) / scale))
        endpoint.append(float(max(abs(full[0]), abs(full[deg])) / scale))
        f = np.zeros(m * N + 1, dtype=complex)
        f[1:] = sol.x[: m * N]
        F.append(CPoly(f))
        tm = np.zeros(N + 1, dtype=complex)
        tm[1:N] = sol.x[m * N:]
        if m == 1:
            tm[0], tm[N] = 1.0, (-1.0) ** N
        T.append(CPoly(tm))
    return F, T, residuals, endpoint


def _single_run(spec, x, M, dual):
    p = spec.params
    q2 = p.q2
    x = np.asarray(x, dtype=float)
    u = np.exp(2 * np.pi * p.b * x)
    if len(x) != spec.N:
        raise ValidationError(f"expected {spec.N} roots, got {len(x)}")
    if not abs(spec.t) ** 2 < 1:
        raise ValidationError("|t^2| must be < 1")
    _check_roots(x, u, q2, M)
    polys = model_polys(spec)
    # A(q^2 u) B(u) = prod (1 + q u / a_nu)(1 + q u / b_nu)
    C = poly_from_factors(p.q / spec.a_nu) * poly_from_factors(p.q / spec.b_nu)
    F, T, res, endres = _bootstrap_polys(u, C, q2, M, spec.N)
    polys["C"] = C
    return BootstrapState(spec=spec, x=x, u=u, order=M, F=F, T=T, residuals=res,
                          endpoint_residuals=endres, dual=dual, polys=polys)


def _is_symmetric_roots(x, tol=1e-12):
    xs = np.sort(x)
    return np.allclose(xs, -xs[::-1], atol=tol, rtol=0)


def bootstrap_run(spec, roots, M, dual=False, mirror=True):
    """Build F_m, T_m for m <= M from roots x_nu; attach the chi_- mirror state.

    ``dual`` selects the starred view (q*, t*, a_nu*, b_nu*).
    """
    M = int(M)
    if M < 0:
        raise DomainError("order M must be >= 0")
    view = spec.star() if dual else spec
    state = _single_run(view, roots, M, dual)
    if mirror:
        mstate = _single_run(view.mirror(), -np.asarray(roots, dtype=float), M, dual)
        state.mirror = mstate
        state.mirror_check = mirror_consistency(state, mstate)
    return state


def mirror_consistency(state, mstate):
    """max |T_m(u) - (-u)^N T~_m(1/u)| coefficientwise, m <= M."""
    N = state.N
    worst = 0.0
    for Tm, Tt in zip(state.T, mstate.T):
        a = Tm.padded(N + 1)
        b = (-1.0) ** N * Tt.padded(N + 1)[::-1]
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


# evaluation

def _T0_inf(state, z):
    """T0(z; q^2)_inf = prod_nu (z/u_nu; q^2)_inf."""
    q2 = state.q * state.q
    out = np.ones_like(z)
    for un in state.u:
        out = out * kernels.qpoch_inf(z / un, q2)
    return out


def chi_plus(u, state, t=None):
    """chi_+ from the truncated t^2 series."""
    t = state.t if t is None else t
    t2 = t * t
    q2 = state.q * state.q
    u = np.asarray(u, dtype=complex)
    M = state.order
    T0 = state.T[0]
    # sum_m t^{2m} F_m(u) prod_{j=m+1}^{M} T0(q^{2j} u), nested from m = 0 up
    acc = state.F[0](u) * np.ones_like(u)
    for m in range(1, M + 1):
        acc = acc * T0(q2 ** m * u) + t2 ** m * state.F[m](u)
    out = acc * _T0_inf(state, q2 ** (M + 1) * u)
    return out if out.ndim else complex(out)


def chi_minus(u, state, t=None):
    """chi_-(u) = chi_+ of the mirror problem at 1/u."""
    if state.mirror is None:
        raise DomainError("state was built without its mirror")
    u = np.asarray(u, dtype=complex)
    if np.any(u == 0):
        raise DomainError("chi_- is singular at u = 0")
    return chi_plus(1.0 / u, state.mirror, t)


def chi_minus_symmetric(u, state, t=None):
    """Symmetric-model shortcut chi_-(u) = chi_+(1/u)."""
    u = np.asarray(u, dtype=complex)
    return chi_plus(1.0 / u, state, t)


def tT(u, state, t=None):
    """t T(u) = sum_m t^{2m} T_m(u)."""
    t = state.t if t is None else t
    u = np.asarray(u, dtype=complex)
    out = np.zeros_like(u)
    for m, Tm in enumerate(state.T):
        out = out + t ** (2 * m) * Tm(u)
    return out if out.ndim else complex(out)


def wronskian(u, state, t=None):
    """W(u) = chi+(u/q^2) chi-(u) - t^2 (-q a)^N A(u) B'(q^2/u) chi+(u) chi-(u/q^2)."""
    t = state.t if t is None else t
    q = state.q
    q2 = q * q
    u = np.asarray(u, dtype=complex)
    A = state.polys["A"]
    Bp = state.polys["Bprime"]
    N = state.N
    first = chi_plus(u / q2, state, t) * chi_minus(u, state, t)
    second = (t * t * (-q * state.spec.a) ** N * A(u) * Bp(u / q2)
              * chi_plus(u, state, t) * chi_minus(u / q2, state, t))
    out = first - second
    return out if np.ndim(out) else complex(out)


def chi_plus_residual(u, state):
    """|chi+(u/q^2) + t^2 A(q^2 u) B(u) chi+(q^2 u) - tT(u) chi+(u)|."""
    q2 = state.q * state.q
    t = state.t
    C = state.polys["C"]
    r = chi_plus(u / q2, state) + t * t * C(u) * chi_plus(q2 * u, state) - tT(u, state) * chi_plus(u, state)
    return np.abs(r)


def chi_minus_residual(u, state):
    """Residual of the chi_- equation, with T from the primal bootstrap."""
    q2 = state.q * state.q
    t = state.t
    N = state.N
    Ap, Bp = state.polys["Aprime"], state.polys["Bprime"]
    u = np.asarray(u, dtype=complex)
    r = (chi_minus(q2 * u, state) + t * t * Ap(u) * Bp(u / q2) * chi_minus(u / q2, state)
         - tT(u, state) / (-u) ** N * chi_minus(u, state))
    return np.abs(r)


def wshift_residual(u, state):
    u = np.asarray(u, dtype=complex)
    q2 = state.q * state.q
    return np.abs(wronskian(u, state) - (-u) ** state.N * wronskian(q2 * u, state))


# zeros of W

def _winding(f, radius, n=2048):
    z = radius * np.exp(2j * np.pi * np.arange(n + 1) / n)
    ph = np.unwrap(np.angle(f(z)))
    return (ph[-1] - ph[0]) / (2 * np.pi)


def count_w_zeros(state, radius=None):
    """Number of zeros of W in the fundamental annulus |q|^2 R < |u| <= R."""
    q2abs = abs(state.q) ** 2
    if radius is None:
        # put the circle in the largest gap of log|u_nu| modulo log|q^2|
        L = -np.log(q2abs)
        s = np.sort(np.mod(np.log(np.abs(state.u)), L))
        gaps = np.diff(np.concatenate([s, [s[0] + L]]))
        k = int(np.argmax(gaps))
        radius = np.exp(s[k] + gaps[k] / 2)
    f = lambda z: wronskian(z, state)
    n_out = _winding(f, radius)
    n_in = _winding(f, radius * q2abs)
    return int(round(n_out - n_in)), radius


def _newton_x(f, x0, b, tol=1e-15, maxit=50):
    """Solve f(e^{2 pi b x}) = 0 near x0 with secant-free complex Newton."""
    x = complex(x0)
    h = 1e-7
    for _ in range(maxit):
        fx = f(np.exp(2 * np.pi * b * x))
        d = (f(np.exp(2 * np.pi * b * (x + h))) - f(np.exp(2 * np.pi * b * (x - h)))) / (2 * h)
        if d == 0:
            break
        step = fx / d
        x -= step
        if abs(step) < tol * max(1.0, abs(x)):
            break
    return x


@dataclass
class DriftReport:
    zeros: np.ndarray
    drift: np.ndarray
    rho: complex
    rho_spread: float
    count: int


def w_root_drift(state, probes=(0.37 + 0.11j, -0.23 + 0.05j)):
    """Locate the N zeros of W next to the input roots; report drift and rho."""
    N = state.N
    count, _ = count_w_zeros(state)
    if count != N:
        raise RootCountError(f"found {count} zeros of W in the fundamental annulus, expected {N}")
    b = state.params.b
    f = lambda z: wronskian(z, state)
    xs = np.array([_newton_x(f, xv, b) for xv in state.x])
    z = np.exp(2 * np.pi * b * xs)
    if N > 1:
        dz = np.abs(np.subtract.outer(z, z)) + np.eye(N) * 1e300
        if np.min(dz) < 1e-8:
            raise RootCountError("Newton polish merged two zeros of W")
    drift = np.abs(z / state.u - 1)
    rhos = []
    for xp in probes:
        up = np.exp(2 * np.pi * b * xp)
        rhos.append(f(up) / np.prod([theta1(up / zz, state.params) for zz in z]))
    rhos = np.array(rhos)
    return DriftReport(zeros=z, drift=drift, rho=complex(rhos[0]),
                       rho_spread=float(np.max(np.abs(rhos - rhos[0]))), count=count)


# small-t zero structure

def delta_prime(state, gamma, n):
    """Delta'_{gamma,n}: residue limit of A'(1/u)_n B'(q^2/u)_n / (T0'(1/u)_n T0'(q^2/u)_n)."""
    q2 = state.q * state.q
    ug = state.u[gamma]
    Ap, Bp = state.polys["Aprime"], state.polys["Bprime"]
    num = 1.0 + 0j
    den = 1.0 + 0j
    for m in range(n):
        # A'(q^{2m}/u): reciprocal polynomial evaluated at u/q^{2m}
        num *= Ap(ug / q2 ** m) * Bp(ug / q2 ** (m + 1))
        for nu, un in enumerate(state.u):
            if not (m == 0 and nu == gamma):
                den *= 1 - q2 ** m * un / ug
            den *= 1 - q2 ** (m + 1) * un / ug
    return complex(num / den)


def delta_unprimed(state, gamma, n):
    """Delta_{gamma,n}: residue limit of A(q^2u)_n B(u)_n / (T0(u)_n T0(q^2u)_n)."""
    q2 = state.q * state.q
    ug = state.u[gamma]
    A, B = state.polys["A"], state.polys["B"]
    num = 1.0 + 0j
    den = 1.0 + 0j
    for m in range(n):
        num *= A(q2 ** (m + 1) * ug) * B(q2 ** m * ug)
        for nu, un in enumerate(state.u):
            if not (m == 0 and nu == gamma):
                den *= 1 - q2 ** m * ug / un
            den *= 1 - q2 ** (m + 1) * ug / un
    return complex(num / den)


@dataclass
class ZeroAsymptotics:
    gamma: list
    n: list
    zeros_plus: list
    zeros_minus: list
    measured_plus: list      # u_gamma / u_{gamma,n} - 1
    predicted_plus: list     # t^{2n} Delta'_{gamma,n}
    measured_minus: list     # u'_{gamma,n} / u_gamma - 1
    predicted_minus: list    # t^{2n} Delta_{gamma,n}

    def relative_errors(self):
        rp = [abs(m - p) / abs(p) for m, p in zip(self.measured_plus, self.predicted_plus)]
        rm = [abs(m - p) / abs(p) for m, p in zip(self.measured_minus, self.predicted_minus)]
        return np.array(rp), np.array(rm)


def _newton_u(f, u0, tol=1e-15, maxit=60):
    u = complex(u0)
    for _ in range(maxit):
        h = 1e-7 * abs(u)
        fu = f(u)
        d = (f(u + h) - f(u - h)) / (2 * h)
        if d == 0:
            break
        step = fu / d
        u -= step
        if abs(step) < tol * abs(u):
            break
    return u


def zero_asymptotics(state, n_max=1):
    """Compare the zeros of chi_+ (near u_g q^{-2n}) and chi_- (near u_g q^{2n})
    with the first-order prediction 1 + t^{2n} Delta."""
    q2 = state.q * state.q
    t2 = state.t ** 2
    out = ZeroAsymptotics([], [], [], [], [], [], [], [])
    eps = np.finfo(float).eps
    for n in range(1, n_max + 1):
        if abs(t2) ** n < 1e3 * eps:
            raise PrecisionError(f"t^{2 * n} = {abs(t2) ** n:.1e} is below working precision")
        for g, ug in enumerate(state.u):
            zp = _newton_u(lambda z: chi_plus(z, state), ug / q2 ** n)
            zm = _newton_u(lambda z: chi_minus(z, state), ug * q2 ** n)
            out.gamma.append(g)
            out.n.append(n)
            out.zeros_plus.append(zp)
            out.zeros_minus.append(zm)
            out.measured_plus.append(ug / (zp * q2 ** n) - 1)
            out.predicted_plus.append(t2 ** n * delta_prime(state, g, n))
            out.measured_minus.append(zm / (q2 ** n * ug) - 1)
            out.predicted_minus.append(t2 ** n * delta_unprimed(state, g, n))
    return out


# power series of chi_+

def chi_plus_coefficients(state, n_max=8, t=None):
    """Taylor coefficients chi_{+,0..n_max} of chi_+ in u."""
    t = state.t if t is None else t
    q2 = state.q * state.q
    T0 = state.T[0]
    total = np.zeros(n_max + 1, dtype=complex)
    for m in range(state.order + 1):
        ser = state.F[m].padded(max(n_max + 1, len(state.F[m].coeffs)))[: n_max + 1].copy()
        j = m + 1
        while True:
            fac = q_scale(T0, q2 ** j).padded(n_max + 1)[: n_max + 1]
            if np.max(np.abs(fac[1:]), initial=0.0) < 1e-300 or abs(q2) ** j < 1e-300:
                break
            ser = np.convolve(ser, fac)[: n_max + 1]
            j += 1
        total += t ** (2 * m) * ser
    return total


def footnote_fit(coeffs, q):
    """Decay of the Taylor coefficients against the q^{n(n+1)} law.

    Fits log|chi_n| = log K + (n(n+1) - eps n) log|q| over n >= 1 and reports
    the smallest K making it a bound.  Also fits a free quadratic exponent
    log|chi_n| ~ c0 + c1 n + kappa n(n+1) log|q|; kappa comes out close to 1/N
    because T0(q^2 u; q^2)_inf is a product of N theta-type series.
    """
    n = np.arange(1, len(coeffs))
    lq = np.log(abs(q))
    logc = np.log(np.abs(coeffs[1:]))
    y = logc - n * (n + 1) * lq
    X = np.column_stack([np.ones(len(n)), -n * lq])
    (logK, eps), *_ = np.linalg.lstsq(X, y, rcond=None)
    slack = float(np.max(y - (logK - eps * n * lq)))
    X3 = np.column_stack([np.ones(len(n)), n, n * (n + 1) * lq])
    (_, _, kappa), *_ = np.linalg.lstsq(X3, logc, rcond=None)
    return {"K": float(np.exp(logK + slack)), "eps": float(eps), "kappa": float(kappa),
            "root_moduli": (np.abs(coeffs[1:]) ** (1.0 / (n * (n + 1)))).tolist()}


def state_json(state):
    return json.dumps(state.to_json(), sort_keys=True)
