"""Q functions, the quantisation condition and its Newton solution.

Q1(x) = exp(-sum log phi(x - alpha)) chi+(u) chi-(u)^* / W(u)^*
Q2(x) = exp(2 pi i tau' x N - sum log phi(beta - x)) chi-(u) chi+(u)^* / W(q^2 u)^*

Starred factors are evaluated with the dual bootstrap at u* = e^{2 pi x / b}.
Because W^*(q*^2 u*) / W^*(u*) = (-u*)^{-N} identically, the ratio Q1/Q2 has
the removable-singularity-free form

    R(x) = E(x) chi+(u) chi-^*(u*) / (chi-(u) chi+^*(u*)) (-u*)^{-N}

which is what the Newton solver works with; the direct limit through W is a
cross-check.
"""
from dataclasses import dataclass, field

import numpy as np

from . import bootstrap as bs
from .errors import (DegenerateRootError, NearPoleError, NonConvergenceError,
                     PrecisionError, SingularityError, ValidationError)
from .modular import log_phi

NEAR_POLE_TOL = 1e-6
CROSS_CHECK_TOL = 1e-6


@dataclass(eq=False)
class SpectralContext:
    spec: object
    x: np.ndarray
    order: int
    primal: object
    dual: object

    @property
    def params(self):
        return self.spec.params

    @property
    def N(self):
        return self.spec.N


def make_context(spec, x, M):
    x = np.asarray(x, dtype=float)
    primal = bs.bootstrap_run(spec, x, M)
    dual = bs.bootstrap_run(spec, x, M, dual=True)
    return SpectralContext(spec=spec, x=x, order=M, primal=primal, dual=dual)


def _sum_log_phi(z, params):
    try:
        return np.sum(log_phi(np.asarray(z, dtype=complex), params))
    except SingularityError as exc:
        raise NearPoleError(f"kinematic pole of 1/phi: {exc}", location=z) from exc


def _exponent_1(x, ctx):
    return -_sum_log_phi(x - np.array(ctx.spec.alpha), ctx.params)


def _exponent_2(x, ctx):
    spec = ctx.spec
    return (2j * np.pi * spec.tau_prime * x * spec.N
            - _sum_log_phi(np.array(spec.beta) - x, ctx.params))


def _check_lattice(x, ctx):
    """Distance from x to the zeros x_nu - i k / b + i l b of W^*(u*)."""
    p = ctx.params
    ks = np.arange(-3, 4)
    for xv in ctx.x:
        grid = xv - 1j * np.add.outer(ks * p.b_inv, -ks * p.b)
        d = np.min(np.abs(grid - x))
        if d < NEAR_POLE_TOL:
            raise NearPoleError(f"x = {x} is within {d:.1e} of a zero of W*", location=xv)


def _parts(x, ctx):
    p = ctx.params
    u = complex(p.u(x))
    us = complex(p.ustar(x))
    cp = bs.chi_plus(u, ctx.primal)
    cm = bs.chi_minus(u, ctx.primal)
    cps = bs.chi_plus(us, ctx.dual)
    cms = bs.chi_minus(us, ctx.dual)
    return u, us, cp, cm, cps, cms


def q1(x, ctx, check=True):
    x = complex(x)
    if check:
        _check_lattice(x, ctx)
    u, us, cp, cm, cps, cms = _parts(x, ctx)
    return np.exp(_exponent_1(x, ctx)) * cp * cms / bs.wronskian(us, ctx.dual)


def q2(x, ctx, check=True):
    x = complex(x)
    if check:
        _check_lattice(x, ctx)
    u, us, cp, cm, cps, cms = _parts(x, ctx)
    qs2 = ctx.dual.q ** 2
    return np.exp(_exponent_2(x, ctx)) * cm * cps / bs.wronskian(qs2 * us, ctx.dual)


def ratio(x, ctx):
    """Q1/Q2 with the W quotient replaced by its exact value (-u*)^{-N}."""
    x = complex(x)
    u, us, cp, cm, cps, cms = _parts(x, ctx)
    e = _exponent_1(x, ctx) - _exponent_2(x, ctx)
    return complex(np.exp(e) * cp * cms / (cm * cps) * (-us) ** (-ctx.N))


def ratio_offset(x, eps, ctx):
    """Q1/Q2 computed directly (through W) at x + eps."""
    z = complex(x) + eps
    return complex(q1(z, ctx, check=False) / q2(z, ctx, check=False))


def _offset_limit(xg, ctx, eps):
    """Central offsets x_gamma +- eps, Richardson-combined over the two eps."""
    e1, e2 = eps
    c1 = 0.5 * (ratio_offset(xg, e1, ctx) + ratio_offset(xg, -e1, ctx))
    c2 = 0.5 * (ratio_offset(xg, e2, ctx) + ratio_offset(xg, -e2, ctx))
    w = (e1 / e2) ** 2
    return c1, c2, (w * c2 - c1) / (w - 1)


def bae_ratio(gamma, ctx, cross_check=True, eps=(1e-4, 1e-5)):
    """lim_{x -> x_gamma} Q1/Q2, analytic route with an offset cross-check."""
    xg = ctx.x[gamma]
    val = ratio(xg, ctx)
    if cross_check:
        _check_simple_zero(gamma, ctx)
        ext = _offset_limit(xg, ctx, eps)[2]
        if abs(ext - val) > CROSS_CHECK_TOL * max(1.0, abs(val)):
            raise PrecisionError(f"analytic limit {val} and offset limit {ext} disagree")
    return val


def bae_ratio_offset_estimate(gamma, ctx, eps=(1e-4, 1e-5)):
    c1, c2, ext = _offset_limit(ctx.x[gamma], ctx, eps)
    return {"eps": list(eps), "central": [c1, c2], "extrapolated": ext}


def _check_simple_zero(gamma, ctx, h=1e-6):
    """W^* must vanish to first order at u*_gamma."""
    p = ctx.params
    xg = ctx.x[gamma]
    f = lambda z: bs.wronskian(complex(p.ustar(z)), ctx.dual)
    d = (f(xg + h) - f(xg - h)) / (2 * h)
    scale = abs(f(xg + 0.05)) / 0.05
    if abs(d) < 1e-8 * scale:
        raise DegenerateRootError(f"zero of W* at x_{gamma} is not simple")


def parity_lhs(x_gamma, ctx):
    """Symmetric-case parity expression at x_gamma (equals R(x_gamma)).

    Contains the factor (-u*)^{-N} produced by the W quotient; with it the
    expression is unimodular for real data.
    """
    if not ctx.spec.symmetric:
        raise ValidationError("parity_lhs needs a symmetric model")
    p = ctx.params
    xg = complex(x_gamma)
    u, us = complex(p.u(xg)), complex(p.ustar(xg))
    al = np.array(ctx.spec.alpha)
    e = (-2j * np.pi * ctx.spec.tau_prime * xg * ctx.N
         + _sum_log_phi(-al - xg, p) - _sum_log_phi(xg - al, p))
    cp, cpi = bs.chi_plus(u, ctx.primal), bs.chi_plus(1 / u, ctx.primal)
    cps, cpsi = bs.chi_plus(us, ctx.dual), bs.chi_plus(1 / us, ctx.dual)
    return complex(np.exp(e) * cp * cpsi / (cpi * cps) * (-us) ** (-ctx.N))


def lattice_residual(gamma, ctx, xi):
    """|R(x_gamma + ib - i/b) - xi|; the shift ib - i/b equals -2 sigma."""
    p = ctx.params
    z = ctx.x[gamma] + 1j * p.b - 1j * p.b_inv
    return abs(ratio(z, ctx) - xi)


def tq_residuals(x, ctx, xi):
    """Relative residuals of both TQ equations for Q = Q1 - xi Q2 at x."""
    p = ctx.params
    spec = ctx.spec
    t, ts = spec.t, spec.tstar
    Q = lambda z: q1(z, ctx) - xi * q2(z, ctx)
    u = complex(p.u(x))
    us = complex(p.ustar(x))
    A, B = ctx.primal.polys["A"], ctx.primal.polys["B"]
    As, Bs = ctx.dual.polys["A"], ctx.dual.polys["B"]
    q2p, qs2 = p.q2, ctx.dual.q ** 2
    T = bs.tT(u, ctx.primal) / t
    Ts = bs.tT(us, ctx.dual) / ts
    b, bi = p.b, p.b_inv
    Q0 = Q(x)
    terms1 = [A(u) * Q(x - 1j * b) / t, t * B(u) * Q(x + 1j * b), -T * Q0]
    terms2 = [As(qs2 * us) * Q(x - 1j * bi) / ts, ts * Bs(us / qs2) * Q(x + 1j * bi), -Ts * Q0]
    r1 = abs(sum(terms1)) / max(abs(v) for v in terms1)
    r2 = abs(sum(terms2)) / max(abs(v) for v in terms2)
    return float(r1), float(r2)


@dataclass
class BetheState:
    roots: np.ndarray
    xi: complex
    rho: complex
    residual: float
    iterations: int
    ratios: list
    drift: list
    lattice: list
    order: int
    history: list = field(default_factory=list)
    context: object = None

    def to_json(self):
        cj = lambda z: [float(np.real(z)), float(np.imag(z))]
        return {"roots": [float(v) for v in self.roots], "xi": cj(self.xi), "rho": cj(self.rho),
                "residual": float(self.residual), "iterations": self.iterations,
                "ratios": [cj(r) for r in self.ratios], "drift": [float(d) for d in self.drift],
                "lattice_residuals": [float(v) for v in self.lattice], "order": self.order,
                "history": [float(h) for h in self.history]}


def _full_roots(y, N):
    return np.append(y, -np.sum(y))


def _residual_vector(y, spec, M):
    N = spec.N
    ctx = make_context(spec, _full_roots(y, N), M)
    r = np.array([ratio(xv, ctx) for xv in ctx.x])
    g = np.angle(r[:-1] / r[-1])
    return g, r, ctx


def solve_bae(spec, seed_roots, M, tol=1e-10, max_iter=30, h=1e-6):
    """Newton iteration for the N-1 independent roots; xi is read off at the end."""
    seed = np.asarray(seed_roots, dtype=float)
    N = spec.N
    if len(seed) != N:
        raise ValidationError(f"need {N} seed roots")
    seed = seed - seed.mean()
    if N > 1 and np.min(np.diff(np.sort(seed))) < 1e-9:
        raise ValidationError("seed roots must be distinct")
    y = seed[:-1].copy()
    g, r, ctx = _residual_vector(y, spec, M)
    history = [float(np.max(np.abs(g), initial=0.0))]
    it = 0
    while N > 1 and history[-1] > tol:
        if it >= max_iter:
            raise NonConvergenceError(f"BAE Newton stalled at residual {history[-1]:.2e} after {it} steps")
        J = np.empty((N - 1, N - 1))
        for k in range(N - 1):
            e = np.zeros(N - 1)
            e[k] = h
            gp = _residual_vector(y + e, spec, M)[0]
            gm = _residual_vector(y - e, spec, M)[0]
            # keep the difference on one branch
            J[:, k] = np.angle(np.exp(1j * (gp - gm))) / (2 * h)
        step = np.linalg.solve(J, -g)
        lam = 1.0
        while True:
            yn = y + lam * step
            try:
                gn, rn, cn = _residual_vector(yn, spec, M)
                ok = np.max(np.abs(gn)) < history[-1] or lam < 1e-3
            except (bs.ResonanceError, ValidationError):
                ok = False
                if lam < 1e-3:
                    raise
            if ok:
                break
            lam *= 0.5
        y, g, r, ctx = yn, gn, rn, cn
        history.append(float(np.max(np.abs(g))))
        it += 1
    xi = r[-1]
    if spec.xi_mode == "parity" and min(abs(xi - 1), abs(xi + 1)) > 1e-6:
        raise NonConvergenceError(f"parity mode expected xi = +-1, got {xi}")
    drift = bs.w_root_drift(ctx.primal)
    lattice = [lattice_residual(k, ctx, xi) for k in range(N)]
    ratios = [bae_ratio(k, ctx) for k in range(N)]
    return BetheState(roots=ctx.x.copy(), xi=complex(xi), rho=drift.rho, residual=history[-1],
                      iterations=it, ratios=ratios, drift=drift.drift.tolist(), lattice=lattice,
                      order=M, history=history, context=ctx)


def parity_bisect(spec, M, lo, hi, tol=1e-13, max_iter=200):
    """Bisection on s for the N=2 symmetric parity equation at roots (s, -s).

    The parity expression is unimodular, so xi = +-1 is the sign change of its
    imaginary part inside [lo, hi].
    """
    if spec.N != 2 or not spec.symmetric:
        raise ValidationError("parity bisection is for N = 2 symmetric models")

    def f(s):
        return parity_lhs(s, make_context(spec, np.array([s, -s]), M))

    fa = f(lo).imag
    if np.sign(fa) == np.sign(f(hi).imag):
        raise NonConvergenceError("bisection bracket does not change sign")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid).imag
        if np.sign(fm) == np.sign(fa):
            lo, fa = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    s = 0.5 * (lo + hi)
    return s, f(s)
