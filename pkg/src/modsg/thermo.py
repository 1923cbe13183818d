"""Thermodynamic-limit ground state: densities, kernel, Phi integrals, I_+-.

Densities are either finite atom lists or Gaussians.  Smooth integrands are
averaged with the density's node rule (exact for atoms, Gauss-Hermite for
Gaussians); integrands with a logarithmic singularity are integrated with
tanh-sinh on both sides of the singular point.
"""
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import kernels
from .errors import BranchError, ConvergenceError, PoleError, ValidationError
from .modular import log_phi, log_phi2

QUAD_ATOL = 1e-13
QUAD_RTOL = 1e-12


def _tanhsinh(f, a, b):
    if a == b:
        return 0j
    r = integrate.tanhsinh(lambda x: f(np.real(x)), a, b, atol=QUAD_ATOL, rtol=QUAD_RTOL, maxlevel=12)
    if np.any(r.status != 0) and not np.all(r.error < 1e-9):
        raise ConvergenceError(f"tanh-sinh failed on [{a}, {b}] (error {r.error})")
    return complex(r.integral)


def _split_integral(f, a, b, points):
    # tanh-sinh promotes abscissae to the integrand dtype; keep them real
    g = lambda x: f(np.real(x))
    edges = sorted({a, b, *(p for p in points if a < p < b)})
    return sum(_tanhsinh(g, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))


# densities

@dataclass(frozen=True)
class AtomDensity:
    positions: tuple
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(float(v) for v in self.positions))
        object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))

    atomic = True

    def nodes(self):
        return np.array(self.positions), np.array(self.weights)

    def support(self):
        return min(self.positions), max(self.positions)

    def fourier(self, y):
        x, w = self.nodes()
        return np.exp(-2j * np.pi * np.outer(y, x)) @ w

    def expect_singular(self, f, sing):
        x, w = self.nodes()
        return complex(np.sum(w * f(x)))

    def as_dict(self):
        return {"kind": "atoms", "positions": list(self.positions), "weights": list(self.weights)}


@dataclass(frozen=True)
class GaussianDensity:
    mean: float
    sd: float
    n_nodes: int = 120

    atomic = False

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mean) / self.sd
        return np.exp(-0.5 * z * z) / (np.sqrt(2 * np.pi) * self.sd)

    def nodes(self):
        z, w = np.polynomial.hermite.hermgauss(self.n_nodes)
        return self.mean + np.sqrt(2) * self.sd * z, w / np.sqrt(np.pi)

    def support(self):
        return self.mean - 40 * self.sd, self.mean + 40 * self.sd

    def fourier(self, y):
        # discrete transform over the node rule
        x, w = self.nodes()
        return np.exp(-2j * np.pi * np.outer(y, x)) @ w

    def expect_singular(self, f, sing):
        lo, hi = self.support()
        return _split_integral(lambda x: self.pdf(x) * f(x), lo, hi, [sing])

    def as_dict(self):
        return {"kind": "gaussian", "mean": self.mean, "sd": self.sd}


def _moments(d):
    x, w = d.nodes()
    return float(np.sum(w)), float(np.sum(w * x)), float(np.sum(w * x * x))


@dataclass(frozen=True)
class DensityModel:
    PA: object
    PB: object
    mu: float

    def __post_init__(self):
        for name, d in (("P_A", self.PA), ("P_B", self.PB)):
            m0, _, _ = _moments(d)
            if abs(m0 - 1) > 1e-10:
                raise ValidationError(f"{name} must integrate to 1 (got {m0})")
        if abs(self.mu_A - self.mu) > 1e-10 or abs(self.mu_B + self.mu) > 1e-10:
            raise ValidationError("expectations must be mu_A = mu and mu_B = -mu")

    @property
    def mu_A(self):
        return _moments(self.PA)[1]

    @property
    def mu_B(self):
        return _moments(self.PB)[1]

    @property
    def S_A(self):
        return _moments(self.PA)[2]

    @property
    def S_B(self):
        return _moments(self.PB)[2]

    @property
    def homogeneous(self):
        return (self.PA.atomic and self.PB.atomic and len(self.PA.positions) == 1
                and len(self.PB.positions) == 1)

    @property
    def symmetric(self):
        xa, wa = self.PA.nodes()
        xb, wb = self.PB.nodes()
        ia, ib = np.argsort(xa), np.argsort(-xb)
        return (len(xa) == len(xb) and np.allclose(xa[ia], -xb[ib], atol=1e-12)
                and np.allclose(wa[ia], wb[ib], atol=1e-12))

    def nodes_AB(self):
        xa, wa = self.PA.nodes()
        xb, wb = self.PB.nodes()
        return np.concatenate([xa, xb]), np.concatenate([wa, wb])

    def support(self):
        a, b = self.PA.support(), self.PB.support()
        return min(a[0], b[0]), max(a[1], b[1])

    def expect_AB_singular(self, f, sing):
        return self.PA.expect_singular(f, sing) + self.PB.expect_singular(f, sing)

    def fourier_AB(self, y):
        return self.PA.fourier(y) + self.PB.fourier(y)

    def as_dict(self):
        return {"P_A": self.PA.as_dict(), "P_B": self.PB.as_dict(), "mu": self.mu}


def homogeneous_model(mu):
    return DensityModel(AtomDensity([mu], [1.0]), AtomDensity([-mu], [1.0]), mu)


def atom_model(pos_A, w_A, pos_B, w_B):
    A, B = AtomDensity(pos_A, w_A), AtomDensity(pos_B, w_B)
    return DensityModel(A, B, _moments(A)[1])


def gaussian_model(mu, sd_A, sd_B):
    return DensityModel(GaussianDensity(mu, sd_A), GaussianDensity(-mu, sd_B), mu)


# kernel and ground-state density

@dataclass(frozen=True)
class ThermoContext:
    params: object

    def w(self, x):
        return np.exp(np.pi * np.asarray(x, dtype=complex) / (2 * self.params.eta))

    @property
    def p(self):
        return float(np.exp(-np.pi * self.params.sigma / (2 * self.params.eta)))

    @property
    def minus_ip(self):
        return -1j * self.p

    def minus_ip_check(self):
        """|-ip - exp(-i pi / (2 eta b))|, zero by the definition of p."""
        return abs(self.minus_ip - np.exp(-1j * np.pi * self.params.b_inv / (2 * self.params.eta)))


def kernel_K(x, params, pole_tol=1e-12):
    """K(x) = 1 / (4 eta cosh(pi x / 2 eta))."""
    eta = params.eta
    x = np.asarray(x, dtype=complex)
    c = np.cosh(np.pi * x / (2 * eta))
    if np.any(np.abs(c) < pole_tol):
        raise PoleError("K has poles at x = i eta (2k+1)")
    out = 1.0 / (4 * eta * c)
    return out if out.ndim else complex(out)


def kernel_fourier(y, params, L=None):
    """Numerical transform int K(x) e^{-2 pi i x y} dx (oracle for 1/(2 cosh(2 pi eta y)))."""
    eta = params.eta
    L = 80 * eta if L is None else L
    f = lambda x: (1.0 / (4 * eta * np.cosh(np.pi * x / (2 * eta)))) * np.cos(2 * np.pi * x * y)
    return _tanhsinh(f, -L, L).real


def y_of_x(x, params):
    """y(x) = int_{-inf}^x K = (1 / 2 pi i) log((1 + i w) / (1 - i w))."""
    w = np.exp(np.pi * np.asarray(x, dtype=complex) / (2 * params.eta))
    out = np.log((1 + 1j * w) / (1 - 1j * w)) / (2j * np.pi)
    return out if out.ndim else complex(out)


def ground_density(x, model, params):
    """P(x) = int K(x - x0) P_AB(x0) dx0 (exact sum over the node rule)."""
    xn, wn = model.nodes_AB()
    out = kernels.sech_convolve(x, xn, wn, params.eta)
    return out if np.ndim(out) else float(out)


def ground_density_closed(x, mu, params):
    """Homogeneous symmetric closed form K(x - mu) + K(x + mu)."""
    eta = params.eta
    x = np.asarray(x, dtype=float)
    return (1 / (4 * eta * np.cosh(np.pi * (x - mu) / (2 * eta)))
            + 1 / (4 * eta * np.cosh(np.pi * (x + mu) / (2 * eta))))


def _p_window(model, params):
    lo, hi = model.support()
    L = 32 * params.eta
    return lo - L, hi + L


def density_moments(model, params):
    """(int P, int P x, int P x^2) by quadrature of the ground density."""
    a, b = _p_window(model, params)
    f = lambda x: ground_density(x, model, params)
    m = [_tanhsinh(lambda x, k=k: f(x) * x ** k, a, b).real for k in range(3)]
    return tuple(m)


def verify_primeq(model, params, y_grid):
    """max_y |F[P](y) 2 cosh(2 pi eta y) - F[P_AB](y)| with F[P] by quadrature."""
    a, b = _p_window(model, params)
    eta = params.eta
    worst = 0.0
    for y in np.atleast_1d(y_grid):
        fp = _tanhsinh(lambda x: ground_density(x, model, params) * np.exp(-2j * np.pi * x * y), a, b)
        lhs = fp * 2 * np.cosh(2 * np.pi * eta * y)
        rhs = complex(model.fourier_AB(np.array([y]))[0])
        worst = max(worst, abs(lhs - rhs))
    return float(worst)


def _p_integral(f, x, model, params, extra=()):
    """int P(x0) f(x0) dx0 where f may be log-singular at x0 = x (and at extra points)."""
    a, b = _p_window(model, params)
    a, b = min(a, x - 1), max(b, x + 1)
    return _split_integral(lambda x0: ground_density(x0, model, params) * f(x0), a, b, [x, *extra])


# Phi integrals

def phi_integral_1(x, model, params):
    """Phi_1 from P with log phi and from P_AB with log phi_2; returns (v1, v2, |v1 - v2|)."""
    eta = params.eta
    v1 = _p_integral(lambda x0: log_phi(x - x0 + 1j * eta, params, 0), x, model, params)
    v2 = _phi2_average(lambda x0: x - x0 + 1j * eta, model, params)
    return v1, v2, abs(v1 - v2)


def phi_integral_2(x, model, params):
    eta = params.eta
    v1 = _p_integral(lambda x0: log_phi(x0 - x + 1j * eta, params, 0), x, model, params)
    v2 = _phi2_average(lambda x0: x0 - x + 1j * eta, model, params)
    return v1, v2, abs(v1 - v2)


def _phi2_average(arg, model, params):
    xn, wn = model.nodes_AB()
    keep = wn > 1e-300
    vals = [log_phi2(arg(v), params) for v in xn[keep]]
    return complex(np.sum(wn[keep] * np.array(vals)))


# I_+- and log T0

def _I_plus_left(x, params):
    """Termwise closed form, valid for Re x <= 0."""
    q = params.q
    u = params.u(x)
    eta, sig = params.eta, params.sigma
    w = np.exp(np.pi * np.asarray(x, dtype=complex) / (2 * eta))
    mp_ = -1j * np.exp(-np.pi * sig / (2 * eta))
    q4 = q ** 4
    return (kernels.log_qpoch(-q * u, q4) - kernels.log_qpoch(-q ** 3 * u, q4)
            + kernels.log_qpoch(-1j * w, mp_) - kernels.log_qpoch(1j * w, mp_))


def closed_form_I(x, branch, params):
    """I_+(x) from the q-product closed form (reflected for Re x > 0); I_- = I_+ - 2 pi i y."""
    x = np.asarray(x, dtype=complex)
    if np.any(np.abs(x.imag) > params.eta):
        raise BranchError("closed form restricted to the fundamental strip |Im x| <= eta")
    out = np.empty_like(x)
    right = x.real > 0
    out[~right] = _I_plus_left(x[~right], params)
    xr = x[right]
    out[right] = (_I_plus_left(-xr, params) + np.pi * params.b * xr
                  + 1j * np.pi * (2 * y_of_x(xr, params) - 0.5))
    if branch == "-":
        out = out - 2j * np.pi * y_of_x(x, params)
    elif branch != "+":
        raise ValueError("branch must be '+' or '-'")
    return out if out.ndim else complex(out)


def log_one_minus_branch(s, branch, params):
    """log(1 - e^{2 pi b s}) continued along real s, passing s = 0 by +-i pi."""
    s = np.real(np.asarray(s))
    b = params.b
    sign = 1.0 if branch == "+" else -1.0
    out = np.empty(s.shape, dtype=complex)
    neg = s < 0
    out[neg] = np.log1p(-np.exp(2 * np.pi * b * s[neg]))
    sp = s[~neg]
    out[~neg] = 2 * np.pi * b * sp + sign * 1j * np.pi + np.log1p(-np.exp(-2 * np.pi * b * sp))
    return out


def direct_I(x, branch, params):
    """int K(x0) log(1 - e^{2 pi b (x - x0)}) dx0 on R +- i0, by quadrature."""
    L = 40 * params.eta + abs(x)
    f = lambda x0: (1 / (4 * params.eta * np.cosh(np.pi * x0 / (2 * params.eta)))
                    * log_one_minus_branch(x - x0, branch, params))
    return _split_integral(f, x - L, x + L, [x])


def log_T0_density(x, model, params, branch="+", tol=1e-7):
    """(1/N) log T0 = int P_AB I_+-(x - x0); cross-checked against the direct P-integral."""
    xn, wn = model.nodes_AB()
    closed = complex(np.sum(wn * closed_form_I(x - xn, branch, params)))
    direct = _p_integral(lambda x0: log_one_minus_branch(x - x0, branch, params), x, model, params)
    if abs(closed - direct) > tol:
        raise BranchError(f"closed form {closed} and direct quadrature {direct} disagree")
    return closed, direct


# negativity and shift identities

def _log_tanh(s, params):
    return np.log(np.tanh(np.abs(np.pi * s / (4 * params.eta))))


def delta_negativity(x, model, params):
    """int P_AB(x0) log tanh|pi (x - x0 - sigma) / 4 eta| dx0."""
    sing = x - params.sigma
    with np.errstate(divide="ignore"):
        return model.expect_AB_singular(lambda x0: _log_tanh(x - x0 - params.sigma, params), sing).real


def delta_direct(x, model, params):
    """(1/N) log|A(q^2 u) B(u) / (T0(u) T0(q^2 u))| from moduli, by direct quadrature."""
    q, b = params.q, params.b
    sig = params.sigma
    # 1 + q u vanishes at x - x0 = sigma, 1 - q^2 u at x - x0 = 2 sigma
    num = model.expect_AB_singular(
        lambda x0: np.log(np.abs(1 + q * np.exp(2 * np.pi * b * (x - x0)))), x - sig).real
    f = lambda x0: (np.log(np.abs(1 - np.exp(2 * np.pi * b * (x - x0))))
                    + np.log(np.abs(1 - q * q * np.exp(2 * np.pi * b * (x - x0)))))
    den = _p_integral(f, x, model, params, extra=[x - 2 * sig]).real
    return num - den


def _re_I(z, params):
    """Re I(z) = log|product| (branch free), any z."""
    q = params.q
    u = params.u(z)
    eta, sig = params.eta, params.sigma
    w = np.exp(np.pi * np.asarray(z, dtype=complex) / (2 * eta))
    mp_ = -1j * np.exp(-np.pi * sig / (2 * eta))
    q4 = q ** 4
    return (kernels.log_qpoch(-q * u, q4) - kernels.log_qpoch(-q ** 3 * u, q4)
            + kernels.log_qpoch(-1j * w, mp_) - kernels.log_qpoch(1j * w, mp_)).real


def shift_2ieta_residual(x, model, params):
    """(1/N) log|A(q^2u) B(u)| - Re int P_AB [I(x - x0) + I(x - x0 + 2 i eta)]."""
    q, b = params.q, params.b
    xn, wn = model.nodes_AB()
    num = np.sum(wn * np.log(np.abs(1 + q * np.exp(2 * np.pi * b * (x - xn)))))
    den = np.sum(wn * (_re_I(x - xn, params) + _re_I(x - xn + 2j * params.eta, params)))
    return float(num - den)


def bae_integral_identity(x_list, model, params):
    """(1/N) log(Q1/Q2) in density form at each x; returns values, spread and the
    expected constant i pi (S_B - S_A) / 2."""
    eta = params.eta
    vals = []
    for x in x_list:
        g = lambda x0: log_phi(x - x0 + 1j * eta, params, 0) - log_phi(x0 - x + 1j * eta, params, 0)
        I = _p_integral(g, x, model, params)
        ia = _node_average(model.PA, lambda x0: log_phi(x - x0, params))
        ib = _node_average(model.PB, lambda x0: log_phi(x0 - x, params))
        vals.append(-2j * np.pi * (model.mu + 1j * eta) * x + I - ia + ib)
    vals = np.array(vals)
    return {"values": vals, "spread": float(np.max(np.abs(vals - vals.mean()))),
            "expected": 1j * np.pi * (model.S_B - model.S_A) / 2}


def _node_average(d, f):
    x, w = d.nodes()
    return complex(np.sum(w * f(x)))


# profiles

PROFILE_FUNCTIONS = ("P", "Phi1", "Phi2", "Iplus", "Iminus", "delta")


def profile(name, xs, model, params):
    xs = np.asarray(xs, dtype=float)
    if name == "P":
        return ground_density(xs, model, params).astype(complex)
    if name == "Phi1":
        return np.array([phi_integral_1(x, model, params)[0] for x in xs])
    if name == "Phi2":
        return np.array([phi_integral_2(x, model, params)[0] for x in xs])
    if name in ("Iplus", "Iminus"):
        br = "+" if name == "Iplus" else "-"
        xn, wn = model.nodes_AB()
        return np.array([np.sum(wn * closed_form_I(x - xn, br, params)) for x in xs])
    if name == "delta":
        return np.array([delta_negativity(x, model, params) for x in xs], dtype=complex)
    raise ValueError(f"unknown profile function {name!r}")


# seeds for the finite-N solver

def density_from_spec(spec):
    """Atom densities P_A, P_B carried by a finite-N model (weights 1/N)."""
    N = spec.N
    w = [1.0 / N] * N
    A, B = AtomDensity(spec.alpha, w), AtomDensity(spec.beta, w)
    return DensityModel(A, B, float(np.mean(spec.alpha)))


def cdf(x, model, params):
    """int_{-inf}^x P = sum over P_AB nodes of y(x - x0)."""
    xn, wn = model.nodes_AB()
    return float(np.sum(wn * y_of_x(x - xn, params).real))


def quantile_seeds(spec):
    """Mid-quantiles (k - 1/2)/N of the ground-state density, centred."""
    from scipy.optimize import brentq
    model = density_from_spec(spec)
    params = spec.params
    lo, hi = model.support()
    pad = 40 * params.eta
    xs = np.array([brentq(lambda x: cdf(x, model, params) - (k - 0.5) / spec.N,
                          lo - pad, hi + pad, xtol=1e-14)
                   for k in range(1, spec.N + 1)])
    return xs - xs.mean()
