"""Modular parameters, q-products, theta function and the two q-dilogarithms.

Conventions: b = e^{i theta}, q = e^{i pi b^2}, q* = e^{-i pi b^-2} = conj(q),
u = e^{2 pi b x}, u* = e^{2 pi x / b}.  A starred parameter bundle is the same
data viewed through the involution b <-> 1/b, q <-> q*; every function below
accepts either view.
"""
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import ConvergenceError, DomainError, PrecisionError, SingularityError

NOME_GUARD = 0.999


@dataclass(frozen=True)
class ModularParams:
    theta: float
    b: complex
    b_inv: complex
    q: complex
    qstar: complex
    eta: float
    sigma: float
    c_b: float
    starred: bool = False

    def star(self):
        """Involution b -> 1/b, q <-> q*; star(star(p)) == p exactly."""
        return replace(self, theta=-self.theta, b=self.b_inv, b_inv=self.b,
                       q=self.qstar, qstar=self.q, sigma=-self.sigma,
                       starred=not self.starred)

    @property
    def q2(self):
        return self.q * self.q

    def u(self, x):
        return np.exp(2 * np.pi * self.b * np.asarray(x, dtype=complex))

    def ustar(self, x):
        return np.exp(2 * np.pi * self.b_inv * np.asarray(x, dtype=complex))

    def point(self, x):
        x = complex(x)
        return EvalPoint(x, complex(self.u(x)), complex(self.ustar(x)))

    def as_dict(self):
        return {"theta": self.theta, "b": self.b, "q": self.q, "qstar": self.qstar,
                "eta": self.eta, "sigma": self.sigma, "c_b": self.c_b}


@dataclass(frozen=True)
class EvalPoint:
    x: complex
    u: complex
    ustar: complex


def make_modular_params(theta):
    theta = float(theta)
    if not (0.0 < theta < np.pi / 2):
        raise DomainError(f"theta must lie in (0, pi/2), got {theta}")
    b = np.exp(1j * theta)
    b_inv = np.exp(-1j * theta)
    q = np.exp(1j * np.pi * b * b)
    qstar = np.exp(-1j * np.pi * b_inv * b_inv)
    if abs(q) > NOME_GUARD:
        raise PrecisionError(f"|q| = {abs(q):.6f} exceeds {NOME_GUARD}; series unreliable")
    return ModularParams(theta=theta, b=complex(b), b_inv=complex(b_inv), q=complex(q),
                         qstar=complex(qstar), eta=float(np.cos(theta)),
                         sigma=float(np.sin(theta)), c_b=float(np.cos(2 * theta) / 6))


# q-products

def qpoch(z, nome, n=None):
    """(z; nome)_n = prod_{k<n} (1 - z nome^k); n=None means infinity.

    ``nome`` is the ratio of the product (pass q^2 for the usual (z; q^2)).
    """
    if n is None:
        if abs(nome) >= 1:
            raise ConvergenceError("infinite q-product needs |nome| < 1")
        out = kernels.qpoch_inf(z, nome)
    else:
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        w = z.copy()
        for _ in range(int(n)):
            out = out * (1 - w)
            w = w * nome
    return out if np.ndim(out) else complex(out)


def theta1(u, params):
    """Shortened theta function (u; q^2)(q^2/u; q^2)."""
    u = np.asarray(u, dtype=complex)
    if np.any(u == 0):
        raise DomainError("theta1 undefined at u = 0")
    q2 = params.q2
    out = kernels.qpoch_inf(u, q2) * kernels.qpoch_inf(q2 / u, q2)
    return out if out.ndim else complex(out)


def jacobi_ratio_check(x, params, zero_tol=1e-12):
    """|theta1(u)/theta1(u)* - exp(i pi (x+sigma)^2 + i pi c_b)|."""
    u = params.u(x)
    th = theta1(u, params)
    ths = theta1(params.ustar(x), params.star())
    if abs(th) < zero_tol or abs(ths) < zero_tol:
        raise DomainError(f"x = {x} is at a zero of theta1")
    sgn = -1 if params.starred else 1
    rhs = np.exp(sgn * (1j * np.pi * (x + params.sigma) ** 2 + 1j * np.pi * params.c_b))
    return float(abs(th / ths - rhs))


# log phi, product form

SINGULAR_TOL = 1e-12


def _min_factor(z, nome):
    """min_k |1 - z nome^k| over the factors that can come close to zero."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    lz = np.log(np.maximum(np.abs(z), 1e-300))
    k0 = np.rint(-lz / np.log(abs(nome)))
    out = np.full(z.shape, np.inf)
    for dk in (-1, 0, 1):
        k = np.maximum(k0 + dk, 0)
        out = np.minimum(out, np.abs(1 - z * nome ** k))
    return out


def _S(x, params):
    """Termwise-principal log of (-q u; q^2)/(-q* u*; q*^2)."""
    u = params.u(x)
    us = params.ustar(x)
    return (kernels.log_qpoch(-params.q * u, params.q2)
            - kernels.log_qpoch(-params.qstar * us, params.qstar * params.qstar))


def log_phi(x, params, singular_tol=SINGULAR_TOL):
    """log phi(x) from the infinite-product form.

    On the closed half strip Re x <= 0, |Im x| <= eta the termwise principal
    sum is the analytic branch that vanishes at x -> -inf; for Re x > 0 the
    inversion relation is used instead, which keeps the value continuous along
    the real axis.  Outside |Im x| <= eta the result is still a logarithm of
    phi (exp is exact) but not necessarily the continuous branch.

    Points within ``singular_tol`` of a zero or pole raise SingularityError;
    quadratures over integrable log singularities pass 0.
    """
    x = np.asarray(x, dtype=complex)
    sgn = -1.0 if params.starred else 1.0
    right = x.real > 0
    out = np.empty_like(x)
    if np.any(~right):
        out[~right] = _S(x[~right], params)
    if np.any(right):
        xr = x[right]
        out[right] = sgn * (1j * np.pi * xr * xr + 1j * np.pi * params.c_b) - _S(-xr, params)
    if not np.all(np.isfinite(out)):
        raise SingularityError("log phi hit a zero or pole of the product")
    if singular_tol > 0:
        xl = np.where(right, -x, x)
        near = min(np.min(_min_factor(-params.q * params.u(xl), params.q2), initial=np.inf),
                   np.min(_min_factor(-params.qstar * params.ustar(xl), params.qstar ** 2),
                          initial=np.inf))
        if near < singular_tol:
            raise SingularityError("log phi evaluated at a zero or pole of phi")
    return out if out.ndim else complex(out)


def log_one_minus_uus(x, params):
    """log[(1 - u)(1 - u*)], the right side of the phi shift relation."""
    return np.log((1 - params.u(x)) * (1 - params.ustar(x)))


# contour quadrature

_GL_CACHE = {}


def _gauss(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _integrand(y, x, params, second):
    b = params.b
    val = np.exp(-2j * x * y) / (4 * np.sinh(b * y) * np.sinh(y / b) * y)
    if second:
        val = val / (2 * np.cosh(2 * params.eta * y))
    return val


def _ray_integrand(y, x, params, second):
    # f(y) + f(-y) for real y > 0
    b = params.b
    val = -2j * np.sin(2 * x * y) / (4 * np.sinh(b * y) * np.sinh(y / b) * y)
    if second:
        val = val / (2 * np.cosh(2 * params.eta * y))
    return val


def _contour_integral(x, params, second, panel_width, order, arc_order):
    eta = params.eta
    r = min(np.pi / (8 * eta), np.pi / 2)
    decay = 2 * (eta - abs(x.imag)) + (4 * eta if second else 0.0)
    ymax = r + 42.0 / decay
    # semicircle y = r e^{ia}, a: pi -> 0
    nodes, weights = _gauss(arc_order)
    a = np.pi / 2 * (nodes + 1)
    ya = r * np.exp(1j * a)
    arc = -np.pi / 2 * np.sum(weights * _integrand(ya, x, params, second) * 1j * ya)
    nodes, weights = _gauss(order)
    npan = max(1, int(np.ceil((ymax - r) / panel_width)))
    edges = np.linspace(r, ymax, npan + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    ys = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    ws = (half[:, None] * weights[None, :]).ravel()
    ray = np.sum(ws * _ray_integrand(ys, x, params, second))
    return arc + ray


def _quadrature(x, params, second, tol):
    limit = 2 * params.eta if second else params.eta
    x = complex(x)
    if abs(x.imag) >= limit:
        raise DomainError(f"|Im x| must be < {limit:.6g} for the contour integral")
    if params.starred:
        return -_quadrature(x, params.star(), second, tol)
    h = 0.5 / (1 + abs(x.real))
    coarse = _contour_integral(x, params, second, 2 * h, 24, 48)
    fine = _contour_integral(x, params, second, h, 32, 80)
    err = abs(fine - coarse)
    if err > tol:
        raise ConvergenceError(f"contour quadrature error {err:.2e} exceeds {tol:.1e}")
    return complex(fine)


def log_phi_quadrature(x, params, tol=1e-9):
    """log phi(x) by integrating over R + i0 with a semicircular detour.

    Needs |Im x| < eta for the integrand to decay.
    """
    return _quadrature(x, params, False, tol)


def log_phi2(x, params, tol=1e-9):
    """log phi_2(x) by contour quadrature; valid for |Im x| < 2 eta."""
    return _quadrature(x, params, True, tol)
