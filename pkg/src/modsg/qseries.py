"""Dense complex polynomials, q-shifted products and the bootstrap linear solver."""
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg

from . import kernels
from .errors import DomainError, SingularSystemError


@dataclass(frozen=True, eq=False)
class CPoly:
    """sum_k coeffs[k] v^k with v = u, or v = 1/u when ``reciprocal``."""
    coeffs: np.ndarray
    reciprocal: bool = False

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, u):
        u = np.asarray(u, dtype=complex)
        v = 1.0 / u if self.reciprocal else u
        out = kernels.polyval(self.coeffs, v)
        return out if out.ndim else complex(out)

    def _check(self, other):
        if self.reciprocal != other.reciprocal:
            raise DomainError("cannot combine polynomials in u and 1/u")

    def __mul__(self, other):
        if isinstance(other, CPoly):
            self._check(other)
            return CPoly(np.convolve(self.coeffs, other.coeffs), self.reciprocal)
        return CPoly(self.coeffs * other, self.reciprocal)

    __rmul__ = __mul__

    def __add__(self, other):
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        c = np.zeros(n, dtype=complex)
        c[: len(self.coeffs)] += self.coeffs
        c[: len(other.coeffs)] += other.coeffs
        return CPoly(c, self.reciprocal)

    def __sub__(self, other):
        return self + (-1) * other

    def __neg__(self):
        return (-1) * self

    def padded(self, n):
        c = np.zeros(n, dtype=complex)
        c[: len(self.coeffs)] = self.coeffs
        return c

    def to_json(self):
        return [[float(z.real), float(z.imag)] for z in self.coeffs]

    @classmethod
    def one(cls, reciprocal=False):
        return cls([1.0], reciprocal)


def poly_from_roots(roots, reciprocal=False):
    """prod (1 - v/r) expanded; the constant term is exactly 1."""
    c = np.ones(1, dtype=complex)
    for r in roots:
        if r == 0:
            raise DomainError("zero root not allowed")
        c = np.convolve(c, [1.0, -1.0 / r])
    return CPoly(c, reciprocal)


def poly_from_factors(factors, reciprocal=False):
    """prod (1 + f v) expanded."""
    c = np.ones(1, dtype=complex)
    for f in factors:
        c = np.convolve(c, [1.0, f])
    return CPoly(c, reciprocal)


def q_scale(p, lam):
    """Substitute v -> lam v, i.e. c_n -> lam^n c_n."""
    n = np.arange(len(p.coeffs))
    return CPoly(p.coeffs * complex(lam) ** n, p.reciprocal)


@dataclass(frozen=True, eq=False)
class QProduct:
    """prod_{j=0}^{n-1} base(nome^(k+j) v); n = None means infinity."""
    base: CPoly
    nome: complex
    shift: int = 0
    n: Optional[int] = None
    tol: float = 1e-17

    def tail_bound(self, j, u):
        # |base(w) - 1| <= sum_i |c_i| |w|^i for w = nome^(k+j) u, summed geometrically
        w = np.abs(self.nome) ** (self.shift + j) * np.max(np.abs(u))
        c = np.abs(self.base.coeffs[1:])
        s = np.sum(c * w ** np.arange(1, len(c) + 1))
        return s / (1 - abs(self.nome))

    def __call__(self, u):
        if self.base.coeffs[0] != 1:
            raise DomainError("QProduct base must satisfy base(0) = 1")
        u = np.asarray(u, dtype=complex)
        out = np.ones_like(u)
        z = u * self.nome ** self.shift
        j = 0
        while True:
            if self.n is not None and j >= self.n:
                break
            if self.n is None and self.tail_bound(j, u) < self.tol:
                break
            out = out * self.base(z)
            z = z * self.nome
            j += 1
            if j > kernels.MAX_TERMS:
                raise RuntimeError("QProduct failed to converge")
        return out if out.ndim else complex(out)


def model_polys(spec):
    """A, B (in u) and A', B' (in 1/u) for a ModelSpec."""
    q = spec.params.q
    a_nu, b_nu = spec.a_nu, spec.b_nu
    return {
        "A": poly_from_factors(1.0 / (q * a_nu)),
        "B": poly_from_factors(q / b_nu),
        "Aprime": poly_from_factors(q * a_nu, reciprocal=True),
        "Bprime": poly_from_factors(b_nu / q, reciprocal=True),
    }


class LinearSolution(NamedTuple):
    x: np.ndarray
    residual: float
    cond: float


def linear_solve(M, rhs, pivot_tol=1e-13, refine=2):
    """Solve M s = rhs with row/column equilibration, LU and refinement.

    Returns (s, max-norm residual, condition estimate of the scaled system).
    Raises SingularSystemError when a scaled pivot falls below ``pivot_tol``.
    """
    M = np.asarray(M, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] != rhs.shape[0]:
        raise DomainError("linear_solve needs a square system")
    n = M.shape[0]
    if n == 0:
        return LinearSolution(np.zeros(0, dtype=complex), 0.0, 1.0)
    r = np.max(np.abs(M), axis=1)
    if np.any(r == 0):
        raise SingularSystemError("zero row in system", condition=np.inf)
    Ms = M / r[:, None]
    c = np.max(np.abs(Ms), axis=0)
    if np.any(c == 0):
        raise SingularSystemError("zero column in system", condition=np.inf)
    Ms = Ms / c[None, :]
    with warnings.catch_warnings():
        # exact zero pivots are reported below as SingularSystemError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(Ms, check_finite=True)
    d = np.abs(np.diag(lu))
    cond = float(np.linalg.cond(Ms))
    if d.min() < pivot_tol * d.max():
        raise SingularSystemError(f"pivot ratio {d.min() / d.max():.2e} below threshold",
                                  condition=cond)
    bs = rhs / r
    y = scipy.linalg.lu_solve((lu, piv), bs)
    for _ in range(refine):
        y = y + scipy.linalg.lu_solve((lu, piv), bs - Ms @ y)
    s = y / c
    res = float(np.max(np.abs(M @ s - rhs)))
    return LinearSolution(s, res, cond)


def poly_roots(p, polish=True):
    """Roots of a CPoly in its own variable, ordered by (modulus, argument)."""
    c = p.coeffs
    if p.degree < 1:
        return np.zeros(0, dtype=complex)
    z = np.polynomial.polynomial.polyroots(c).astype(complex)
    if polish:
        dc = np.polynomial.polynomial.polyder(c)
        f = kernels.polyval(c, z)
        fp = kernels.polyval(dc, z)
        ok = fp != 0
        z[ok] = z[ok] - f[ok] / fp[ok]
    return sort_roots(z)


def sort_roots(z):
    z = np.asarray(z, dtype=complex)
    order = np.lexsort((np.round(np.angle(z), 12), np.round(np.abs(z), 12)))
    return z[order]
