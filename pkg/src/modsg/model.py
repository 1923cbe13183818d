"""Model specification: inhomogeneities, twist t and derived quantities."""
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError

CENTER_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ModelSpec:
    params: object  # ModularParams
    N: int
    alpha: tuple
    beta: tuple
    tau: float
    mu: float
    symmetric: bool = False
    xi_mode: str = "free"

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        self.validate()

    def validate(self):
        N = self.N
        if int(N) != N or N < 1:
            raise ValidationError(f"N must be a positive integer, got {N}")
        if len(self.alpha) != N or len(self.beta) != N:
            raise ValidationError("alpha and beta must each have N entries")
        al, be = np.array(self.alpha), np.array(self.beta)
        if abs(al.mean() - self.mu) > CENTER_TOL:
            raise ValidationError(f"mean(alpha) = {al.mean():.15g} differs from mu = {self.mu}")
        if abs(be.mean() + self.mu) > CENTER_TOL:
            raise ValidationError(f"mean(beta) = {be.mean():.15g} differs from -mu = {-self.mu}")
        if not abs(self.t) ** 2 < 1:
            raise ValidationError(f"|t^2| = {abs(self.t) ** 2:.6g} must be < 1 (need tau < 0)")
        if self.symmetric and not np.allclose(np.sort(be), np.sort(-al), atol=CENTER_TOL, rtol=0):
            raise ValidationError("symmetric mode requires beta = -alpha as multisets")
        if self.xi_mode not in ("free", "parity"):
            raise ValidationError(f"unknown xi_mode {self.xi_mode!r}")
        if self.xi_mode == "parity" and not self.symmetric:
            raise ValidationError("parity xi_mode needs a symmetric model")

    @property
    def b(self):
        return self.params.b

    @property
    def t(self):
        return complex(np.exp(2 * np.pi * self.params.b * self.tau))

    @property
    def tstar(self):
        return complex(np.exp(2 * np.pi * self.params.b_inv * self.tau))

    @property
    def a(self):
        return complex(np.exp(2 * np.pi * self.params.b * self.mu))

    @property
    def bparam(self):
        return complex(np.exp(-2 * np.pi * self.params.b * self.mu))

    @property
    def a_nu(self):
        return np.exp(2 * np.pi * self.params.b * np.array(self.alpha))

    @property
    def b_nu(self):
        return np.exp(2 * np.pi * self.params.b * np.array(self.beta))

    @property
    def tau_prime(self):
        return 2 * self.tau / self.N + self.mu + 1j * abs(self.params.eta)

    def star(self):
        """Same model seen through b -> 1/b (a_nu -> a_nu*, t -> t*)."""
        return replace(self, params=self.params.star())

    def mirror(self):
        """alpha, beta, mu -> minus themselves: the chi_- problem in 1/u."""
        return replace(self, alpha=tuple(-a for a in self.alpha),
                       beta=tuple(-v for v in self.beta), mu=-self.mu)

    def as_dict(self):
        return {"N": self.N, "alpha": list(self.alpha), "beta": list(self.beta),
                "tau": self.tau, "mu": self.mu, "symmetric": self.symmetric,
                "xi_mode": self.xi_mode, "t": self.t, "tstar": self.tstar,
                "tau_prime": self.tau_prime}


def make_model(params, alpha, beta=None, tau=-0.3, mu=None, symmetric=False, xi_mode=None):
    """Convenience constructor: beta defaults to -alpha, mu to mean(alpha)."""
    alpha = [float(a) for a in alpha]
    if beta is None:
        beta = [-a for a in alpha]
        symmetric = True
    if mu is None:
        mu = float(np.mean(alpha))
    if xi_mode is None:
        xi_mode = "parity" if symmetric else "free"
    return ModelSpec(params=params, N=len(alpha), alpha=tuple(alpha), beta=tuple(beta),
                     tau=float(tau), mu=float(mu), symmetric=symmetric, xi_mode=xi_mode)
