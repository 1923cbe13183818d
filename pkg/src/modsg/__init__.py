"""Finite-N spectral bootstrap and thermodynamic ground state of the modular sinh-Gordon model."""
from . import errors  # noqa: F401
from .modular import ModularParams, log_phi, log_phi2, log_phi_quadrature, make_modular_params, qpoch, theta1
from .model import ModelSpec, make_model
from .bootstrap import BootstrapState, bootstrap_run, chi_plus, chi_minus, wronskian
from .spectral import BetheState, parity_lhs, solve_bae
from .thermo import DensityModel, gaussian_model, homogeneous_model, atom_model

__version__ = "0.1.0"
