"""Relative quantities: second-order Taylor remainders around a base state."""
from dataclasses import dataclass

import numpy as np

from constitutive.models import EnergyModel


@dataclass(frozen=True)
class State:
    """Point (F, v, eta) of the state space; arrays may carry leading batch axes."""
    F: np.ndarray
    v: np.ndarray
    eta: np.ndarray


def _pair(model: EnergyModel, z, check: bool):
    F, eta = z
    F = model.as_matrix(F)
    eta = np.asarray(eta, dtype=float)
    if check:
        model.check_admissible(F, eta)
    return F, eta


def relative_energy_values(model: EnergyModel, F, eta, Fb, etab):
    """e(F, eta | Fb, etab) without admissibility checks."""
    dF = F - Fb
    return (model._energy(F, eta) - model._energy(Fb, etab)
            - np.einsum('...ij,...ij->...', model._stress(Fb, etab), dF)
            - model._temperature(Fb, etab) * (eta - etab))


def relative_stress_values(model: EnergyModel, F, eta, Fb, etab):
    block = model._hessian(Fb, etab)
    dF = F - Fb
    deta = np.asarray(eta - etab)
    return (model._stress(F, eta) - model._stress(Fb, etab)
            - np.einsum('...ijkl,...kl->...ij', block.e_FF, dF)
            - block.e_Feta * deta[..., None, None])


def relative_temperature_values(model: EnergyModel, F, eta, Fb, etab):
    block = model._hessian(Fb, etab)
    dF = F - Fb
    return (model._temperature(F, eta) - model._temperature(Fb, etab)
            - np.einsum('...ij,...ij->...', block.e_Feta, dF)
            - block.e_etaeta * (eta - etab))


def relative_energy(model: EnergyModel, z, zbar):
    """e(z) - e(zb) - e_F(zb):(F - Fb) - e_eta(zb)(eta - etab) for z = (F, eta)."""
    F, eta = _pair(model, z, True)
    Fb, etab = _pair(model, zbar, True)
    return relative_energy_values(model, F, eta, Fb, etab)


def relative_stress(model: EnergyModel, z, zbar):
    F, eta = _pair(model, z, True)
    Fb, etab = _pair(model, zbar, True)
    return relative_stress_values(model, F, eta, Fb, etab)


def relative_temperature(model: EnergyModel, z, zbar):
    F, eta = _pair(model, z, True)
    Fb, etab = _pair(model, zbar, True)
    return relative_temperature_values(model, F, eta, Fb, etab)


def relative_entropy_density(model: EnergyModel, U: State, Ubar: State):
    """I(U | Ubar) = |v - vb|^2 / 2 + e(F, eta | Fb, etab)."""
    dv = np.asarray(U.v, dtype=float) - np.asarray(Ubar.v, dtype=float)
    kinetic = 0.5 * np.sum(np.atleast_1d(dv) ** 2, axis=-1) if np.ndim(dv) else 0.5 * dv ** 2
    return kinetic + relative_energy(model, (U.F, U.eta), (Ubar.F, Ubar.eta))
