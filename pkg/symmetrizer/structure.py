"""Conservation-law structure of adiabatic thermoelasticity.

Flattening order everywhere: F row-major, then v, then the energy slot.
"""
import logging
from dataclasses import dataclass

import numpy as np

from constitutive.models import EnergyModel
from constitutive.relative import State
from utils.transformations import state_size, state_to_vector

logger = logging.getLogger(__name__)

FD_STEP = 1e-6


@dataclass(frozen=True)
class BalanceLawStructure:
    model: EnergyModel

    @property
    def state_dim(self) -> int:
        return state_size(self.model.dim)

    def A(self, U: State) -> np.ndarray:
        return conserved_vector(self.model, U.F, U.v, U.eta)

    def flux(self, U: State, alpha: int) -> np.ndarray:
        n = np.eye(self.model.dim)[alpha]
        return directional_flux(self.model, U.F, U.v, U.eta, n)


@dataclass
class SymmetrizerResult:
    matrix: np.ndarray
    min_eig_full: float = np.nan
    min_quotient_cone: float = np.nan
    mode: str = 'full'
    witness: np.ndarray = None
    theta: float = np.nan

    def row(self) -> dict:
        return {'mode': self.mode, 'theta': self.theta, 'min_eig_full': self.min_eig_full,
                'min_quotient_cone': self.min_quotient_cone,
                'witness': ' '.join(f'{w:.17g}' for w in (self.witness if self.witness is not None else []))}


def _as_state(model, F, v, eta):
    F = model.as_matrix(F)
    v = np.asarray(v, dtype=float)
    if model.dim == 1 and (v.ndim == 0 or v.shape[-1] != 1):
        v = v[..., None]
    return F, v, np.asarray(eta, dtype=float)


def conserved_vector(model: EnergyModel, F, v, eta) -> np.ndarray:
    """A(U) = (F, v, |v|^2/2 + e)."""
    F, v, eta = _as_state(model, F, v, eta)
    E = 0.5 * np.sum(v ** 2, axis=-1) + model._energy(F, eta)
    return state_to_vector(F, v, E)


def directional_flux(model: EnergyModel, F, v, eta, n) -> np.ndarray:
    """sum_alpha n_alpha f_alpha(U) for dW/dt + div f = 0 written as W_t + sum d_alpha f_alpha = 0."""
    F, v, eta = _as_state(model, F, v, eta)
    n = np.asarray(n, dtype=float)
    sigma = model._stress(F, eta)
    f_F = -v[..., :, None] * n
    sigma_n = np.einsum('...ia,a->...i', sigma, n)
    f_v = -sigma_n
    f_E = -np.sum(sigma_n * v, axis=-1)
    return state_to_vector(f_F, f_v, f_E)


def multiplier_G(model: EnergyModel, U: State) -> np.ndarray:
    """G(U) = (e_F, v, -1) / theta."""
    F, v, eta = _as_state(model, U.F, U.v, U.eta)
    model.check_admissible(F, eta)
    theta = model._temperature(F, eta)
    G = state_to_vector(model._stress(F, eta), v, -np.ones_like(eta))
    return G / np.asarray(theta)[..., None]


def _jacobian(fn, x: np.ndarray) -> np.ndarray:
    """Central-difference Jacobian of fn at x (columns indexed by x)."""
    fx = fn(x)
    J = np.empty((fx.size, x.size))
    for k in range(x.size):
        h = FD_STEP * max(1.0, abs(x[k]))
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        J[:, k] = (fn(xp) - fn(xm)) / (2.0 * h)
    return J


def random_admissible_states(model: EnergyModel, count: int, rng, box: float = 1.0) -> list:
    d = model.dim
    states = []
    lo = max(-box, model.admissible_eta_min + 0.1)
    while len(states) < count:
        F = rng.uniform(-box, box, size=(d, d))
        v = rng.uniform(-box, box, size=d)
        eta = rng.uniform(lo, box)
        if model.is_admissible(F, eta):
            states.append(State(F, v, eta))
    return states


@dataclass
class EntropyPairReport:
    model: str
    max_residual_A: float
    max_residual_flux: float
    states_checked: int

    @property
    def max_residual(self) -> float:
        return max(self.max_residual_A, self.max_residual_flux)


def entropy_pair_residual(model: EnergyModel, n_samples: int = 100, seed: int = 0, multiplier=None) -> EntropyPairReport:
    """Check G.grad A = grad(-eta) and G.grad f_alpha = 0 with finite-difference Jacobians."""
    multiplier = multiplier or multiplier_G
    rng = np.random.default_rng(seed)
    d = model.dim
    m = state_size(d)
    grad_entropy = np.zeros(m)
    grad_entropy[-1] = -1.0
    worst_A = worst_f = 0.0
    for U in random_admissible_states(model, n_samples, rng):
        x = state_to_vector(U.F, U.v, U.eta)

        def unpack(y):
            return y[:d * d].reshape(d, d), y[d * d:d * d + d], y[-1]

        G = multiplier(model, U)
        J_A = _jacobian(lambda y: conserved_vector(model, *unpack(y)), x)
        worst_A = max(worst_A, float(np.max(np.abs(G @ J_A - grad_entropy))))
        for alpha in range(d):
            n = np.eye(d)[alpha]
            J_f = _jacobian(lambda y: directional_flux(model, *unpack(y), n), x)
            worst_f = max(worst_f, float(np.max(np.abs(G @ J_f))))
    logger.info('%s entropy pair residuals: A %.3g, flux %.3g', model.name, worst_A, worst_f)
    return EntropyPairReport(model.name, worst_A, worst_f, n_samples)


def symmetrizer_matrix(model: EnergyModel, F, eta) -> SymmetrizerResult:
    """(1/theta) [[e_FF, 0, e_Feta], [0, I, 0], [e_Feta^T, 0, e_etaeta]] in the flattened basis."""
    block = model.hessian(F, eta)
    F = model.as_matrix(F)
    theta = float(model._temperature(F, np.asarray(eta, dtype=float)))
    d = model.dim
    d2 = d * d
    m = state_size(d)
    S = np.zeros((m, m))
    S[:d2, :d2] = block.FF_matrix
    S[d2:d2 + d, d2:d2 + d] = np.eye(d)
    S[:d2, -1] = block.e_Feta.reshape(d2)
    S[-1, :d2] = block.e_Feta.reshape(d2)
    S[-1, -1] = block.e_etaeta
    return SymmetrizerResult(matrix=S / theta, theta=theta)
