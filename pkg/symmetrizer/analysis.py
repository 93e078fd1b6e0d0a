"""Positivity of the symmetrizer, flux Jacobians and wave-speed bounds."""
import logging

import numpy as np
import pandas as pd
from scipy.stats import norm, qmc

from constitutive.models import EnergyModel
from constitutive.recovery import recover_entropy
from constitutive.relative import State
from symmetrizer.structure import (
    SymmetrizerResult,
    _jacobian,
    conserved_vector,
    directional_flux,
    symmetrizer_matrix,
)
from utils.transformations import state_size, vector_to_state

logger = logging.getLogger(__name__)

REFINE_STEPS = 50
SPEED_SAFETY = 1.1
POWER_ITERATIONS = 200


def sobol_directions(dim: int, count: int, seed: int) -> np.ndarray:
    """Unit vectors in R^dim for `count` scrambled Sobol points, shape (count, dim)."""
    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    points = sampler.random(count)
    gauss = norm.ppf(np.clip(points, 1e-12, 1.0 - 1e-12))
    lengths = np.linalg.norm(gauss, axis=1, keepdims=True)
    gauss = np.where(lengths > 1e-12, gauss, np.eye(dim)[0])
    return gauss / np.linalg.norm(gauss, axis=1, keepdims=True)


def _split_pair(x, dim):
    a, n = x[:dim], x[dim:]
    return a / np.linalg.norm(a), n / np.linalg.norm(n)


def direction_sweep(value_fn, dim: int, n_dirs: int, seed: int, refine_steps: int = REFINE_STEPS):
    """Minimize value_fn(a, n) over unit pairs: Sobol sweep, then coordinate descent from the worst pair."""
    pairs = sobol_directions(2 * dim, n_dirs, seed)
    best_x, best = None, np.inf
    for x in pairs:
        a, n = _split_pair(x, dim)
        if np.linalg.norm(x[:dim]) < 1e-12 or np.linalg.norm(x[dim:]) < 1e-12:
            continue
        value = value_fn(a, n)
        if value < best:
            best, best_x = value, np.concatenate([a, n])
    step = 0.1
    for _ in range(refine_steps):
        improved = False
        for k in range(2 * dim):
            for sign in (1.0, -1.0):
                trial = best_x.copy()
                trial[k] += sign * step
                if np.linalg.norm(trial[:dim]) < 1e-12 or np.linalg.norm(trial[dim:]) < 1e-12:
                    continue
                a, n = _split_pair(trial, dim)
                value = value_fn(a, n)
                if value < best:
                    best, best_x, improved = value, np.concatenate([a, n]), True
        if not improved:
            step *= 0.5
    a, n = _split_pair(best_x, dim)
    return float(best), a, n


def _cone_basis(a, n, dim):
    """Orthonormal basis of the cone slice {(t a(x)n, v, s)} in the flattened state space."""
    m = state_size(dim)
    d2 = dim * dim
    basis = np.zeros((m, dim + 2))
    basis[:d2, 0] = np.outer(a, n).reshape(d2)
    basis[d2:d2 + dim, 1:dim + 1] = np.eye(dim)
    basis[-1, -1] = 1.0
    return basis


def _cone_minimum(S, a, n, dim):
    basis = _cone_basis(a, n, dim)
    values, vectors = np.linalg.eigh(basis.T @ S @ basis)
    return values[0], basis @ vectors[:, 0]


def check_symmetrizability(model: EnergyModel, U: State, mode: str = 'full', n_dirs: int = 1024,
                           seed: int = 0) -> SymmetrizerResult:
    """Smallest eigenvalue of the symmetrizer, or its minimum over unit wave-cone vectors."""
    result = symmetrizer_matrix(model, U.F, U.eta)
    S = result.matrix
    values, vectors = np.linalg.eigh(S)
    result.min_eig_full = float(values[0])
    result.mode = mode
    if mode == 'full':
        result.witness = vectors[:, 0]
        return result
    if mode != 'wave_cone':
        raise ValueError(f'unknown symmetrizability mode {mode!r}')

    dim = model.dim
    value, a, n = direction_sweep(lambda a, n: _cone_minimum(S, a, n, dim)[0], dim, n_dirs, seed)
    _, witness = _cone_minimum(S, a, n, dim)
    result.min_quotient_cone = float(witness @ S @ witness)
    result.witness = witness
    logger.debug('%s cone minimum %.6g (full %.6g)', model.name, value, result.min_eig_full)
    return result


def legendre_hadamard_minimum(model: EnergyModel, F, eta, n_dirs: int = 256, seed: int = 0):
    """min over unit a, n of e_FF[a(x)n, a(x)n]; returns (value, a, n)."""
    e_FF = model.hessian(F, eta).e_FF
    return direction_sweep(lambda a, n: float(np.einsum('ij,ijkl,kl->', np.outer(a, n), e_FF, np.outer(a, n))),
                           model.dim, n_dirs, seed)


def flux_jacobian(model: EnergyModel, U: State, n) -> np.ndarray:
    """Jacobian of the directional flux in conservative variables, eta recovered from E."""
    model.check_admissible(U.F, U.eta)
    dim = model.dim
    W0 = conserved_vector(model, U.F, U.v, U.eta)

    def flux_of(W):
        F, v, E = vector_to_state(W, dim)
        eta = recover_entropy(model, F, v, E)
        return directional_flux(model, F, v, eta, n)

    return _jacobian(flux_of, W0)


def _spectral_radius(J: np.ndarray) -> float:
    """Power iteration on J^2; the flux Jacobian's spectrum comes in +-c pairs."""
    J2 = J @ J
    x = np.ones(J.shape[0]) + 0.1 * np.arange(J.shape[0])
    estimate = 0.0
    for _ in range(POWER_ITERATIONS):
        y = J2 @ x
        size = np.linalg.norm(y)
        if size == 0.0:
            return 0.0
        estimate = size / np.linalg.norm(x)
        x = y / size
    return float(np.sqrt(estimate))


def max_wave_speed(model: EnergyModel, U: State) -> float:
    speeds = [_spectral_radius(flux_jacobian(model, U, e)) for e in np.eye(model.dim)]
    return SPEED_SAFETY * max(speeds)


def acoustic_speed(model: EnergyModel, F, eta) -> np.ndarray:
    """Cellwise bound sqrt(max eig Q(e_alpha)) * 1.1 with Q_ij = e_FF[i, alpha, j, alpha].

    The entropy wave travels at speed zero, so the acoustic tensor at fixed
    entropy bounds the characteristic speeds.
    """
    e_FF = model._hessian(model.as_matrix(F), np.asarray(eta, dtype=float)).e_FF
    speeds = []
    for alpha in range(model.dim):
        Q = e_FF[..., :, alpha, :, alpha]
        Q = 0.5 * (Q + np.swapaxes(Q, -1, -2))
        speeds.append(np.linalg.eigvalsh(Q)[..., -1])
    return SPEED_SAFETY * np.sqrt(np.maximum(np.max(np.stack(speeds), axis=0), 0.0))


def report_frame(states, results) -> pd.DataFrame:
    """One CSV row per checked state."""
    rows = []
    for U, result in zip(states, results):
        row = {'F': ' '.join(f'{x:.17g}' for x in np.ravel(U.F)),
               'v': ' '.join(f'{x:.17g}' for x in np.ravel(U.v)),
               'eta': float(U.eta)}
        row.update(result.row())
        rows.append(row)
    return pd.DataFrame(rows)
