"""Entropy recovery from the conserved energy: solve e(F, eta) = E - |v|^2/2."""
import logging

import numpy as np

from constitutive.models import EnergyModel
from errors import ModelError, RecoveryFailure

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 200
RESIDUAL_TOLERANCE = 1e-12


def _kinetic(v, dim):
    v = np.asarray(v, dtype=float)
    if dim == 1 and (v.ndim == 0 or v.shape[-1] != 1):
        return 0.5 * v ** 2
    return 0.5 * np.sum(v ** 2, axis=-1)


def recover_entropy_values(model: EnergyModel, F, internal, eta_guess=None, time=None):
    """Vectorized safeguarded Newton for e(F, eta) = internal.

    F has shape (..., d, d), internal has shape (...). Raises RecoveryFailure
    naming the first offending cell.
    """
    F = model.as_matrix(F)
    target = np.asarray(internal, dtype=float)
    scale = np.maximum(1.0, np.abs(target))

    floor = model.admissible_eta_min
    if np.isfinite(floor):
        lo = np.full(target.shape, floor + 1e-14 * max(1.0, abs(floor)))
    else:
        lo = np.full(target.shape, -1.0)
        for _ in range(MAX_ITERATIONS):
            bad = model._energy(F, lo) - target >= 0
            if not np.any(bad):
                break
            lo = np.where(bad, 2.0 * lo - 1.0, lo)
    f_lo = model._energy(F, lo) - target
    out_of_range = ~(f_lo < 0)
    if np.any(out_of_range):
        _fail(ModelError.RECOVERY_RANGE, out_of_range, time)

    hi = np.maximum(lo + 1.0, 1.0)
    for _ in range(MAX_ITERATIONS):
        short = model._energy(F, hi) - target <= 0
        if not np.any(short):
            break
        hi = np.where(short, hi + 2.0 * (hi - lo), hi)

    eta = 0.5 * (lo + hi) if eta_guess is None else np.clip(np.asarray(eta_guess, dtype=float), lo, hi)
    for _ in range(MAX_ITERATIONS):
        f = model._energy(F, eta) - target
        if np.all(np.abs(f) <= 0.1 * RESIDUAL_TOLERANCE * scale):
            break
        lo = np.where(f < 0, eta, lo)
        hi = np.where(f > 0, eta, hi)
        theta = model._temperature(F, eta)
        with np.errstate(divide='ignore', invalid='ignore'):
            newton = eta - f / theta
        inside = (theta > 0) & (newton > lo) & (newton < hi) & np.isfinite(newton)
        eta = np.where(f == 0, eta, np.where(inside, newton, 0.5 * (lo + hi)))
    residual = np.abs(model._energy(F, eta) - target)
    stalled = ~(residual <= RESIDUAL_TOLERANCE * scale) | ~(model._temperature(F, eta) > 0)
    if np.any(stalled):
        _fail(ModelError.RECOVERY_STALLED, stalled, time)
    return eta


def _fail(message, mask, time):
    cell = tuple(int(i) for i in np.argwhere(np.atleast_1d(mask))[0]) if np.ndim(mask) else None
    logger.warning('entropy recovery failed: %s at cell %s', message, cell)
    raise RecoveryFailure(message, time=time, cell=cell)


def recover_entropy(model: EnergyModel, F, v, E):
    """The unique eta with e(F, eta) = E - |v|^2/2."""
    internal = np.asarray(E, dtype=float) - _kinetic(v, model.dim)
    eta = recover_entropy_values(model, F, internal)
    return float(eta) if np.ndim(eta) == 0 else eta
