"""Time localization of space-time sequences: rescale around t0, truncate, split off the mean, project onto gradients."""
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from errors import MeasureError, UnqueryableInput
from fields.grid import Grid, GridField, grid_coordinates, truncate_tau_field, vp_norm_sq
from fields.spectral import curl_residual, gradient_values, helmholtz_curl_free, recover_potential
from young_measure.empirical import (
    CAUCHY_TOLERANCE,
    EmpiricalYoungMeasure,
    SequenceSpec,
    from_samples,
    sample_grid,
    wasserstein1_per_cell,
)

logger = logging.getLogger(__name__)


@dataclass
class SpaceTimeSequence:
    """Members y_k = x + u_k(t, x) and eta_k(t, x), queryable at any time in the window.

    displacement(scale, t, points) returns the periodic part u_k with shape
    (d, ...); entropy(scale, t, points) the scalar eta_k. gradient, when given,
    returns grad y_k exactly and replaces the spectral derivative of u_k.
    limit(t, points) is the periodic part of the weak-limit displacement.
    """
    scales: tuple
    displacement: Callable
    entropy: Callable
    gradient: Callable = None
    window: tuple = (0.0, 1.0)
    subgrid: int = 8
    limit: Callable = None

    def __post_init__(self):
        self.scales = tuple(float(s) for s in self.scales)
        if any(b >= a for a, b in zip(self.scales, self.scales[1:])):
            raise ValueError('scales must be descending')


@dataclass
class Projection:
    scale: float
    time: float
    grad_z: GridField
    w: GridField
    mean_F: np.ndarray
    mean_eta: float
    z: GridField


@dataclass
class LocalizationReport:
    max_w1: float
    tolerance: float
    vp_integrals: list
    lp_distances: list
    max_curl: float
    projections: list = field(default_factory=list, repr=False)
    localized: EmpiricalYoungMeasure = field(default=None, repr=False)
    slice_measure: EmpiricalYoungMeasure = field(default=None, repr=False)

    @property
    def matches_slice(self) -> bool:
        return self.max_w1 <= self.tolerance

    @property
    def equiintegrable(self) -> bool:
        if len(self.vp_integrals) < 2:
            return True
        a, b = self.vp_integrals[-2:]
        return abs(b - a) <= CAUCHY_TOLERANCE * max(1.0, abs(b))

    @property
    def converging(self) -> bool:
        tail = [d for d in self.lp_distances[-3:] if np.isfinite(d)]
        return all(b < a for a, b in zip(tail, tail[1:]))

    @property
    def passed(self) -> bool:
        return self.matches_slice and self.equiintegrable and self.converging

    def summary(self) -> str:
        return (f'W1 {self.max_w1:.3e} (tolerance {self.tolerance:.3e}), V integrals '
                + ', '.join(f'{v:.6g}' for v in self.vp_integrals)
                + f', curl {self.max_curl:.2e}')


def _query(fn, expected: tuple, *args) -> np.ndarray:
    try:
        values = np.asarray(fn(*args), dtype=float)
    except (TypeError, ValueError, IndexError, KeyError) as e:
        raise UnqueryableInput(f'{MeasureError.UNQUERYABLE}: {e}')
    if values.shape != expected:
        raise UnqueryableInput(f'{MeasureError.UNQUERYABLE}: got shape {values.shape}, expected {expected}')
    if not np.all(np.isfinite(values)):
        raise UnqueryableInput(f'{MeasureError.UNQUERYABLE}: non-finite values')
    return values


def _deformation(seq: SpaceTimeSequence, scale: float, t: float, fine: Grid, points: np.ndarray) -> np.ndarray:
    d = fine.dim
    if seq.gradient is not None:
        return _query(seq.gradient, (d, d) + fine.shape, scale, t, points)
    u = _query(seq.displacement, (d,) + fine.shape, scale, t, points)
    identity = np.eye(d).reshape((d, d) + (1,) * d)
    return identity + gradient_values(u, fine)


def project_member(seq: SpaceTimeSequence, scale: float, t: float, n_trunc: float, fine: Grid,
                   points: np.ndarray) -> Projection:
    """Truncate (F, eta) at level n_trunc, split off the means, and project F onto gradients."""
    F = GridField(fine, 'matrix', _deformation(seq, scale, t, fine, points))
    eta = GridField(fine, 'scalar', _query(seq.entropy, fine.shape, scale, t, points))
    F_t, eta_t = truncate_tau_field(F, eta, n_trunc)
    mean_F = np.mean(F_t.values, axis=fine.axes)
    mean_eta = float(np.mean(eta_t.values))
    grad_z = helmholtz_curl_free(F_t)
    return Projection(scale, t, grad_z, eta_t, mean_F, mean_eta, recover_potential(F_t))


def _samples(projection: Projection) -> np.ndarray:
    grid = projection.grad_z.grid
    d = grid.dim
    values = np.zeros((d * d + d + 1,) + grid.shape)
    values[:d * d] = projection.grad_z.values.reshape((d * d,) + grid.shape)
    values[-1] = projection.w.values
    return values


def _lp_distance(projection: Projection, limit: Callable, points: np.ndarray, p: float) -> float:
    grid = projection.z.grid
    target = np.asarray(limit(projection.time, points), dtype=float)
    target = target - np.mean(target, axis=grid.axes, keepdims=True)
    diff = np.sqrt(np.sum((projection.z.values - target) ** 2, axis=0))
    return float(np.sum(diff ** p) * grid.cell_volume) ** (1.0 / p)


def time_localize(seq: SpaceTimeSequence, t0: float, n_trunc: float, target: Grid, horizon: float = 1.0,
                  local_time: float = 0.5, p: float = 2.0, q: float = 2.0, tolerance: float = None):
    """Localized sequence (grad z_k, w_k) at t0 + scale * local_time / horizon, and its verification report."""
    start, end = seq.window
    if not start < t0 < end:
        raise UnqueryableInput(f'{MeasureError.BOUNDARY_TIME}: t0={t0}')
    if not 0.0 <= local_time <= horizon:
        raise ValueError('local_time must lie in [0, horizon]')
    if t0 + seq.scales[0] * local_time / horizon >= end:
        raise UnqueryableInput(f'{MeasureError.BOUNDARY_TIME}: rescaled window leaves the time interval')
    fine = sample_grid(target, seq.subgrid)
    points = grid_coordinates(fine)

    projections, members, vp_integrals, distances = [], {}, [], []
    max_curl = 0.0
    for scale in seq.scales:
        projection = project_member(seq, scale, t0 + scale * local_time / horizon, n_trunc, fine, points)
        projections.append(projection)
        members[scale] = _samples(projection)
        vp_integrals.append(vp_norm_sq(projection.grad_z, p) + vp_norm_sq(projection.w, q))
        max_curl = max(max_curl, curl_residual(projection.grad_z))
        distances.append(_lp_distance(projection, seq.limit, points, p) if seq.limit is not None else np.nan)
        logger.debug('scale %g: V integral %.8g, curl %.2e', scale, vp_integrals[-1], max_curl)

    finest = seq.scales[-1]
    localized = from_samples(members[finest], target, seq.subgrid, 'F-eta', finest)
    slice_projection = project_member(seq, finest, t0, n_trunc, fine, points)
    slice_measure = from_samples(_samples(slice_projection), target, seq.subgrid, 'F-eta', finest)
    w1 = wasserstein1_per_cell(localized, slice_measure)

    spread = max(float(np.ptp(np.concatenate(slice_measure.atoms), axis=0).max()), 1.0)
    tolerance = (2.0 / seq.subgrid if tolerance is None else tolerance) * spread
    report = LocalizationReport(float(np.max(w1)), tolerance, vp_integrals, distances, max_curl,
                                projections, localized, slice_measure)
    spec = SequenceSpec('custom', seq.scales, seq.subgrid, target.dim, {'members': members})
    logger.info('time localization at t0=%g: %s', t0, report.summary())
    return spec, report
