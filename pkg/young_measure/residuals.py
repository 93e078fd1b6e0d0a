"""Weak-form residuals of measure-valued solutions against a fixed space-time test dictionary."""
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from constitutive.models import EnergyModel
from errors import FieldError, GridMismatch
from fields.grid import Grid, GridField, grid_coordinates
from fields.spectral import curl_residual
from solver.scheme import Trajectory
from utils.transformations import split_conserved, state_to_vector, vector_to_state
from young_measure.empirical import EmpiricalYoungMeasure, pair_values

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 16
WINDOWS = ((0.0, 1.0), (0.0, 0.6), (0.4, 1.0))


def dirac_measure(grid: Grid, F: np.ndarray, v: np.ndarray, eta: np.ndarray, scale: float = np.nan):
    """The atomic measure nu_x = delta_{U(x)} of component-first (F, v, eta) arrays."""
    d = grid.dim
    Fc = np.moveaxis(F, (0, 1), (-2, -1)).reshape(-1, d, d)
    vc = np.moveaxis(v, 0, -1).reshape(-1, d)
    states = state_to_vector(Fc, vc, eta.reshape(-1))
    return EmpiricalYoungMeasure(grid, [s[None, :] for s in states], [np.ones(1)] * grid.cell_count,
                                 'full', scale)


def atomic_series(traj: Trajectory) -> list:
    """(t, Dirac measure) for every recorded state of a trajectory."""
    series = []
    for k, t in enumerate(traj.times):
        F, v, _ = split_conserved(traj.states[k], traj.dim)
        series.append((t, dirac_measure(traj.grid, F, v, traj.etas[k])))
    return series


def _modes(dim: int, count: int) -> list:
    """Integer wave vectors ordered by length, starting with zero."""
    radius = 1
    while (2 * radius + 1) ** dim < count + 1:
        radius += 1
    grid = np.stack(np.meshgrid(*([np.arange(-radius, radius + 1)] * dim), indexing='ij'), -1).reshape(-1, dim)
    half = [k for k in grid if tuple(k) >= tuple(-k)]
    half.sort(key=lambda k: (int(np.sum(k ** 2)), tuple(k)))
    return [np.array(k) for k in half]


@dataclass(frozen=True)
class SpaceTimeTest:
    """phi(t, x) = b(t) chi(x) with b = sin^2 over a window and chi a trigonometric mode."""
    k: tuple
    kind: str
    window: tuple

    def spatial(self, x: np.ndarray, nonnegative: bool = False):
        """(chi, grad chi) at cell-major points x of shape (cells, d)."""
        k = np.asarray(self.k, dtype=float)
        phase = 2.0 * np.pi * x @ k
        if self.kind == 'const':
            chi, dchi = np.ones(len(x)), np.zeros_like(x)
        elif self.kind == 'cos':
            chi, dchi = np.cos(phase), -2.0 * np.pi * np.sin(phase)[:, None] * k
        else:
            chi, dchi = np.sin(phase), 2.0 * np.pi * np.cos(phase)[:, None] * k
        if nonnegative and self.kind != 'const':
            chi = 1.0 + chi
        return chi, dchi

    def temporal(self, t: np.ndarray, span: tuple):
        t0, t1 = span
        a = t0 + self.window[0] * (t1 - t0)
        b = t0 + self.window[1] * (t1 - t0)
        s = np.clip((t - a) / (b - a), 0.0, 1.0)
        inside = (t > a) & (t < b)
        bump = np.where(inside, np.sin(np.pi * s) ** 2, 0.0)
        rate = np.where(inside, np.pi / (b - a) * np.sin(2.0 * np.pi * s), 0.0)
        return bump, rate


def probe_dictionary(dim: int, budget: int = DEFAULT_BUDGET) -> list:
    tests = []
    modes = _modes(dim, budget)
    for k in modes:
        kinds = ('const',) if not np.any(k) else ('cos', 'sin')
        for kind in kinds:
            for window in WINDOWS:
                tests.append(SpaceTimeTest(tuple(int(c) for c in k), kind, window))
                if len(tests) == budget:
                    return tests
    return tests


@dataclass
class MVResidualReport:
    max_equality: float
    max_inequality_violation: float
    energy_violation: float
    max_curl: float
    rows: pd.DataFrame
    energy_slack: np.ndarray

    def passed(self, tolerance: float) -> bool:
        return (self.max_equality <= tolerance and self.max_inequality_violation <= tolerance
                and self.energy_violation <= tolerance)

    def summary(self) -> str:
        return (f'equality {self.max_equality:.3e}, inequality violation {self.max_inequality_violation:.3e}, '
                f'energy violation {self.energy_violation:.3e}, curl {self.max_curl:.3e}')


def _gamma_totals(gamma, count: int, grid: Grid) -> np.ndarray:
    if gamma is None:
        return np.zeros(count)
    totals = []
    for g in gamma:
        if isinstance(g, GridField):
            if g.grid != grid:
                raise GridMismatch(FieldError.GRID_MISMATCH)
            values = g.values
        else:
            values = np.asarray(g, dtype=float)
        if np.any(values < 0.0):
            raise ValueError('concentration measures are nonnegative')
        totals.append(float(np.sum(values) * grid.cell_volume) if values.ndim else float(values))
    if len(totals) != count:
        raise ValueError('gamma needs one entry per recorded time')
    return np.array(totals)


def _weigh(values: np.ndarray, chi: np.ndarray, volume: float) -> np.ndarray:
    """Midpoint quadrature of time-major, cell-second values against chi."""
    return np.tensordot(values, chi, axes=([1], [0])) * volume


def mv_residuals(nu_series: list, gamma, model: EnergyModel, test_budget: int = DEFAULT_BUDGET, r=None,
                 gamma0: float = None) -> MVResidualReport:
    """Weak residuals of the kinematic, momentum and entropy rows plus the integrated energy inequality.

    nu_series is a time-ordered list of (t, measure) on one grid; gamma is
    None or one concentration field (or total) per time, gamma0 the initial
    concentration and defaults to gamma at the first time.
    """
    if not nu_series:
        raise ValueError('empty measure series')
    grid = nu_series[0][1].grid
    if any(nu.grid != grid or nu.subspace != 'full' for _, nu in nu_series):
        raise GridMismatch(FieldError.GRID_MISMATCH)
    d = grid.dim
    volume = grid.cell_volume
    times = np.array([t for t, _ in nu_series], dtype=float)
    x = np.moveaxis(grid_coordinates(grid), 0, -1).reshape(-1, d)
    coords = grid_coordinates(grid)

    means, stresses, supplies, energy, curl = [], [], [], [], 0.0
    for t, nu in nu_series:
        mean = pair_values(nu, 'id')
        means.append(mean)
        stresses.append(pair_values(nu, 'stress', model))
        energy.append(float(np.sum(pair_values(nu, 'total_energy', model)) * volume))
        if r is None:
            supplies.append(np.zeros(grid.cell_count))
        else:
            rate = r(t, coords) if callable(r) else np.full(grid.shape, float(r))
            rate = np.broadcast_to(rate, grid.shape).reshape(-1)
            supplies.append(rate * pair_values(nu, 'inverse_temperature', model))
        F_bar = np.moveaxis(mean[:, :d * d].reshape(grid.shape + (d, d)), (-2, -1), (0, 1))
        curl = max(curl, curl_residual(GridField(grid, 'matrix', np.ascontiguousarray(F_bar))))
    means = np.array(means)
    stresses = np.array(stresses)
    supplies = np.array(supplies)
    F_bar, v_bar, _ = vector_to_state(means, d)
    eta_bar = means[..., -1]

    rows = []
    span = (times[0], times[-1])
    for index, test in enumerate(probe_dictionary(d, test_budget)):
        bump, rate = test.temporal(times, span)
        chi, dchi = test.spatial(x)
        kinematic = trapezoid(-rate[:, None, None] * _weigh(F_bar, chi, volume)
                              + bump[:, None, None] * np.einsum('tci,ca->tia', v_bar, dchi) * volume, times, axis=0)
        momentum = trapezoid(-rate[:, None] * _weigh(v_bar, chi, volume)
                             + bump[:, None] * np.einsum('tcia,ca->ti', stresses, dchi) * volume, times, axis=0)
        chi_plus, _ = test.spatial(x, nonnegative=True)
        entropy = trapezoid(-rate * (eta_bar @ chi_plus) * volume - bump * (supplies @ chi_plus) * volume, times)
        for (i, a), value in np.ndenumerate(kinematic):
            rows.append({'test': index, 'row': f'F{i + 1}{a + 1}', 'kind': 'equality', 'residual': value})
        for i, value in enumerate(momentum):
            rows.append({'test': index, 'row': f'v{i + 1}', 'kind': 'equality', 'residual': value})
        rows.append({'test': index, 'row': 'eta', 'kind': 'inequality', 'residual': entropy})
    frame = pd.DataFrame(rows)

    gammas = _gamma_totals(gamma, len(times), grid)
    initial = gammas[0] if gamma0 is None else float(gamma0)
    if initial < 0.0:
        raise ValueError('concentration measures are nonnegative')
    supplied = np.zeros(len(times))
    if r is not None:
        totals = [float(np.sum(np.broadcast_to(r(t, coords) if callable(r) else float(r), grid.shape)) * volume)
                  for t in times]
        supplied = np.concatenate([[0.0], np.cumsum(0.5 * (np.array(totals[1:]) + np.array(totals[:-1]))
                                                    * np.diff(times))])
    slack = energy[0] + initial + supplied - np.array(energy) - gammas

    equality = frame[frame.kind == 'equality'].residual.abs().max()
    violation = max(0.0, -frame[frame.kind == 'inequality'].residual.min())
    report = MVResidualReport(float(equality), float(violation), float(max(0.0, -np.min(slack))), curl,
                              frame, slack)
    logger.info('measure-valued residuals: %s', report.summary())
    return report
