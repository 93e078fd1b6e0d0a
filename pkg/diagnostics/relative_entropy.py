"""Relative entropy between a trajectory and a classical reference, with the right-hand-side channels."""
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid

from constitutive.models import EnergyModel
from constitutive.relative import (
    relative_energy_values,
    relative_stress_values,
    relative_temperature_values,
)
from errors import FieldError, GridMismatch, MissingTimeDerivatives, SolverError
from fields.grid import grid_coordinates, vp_density
from fields.spectral import potential_values
from solver.scheme import Trajectory, to_cell_major
from utils.transformations import split_conserved

logger = logging.getLogger(__name__)

C_MAX = 1e6
ATOL = 1e-12


@dataclass
class RelEntropySeries:
    times: np.ndarray
    I_total: np.ndarray
    lower_order: np.ndarray
    distance: np.ndarray
    rhs_theta: np.ndarray = None
    rhs_sigma: np.ndarray = None
    rhs_heat: np.ndarray = None

    def frame(self) -> pd.DataFrame:
        columns = {'t': self.times, 'I_total': self.I_total, 'lower_order': self.lower_order,
                   'distance': self.distance}
        for name in ('rhs_theta', 'rhs_sigma', 'rhs_heat'):
            values = getattr(self, name)
            columns[name] = values if values is not None else np.full(len(self.times), np.nan)
        return pd.DataFrame(columns)


def _check_grids(traj: Trajectory, ref) -> None:
    if traj.grid != ref.grid:
        raise GridMismatch(FieldError.GRID_MISMATCH)


def _supply(r, t, coords):
    if r is None:
        return 0.0
    return r(t, coords) if callable(r) else float(r)


def _series(model: EnergyModel, traj: Trajectory, ref, channels: bool, r=None) -> RelEntropySeries:
    grid = traj.grid
    volume = grid.cell_volume
    coords = grid_coordinates(grid)
    times = np.asarray(traj.times, dtype=float)
    count = len(times)
    I_total, lower, distance = np.zeros(count), np.zeros(count), np.zeros(count)
    rhs = np.zeros((3, count))
    fluctuation, drift = [], []

    for k, t in enumerate(times):
        F, v, _ = split_conserved(traj.states[k], traj.dim)
        eta = traj.etas[k]
        Fb, vb, etab = ref.state(t)
        Fc, vc = to_cell_major(F, v)
        Fbc, vbc = to_cell_major(Fb, vb)

        dv = vc - vbc
        I = 0.5 * np.sum(dv ** 2, axis=-1) + relative_energy_values(model, Fc, eta, Fbc, etab)
        I_total[k] = np.sum(I) * volume
        dF_norm = np.sqrt(np.sum((Fc - Fbc) ** 2, axis=(-2, -1)))
        distance[k] = np.sum(np.sum(dv ** 2, axis=-1) + vp_density(dF_norm, model.p)
                             + vp_density(np.abs(eta - etab), model.q)) * volume
        fluctuation.append(potential_values(F - Fb, grid))
        drift.append(np.mean(dv.reshape(-1, grid.dim), axis=0))

        if channels:
            dFb, _, detab = ref.dt_state(t)
            dFbc = np.moveaxis(dFb, (0, 1), (-2, -1))
            rel_theta = relative_temperature_values(model, Fc, eta, Fbc, etab)
            rel_sigma = relative_stress_values(model, Fc, eta, Fbc, etab)
            rhs[0, k] = np.sum(detab * rel_theta) * volume
            rhs[1, k] = np.sum(np.einsum('...ij,...ij->...', dFbc, rel_sigma)) * volume
            supply = _supply(r, t, coords)
            if np.any(supply):
                theta = model._temperature(Fc, eta)
                theta_b = model._temperature(Fbc, etab)
                rhs[2, k] = np.sum((theta - theta_b) * (supply / theta - supply / theta_b)) * volume

    # y - ybar is the zero-mean potential of F - Fbar plus the mean displacement carried by v - vbar
    shift = cumulative_trapezoid(np.array(drift), times, axis=0, initial=0.0) if count > 1 \
        else np.zeros((count, grid.dim))
    for k in range(count):
        dy = fluctuation[k] + shift[k].reshape((grid.dim,) + (1,) * grid.dim)
        lower[k] = np.sum(vp_density(np.sqrt(np.sum(dy ** 2, axis=0)), model.p)) * volume

    series = RelEntropySeries(times, I_total, lower, distance)
    if channels:
        series.rhs_theta, series.rhs_sigma, series.rhs_heat = rhs
    if np.min(I_total) < -1e-10:
        logger.warning('relative entropy went negative (%.3g): the model is not convex here', np.min(I_total))
    return series


def relative_entropy_total(model: EnergyModel, traj: Trajectory, ref) -> RelEntropySeries:
    """I_total(t) = int |v - vb|^2/2 + e(F, eta | Fb, etab) and the lower-order term int |V_p(y - yb)|^2."""
    _check_grids(traj, ref)
    return _series(model, traj, ref, channels=False)


def rhs_terms(model: EnergyModel, traj: Trajectory, ref, r=None) -> RelEntropySeries:
    """The series plus the three right-hand-side channels:
    int d_t etab theta(.|.), int d_t Fb : Sigma(.|.) and int (theta - thetab)(r/theta - r/thetab).
    """
    _check_grids(traj, ref)
    if not getattr(ref, 'has_time_derivatives', False):
        raise MissingTimeDerivatives(SolverError.NO_TIME_DERIVATIVES)
    return _series(model, traj, ref, channels=True, r=r)


def reference_trajectory(ref, times) -> Trajectory:
    """The reference sampled at the given times, shaped like a solver trajectory."""
    traj = Trajectory(ref.grid, ref.grid.dim)
    for t in times:
        _, _, eta = ref.state(t)
        traj.times.append(float(t))
        traj.states.append(ref.conserved(t))
        traj.etas.append(eta)
    return traj


@dataclass
class GronwallFit:
    C: float
    feasible: bool
    atol: float
    binding_time: float = np.nan
    margins: np.ndarray = field(default=None, repr=False)


def gronwall_fit(series: RelEntropySeries, floor: float = 0.0) -> GronwallFit:
    """Smallest C with X(t) <= X(0) + atol + C int_0^t (distance + lower_order), X = I_total + lower_order.

    The bound is linear in C, so the minimum is the largest ratio over the
    recorded times; C above 1e6 is reported infeasible.
    """
    times = np.asarray(series.times, dtype=float)
    if times.size == 0:
        raise ValueError('empty series')
    atol = ATOL + float(floor)
    X = series.I_total + series.lower_order
    excess = X - (X[0] + atol)
    J = cumulative_trapezoid(series.distance + series.lower_order, times, initial=0.0)

    if np.any((J <= 0.0) & (excess > 0.0)):
        logger.warning('relative entropy grows where the accumulated distance vanishes')
        return GronwallFit(np.inf, False, atol)
    ratios = np.where(J > 0.0, excess / np.where(J > 0.0, J, 1.0), 0.0)
    k = int(np.argmax(ratios))
    C = max(0.0, float(ratios[k]))
    margins = X[0] + atol + C * J - X
    feasible = C <= C_MAX
    if not feasible:
        logger.warning('Gronwall constant %.3g exceeds %.0e', C, C_MAX)
    return GronwallFit(C, feasible, atol, float(times[k]) if C > 0 else np.nan, margins)
