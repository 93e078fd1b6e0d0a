"""Periodic finite-volume solver for adiabatic thermoelasticity in conservative variables (F, v, E).

Local Lax-Friedrichs fluxes with SSP-RK2 (Heun) time stepping. The entropy
is recovered cellwise from E after every stage.
"""
import dataclasses
import logging
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import pandas as pd

from constitutive.models import EnergyModel
from constitutive.recovery import recover_entropy_values
from constitutive.relative import State
from errors import ArtifactWriteError, CFLViolation, EnergyBoundExceeded, RunError, SolverError
from fields.grid import Grid, GridField, grid_coordinates
from fields.io import write_grid_field
from fields.spectral import curl_residual
from symmetrizer.analysis import acoustic_speed
from symmetrizer.structure import directional_flux
from utils.transformations import join_conserved, split_conserved, state_size

logger = logging.getLogger(__name__)

DEFAULT_CFL = 0.45
DIFFUSIVE_CFL = 0.25
ENERGY_TOLERANCE = 0.01
FLUXES = ('llf',)
TIME_SCHEMES = ('ssp-rk2',)


@dataclass
class SolverConfig:
    grid: Grid
    cfl: float = DEFAULT_CFL
    t_end: float = 1.0
    flux: str = 'llf'
    time_scheme: str = 'ssp-rk2'
    viscosity_eps: float = 0.0
    source_r: Optional[Callable] = None
    source: Optional[Callable] = None
    record_every: int = 1

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError('cfl must lie in (0, 1]')
        if self.flux not in FLUXES or self.time_scheme not in TIME_SCHEMES:
            raise ValueError(f'{SolverError.UNSUPPORTED}: {self.flux}/{self.time_scheme}')
        if self.viscosity_eps < 0.0 or self.t_end < 0.0 or self.record_every < 1:
            raise ValueError('viscosity_eps and t_end must be nonnegative, record_every positive')


@dataclass
class Trajectory:
    grid: Grid
    dim: int
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    etas: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    steps: int = 0

    def fields(self, index: int):
        """(F, v, eta) GridFields of one recorded state."""
        F, v, _ = split_conserved(self.states[index], self.dim)
        return (GridField(self.grid, 'matrix', F.copy()), GridField(self.grid, 'vector', v.copy()),
                GridField(self.grid, 'scalar', self.etas[index]))

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame([{'t': t, **row} for t, row in zip(self.times, self.diagnostics)])


def to_cell_major(F: np.ndarray, v: np.ndarray):
    return np.moveaxis(F, (0, 1), (-2, -1)), np.moveaxis(v, 0, -1)


def conserved_from_primitive(model: EnergyModel, F: np.ndarray, v: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """W = (F, v, |v|^2/2 + e) from component-first primitive arrays."""
    Fc, _ = to_cell_major(F, v)
    model.check_admissible(Fc, eta)
    E = 0.5 * np.sum(v ** 2, axis=0) + model._energy(Fc, eta)
    return join_conserved(F, v, E)


def recover_primitive(model: EnergyModel, W: np.ndarray, dim: int, eta_guess=None, time=None):
    """Cell-major (F, v) and the recovered eta."""
    F, v, E = split_conserved(W, dim)
    Fc, vc = to_cell_major(F, v)
    internal = E - 0.5 * np.sum(v ** 2, axis=0)
    eta = recover_entropy_values(model, Fc, internal, eta_guess=eta_guess, time=time)
    return Fc, vc, eta


def _time_step(speed: float, config: SolverConfig) -> float:
    h = config.grid.spacing
    dt = config.cfl * h / speed if speed > 0 else np.inf
    if config.viscosity_eps > 0.0:
        dt = min(dt, DIFFUSIVE_CFL * h * h / (config.viscosity_eps * config.grid.dim))
    return dt


class _Operator:
    """Spatial operator L(W, t) and the cellwise speeds of its last evaluation."""

    def __init__(self, model: EnergyModel, config: SolverConfig):
        self.model = model
        self.config = config
        self.grid = config.grid
        self.dim = config.grid.dim
        self.coords = grid_coordinates(config.grid)
        self.eta = None
        self.speed = None

    def __call__(self, W: np.ndarray, t: float) -> np.ndarray:
        model, grid, dim = self.model, self.grid, self.dim
        Fc, vc, eta = recover_primitive(model, W, dim, self.eta, t)
        self.eta = eta
        speed = acoustic_speed(model, Fc, eta)
        self.speed = speed
        h = grid.spacing
        out = np.zeros_like(W)
        for alpha in range(dim):
            axis = W.ndim - dim + alpha
            flux = np.moveaxis(directional_flux(model, Fc, vc, eta, np.eye(dim)[alpha]), -1, 0)
            W_right = np.roll(W, -1, axis=axis)
            flux_right = np.roll(flux, -1, axis=axis)
            s = np.maximum(speed, np.roll(speed, -1, axis=alpha))
            interface = 0.5 * (flux + flux_right) - 0.5 * s * (W_right - W)
            out -= (interface - np.roll(interface, 1, axis=axis)) / h
            if self.config.viscosity_eps > 0.0:
                out += self.config.viscosity_eps * (W_right - 2.0 * W + np.roll(W, 1, axis=axis)) / h ** 2
        if self.config.source is not None:
            out += self.config.source(t, self.coords)
        if self.config.source_r is not None:
            out[-1] += self.config.source_r(t, self.coords)
        return out


def step(model: EnergyModel, W: np.ndarray, dt: float, config: SolverConfig, t: float = 0.0,
         operator: _Operator = None, k1: np.ndarray = None) -> np.ndarray:
    """One SSP-RK2 step; raises CFLViolation when dt exceeds the stability bound.

    k1, when given, must be operator(W, t) from the same operator.
    """
    operator = operator or _Operator(model, config)
    if k1 is None:
        k1 = operator(W, t)
    bound = _time_step(float(np.max(operator.speed)), config)
    if dt > bound * (1.0 + 1e-12):
        raise CFLViolation(f'{SolverError.CFL}: dt={dt:.3g} > {bound:.3g}')
    W1 = W + dt * k1
    k2 = operator(W1, t + dt)
    return 0.5 * W + 0.5 * (W1 + dt * k2)


def _diagnostics(model: EnergyModel, W: np.ndarray, eta: np.ndarray, t: float, config: SolverConfig,
                 previous=None) -> dict:
    grid = config.grid
    dim = grid.dim
    F, v, E = split_conserved(W, dim)
    Fc, _ = to_cell_major(F, v)
    theta = model._temperature(Fc, eta)
    row = {
        'total_energy': float(np.sum(E) * grid.cell_volume),
        'total_entropy': float(np.sum(eta) * grid.cell_volume),
        'min_theta': float(np.min(theta)),
        'curl_residual': curl_residual(GridField(grid, 'matrix', np.array(F))),
        'cd_residual': np.nan,
    }
    if previous is not None:
        t_prev, eta_prev = previous
        rate = (eta - eta_prev) / (t - t_prev)
        r = config.source_r(t, grid_coordinates(grid)) if config.source_r is not None else 0.0
        row['cd_residual'] = float(np.min(rate - r / theta))
    return row


def simulate(model: EnergyModel, init, config: SolverConfig) -> Trajectory:
    """Integrate to config.t_end from a conservative array or an (F, v, eta) triple."""
    grid = config.grid
    if isinstance(init, State):
        init = (init.F, init.v, init.eta)
    W = np.array(init if isinstance(init, np.ndarray) else conserved_from_primitive(model, *init), dtype=float)
    if W.shape != (state_size(grid.dim),) + grid.shape:
        raise ValueError(f'initial state has shape {W.shape}')
    operator = _Operator(model, config)
    traj = Trajectory(grid, grid.dim)

    def record(t, W):
        _, _, eta = recover_primitive(model, W, grid.dim, operator.eta, t)
        previous = (traj.times[-1], traj.etas[-1]) if traj.times else None
        traj.diagnostics.append(_diagnostics(model, W, eta, t, config, previous))
        traj.times.append(t)
        traj.states.append(W.copy())
        traj.etas.append(eta)

    t = 0.0
    record(t, W)
    while t < config.t_end - 1e-14:
        k1 = operator(W, t)
        dt = min(_time_step(float(np.max(operator.speed)), config), config.t_end - t)
        W = step(model, W, dt, config, t, operator, k1)
        t = t + dt if t + dt < config.t_end - 1e-14 else config.t_end
        traj.steps += 1
        if traj.steps % config.record_every == 0 or t >= config.t_end:
            record(t, W)
            logger.debug('t=%.5g energy=%.12g min_theta=%.4g', t, traj.diagnostics[-1]['total_energy'],
                         traj.diagnostics[-1]['min_theta'])
    logger.info('%s run on n=%d finished: %d steps to t=%g', model.name, grid.n, traj.steps, t)
    return traj


def clausius_duhem_residual(model: EnergyModel, traj: Trajectory, r=None) -> np.ndarray:
    """Per recorded interval, min over cells of (eta(t_k) - eta(t_{k-1}))/dt - r/theta."""
    grid = traj.grid
    coords = grid_coordinates(grid)
    out = []
    for k in range(1, len(traj.times)):
        F, v, _ = split_conserved(traj.states[k], traj.dim)
        Fc, _ = to_cell_major(F, v)
        theta = model._temperature(Fc, traj.etas[k])
        rate = (traj.etas[k] - traj.etas[k - 1]) / (traj.times[k] - traj.times[k - 1])
        supply = r(traj.times[k], coords) if callable(r) else (0.0 if r is None else r)
        out.append(float(np.min(rate - supply / theta)))
    return np.array(out)


def mean_entropy_production(traj: Trajectory) -> np.ndarray:
    """Rate of change of the spatial-mean entropy per recorded interval."""
    totals = np.array([d['total_entropy'] for d in traj.diagnostics])
    return np.diff(totals) / np.diff(np.asarray(traj.times))


@dataclass
class ViscousFamily:
    """Members of a viscosity ladder with their sup-in-time total energies.

    Iterates over the member trajectories in eps order.
    """
    eps: list
    members: list
    sup_energy: dict
    bound: float

    @property
    def uniform(self) -> bool:
        return all(value <= self.bound for value in self.sup_energy.values())

    @property
    def worst(self) -> float:
        return max(self.sup_energy, key=self.sup_energy.get)

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, index: int) -> Trajectory:
        return self.members[index]

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame({'eps': self.eps, 'sup_energy': [self.sup_energy[e] for e in self.eps],
                             'bound': self.bound})


def viscous_family(model: EnergyModel, init, eps_list, config: SolverConfig, bound: float = None,
                   tolerance: float = ENERGY_TOLERANCE, strict: bool = False) -> ViscousFamily:
    """simulate for each viscosity in a descending list and check sup_t of the total energy against bound.

    Without an explicit bound the initial total energy plus a relative
    tolerance is used. strict raises EnergyBoundExceeded on the first member
    above the bound.
    """
    eps_list = [float(e) for e in eps_list]
    if not eps_list or eps_list != sorted(eps_list, reverse=True):
        raise ValueError('eps_list must be nonempty and descending')
    if tolerance < 0.0:
        raise ValueError('tolerance must be nonnegative')
    members, sup_energy = [], {}
    for eps in eps_list:
        traj = simulate(model, init, dataclasses.replace(config, viscosity_eps=eps))
        if bound is None:
            initial = traj.diagnostics[0]['total_energy']
            bound = initial + tolerance * abs(initial)
        members.append(traj)
        sup_energy[eps] = max(d['total_energy'] for d in traj.diagnostics)
        logger.info('eps=%g: sup energy %.10g (bound %.10g)', eps, sup_energy[eps], bound)
        if sup_energy[eps] > bound:
            if strict:
                raise EnergyBoundExceeded(f'{SolverError.ENERGY_BOUND}: eps={eps:g} reaches '
                                          f'{sup_energy[eps]:.6g} > {bound:.6g}')
            logger.warning('eps=%g exceeds the uniform energy bound %.6g', eps, bound)
    return ViscousFamily(eps_list, members, sup_energy, float(bound))


def write_trajectory(traj: Trajectory, directory: str) -> list:
    """GridField binaries per recorded state plus diagnostics.csv."""
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as e:
        raise ArtifactWriteError(f'{RunError.WRITE_FAILED}: {directory}: {e}')
    written = []
    for index in range(len(traj.times)):
        F, v, eta = traj.fields(index)
        _, _, E = split_conserved(traj.states[index], traj.dim)
        for name, f in (('F', F), ('v', v), ('E', GridField(traj.grid, 'scalar', np.array(E))), ('eta', eta)):
            written.append(write_grid_field(f, os.path.join(directory, f'state_{index:04d}_{name}.bin')))
    path = os.path.join(directory, 'diagnostics.csv')
    traj.frame().to_csv(path, index=False, float_format='%.17g')
    written.append(path)
    return written
