"""young: empirical Young measure of a generated sequence with its barycenter and concentration mass."""
import logging
import os

import numpy as np
import pandas as pd

from commands.base import EXIT_PASSED, EXIT_VIOLATION, Command, CommandResult, build_grid, build_model, plot_path
from errors import ConfigError, RunError
from fields.grid import grid_coordinates
from solver.references import manufactured_solution
from solver.scheme import SolverConfig
from storage.artifacts import save_artifact
from utils.plotting import time_series_plot
from utils.transformations import state_size, state_to_vector
from young_measure.empirical import (
    SequenceSpec,
    concentration_mass,
    empirical_young_measure,
    generate_members,
    pair_values,
    sample_grid,
    write_eym_csv,
)

logger = logging.getLogger(__name__)

EYM_NAME = 'eym.csv'
ENERGY_NAME = 'energy_bound.csv'

DEFAULTS = {
    'dim': 1,
    'n': 16,
    'generator': 'laminate',
    'scales': [1.0 / 32, 1.0 / 64],
    'subgrid': 32,
    'fraction': 0.25,
    'amplitude': 0.5,
    'eta0': 0.0,
    'component': -1,
    't_end': 0.1,
    'cfl': 0.45,
    'energy_bound': 0.0,
}


def _identity_state(dim: int, eta: float) -> np.ndarray:
    return state_to_vector(np.eye(dim), np.zeros(dim), eta)


def sequence_from_config(config: dict, model, grid) -> SequenceSpec:
    d = grid.dim
    generator = config['generator']
    base = _identity_state(d, config['eta0'])
    if generator == 'laminate':
        A, B = base.copy(), base.copy()
        A[0] += config['amplitude']
        B[0] -= config['amplitude']
        params = {'A': A, 'B': B, 'normal': np.eye(d)[0], 'fraction': config['fraction']}
    elif generator == 'concentrator':
        component = config['component'] if config['component'] >= 0 else d * d
        if component >= state_size(d):
            raise ConfigError(f'{RunError.BAD_CONFIG}: component {component} out of range')
        params = {'base': base, 'component': component}
    elif generator == 'viscous-family':
        fine = sample_grid(grid, config['subgrid'])
        ref, _ = manufactured_solution('linear-wave', model, fine, amplitude=config['amplitude'])
        params = {'model': model, 'init': ref.state(0.0),
                  'config': SolverConfig(fine, cfl=config['cfl'], t_end=config['t_end']),
                  'energy_bound': config['energy_bound'] or None}
    else:
        raise ConfigError(f'{RunError.BAD_CONFIG}: generator must be laminate, concentrator or viscous-family')
    return SequenceSpec(generator, sorted(config['scales'], reverse=True), config['subgrid'], d, params)


def run(config: dict, run_dir: str) -> CommandResult:
    model = build_model(config)
    grid = build_grid(config, model.dim)
    spec = sequence_from_config(config, model, grid)
    members = generate_members(spec, grid)
    nu = empirical_young_measure(spec, grid, members=members)
    concentration = concentration_mass(spec, nu, model, members)

    frame = pd.DataFrame(pair_values(nu, 'id'), columns=[f'bar_{name}' for name in nu.component_names()])
    index = np.indices(grid.shape).reshape(grid.dim, -1)
    for a in reversed(range(grid.dim)):
        frame.insert(0, f'i{a}', index[a])
    frame['atoms'] = nu.atom_counts().reshape(-1)
    frame['energy'] = pair_values(nu, 'total_energy', model)
    frame['concentration'] = concentration.mass.values.reshape(-1)

    artifacts = [write_eym_csv(nu, os.path.join(run_dir, EYM_NAME))]
    path = plot_path(config, run_dir)
    if path:
        x = grid_coordinates(grid)[0].reshape(-1)
        artifacts.append(time_series_plot(path, {'barycenter F11': (x, frame.bar_F11),
                                                 'concentration': (x, frame.concentration)},
                                          xlabel='x1', title=f'{spec.generator}, scale {spec.finest:g}'))

    lines = [f'{spec.generator} measure for {model.name} at scale {spec.finest:g} on n={grid.n}',
             f'atoms per cell: {int(np.min(frame.atoms))}..{int(np.max(frame.atoms))}',
             f'concentration mass {concentration.total:.6g} (peak cell {concentration.peak_cell}), '
             f'clamped {concentration.clamped}, excluded weight {concentration.excluded_weight:.3g}',
             f'energies Cauchy across the finest scales: {concentration.cauchy}']
    if concentration.clamped:
        lines.append(f'WARNING: {concentration.clamped} cells had a negative energy defect')
    family = spec.energy_check
    if family is not None:
        artifacts.append(save_artifact(run_dir, ENERGY_NAME, family.frame()))
        lines.append('sup energy per eps: ' + ', '.join(f'{e:g}: {family.sup_energy[e]:.10g}' for e in family.eps))
        lines.append(f'uniform energy bound {family.bound:.10g}: {family.uniform}')
        if not family.uniform:
            lines.append('FAILED')
            worst = family.worst
            witness = {'kind': 'energy-bound', 'value': family.sup_energy[worst], 'eps': worst,
                       'bound': family.bound}
            return CommandResult(EXIT_VIOLATION, '\n'.join(lines), frame, artifacts, witness)
    lines.append('passed')
    return CommandResult(EXIT_PASSED, '\n'.join(lines), frame, artifacts)


def replay_value(model, witness: dict, config: dict, run_dir: str) -> float:
    """Largest sup energy of the family, read back from the stored energy table."""
    frame = pd.read_csv(os.path.join(run_dir, ENERGY_NAME))
    return float(frame.sup_energy.max())


young_cmd = Command('young', DEFAULTS, run, 'empirical Young measure and concentration mass')
