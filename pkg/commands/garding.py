"""garding: localization stages on a smooth background, then the Garding constants and their hold-out check."""
import logging

import numpy as np
import pandas as pd

from commands.base import (
    EXIT_PASSED,
    EXIT_VIOLATION,
    Command,
    CommandResult,
    build_grid,
    build_model,
    matrix_from_config,
)
from quasiconvexity.garding import (
    BackgroundField,
    delocalized_hessian_check,
    garding_batch,
    garding_check,
    garding_estimate_constants,
    garding_margin,
    hessian_coercivity_fixed_point,
    make_background,
    small_cube_radius_probe,
)
from quasiconvexity.testfields import read_test_field, write_test_field

logger = logging.getLogger(__name__)

WITNESS_PREFIX = 'witness'

DEFAULTS = {
    'n': 16,
    'base_F': [],
    'base_eta': 0.0,
    'amplitude': 0.5,
    'eta_amplitude': 0.0,
    'wavenumber': 1,
    'K': 5.0,
    'C0': 0.0,
    'C1': 0.0,
    'budget': 2,
    'n_fields': 12,
    'iters': 10,
    'modes': 4,
    'stages': True,
    'radii': [0.5, 0.25, 0.125],
}


def background_from_config(config: dict, dim: int) -> BackgroundField:
    grid = build_grid(config, dim)
    base_F = matrix_from_config(config['base_F'], dim, np.eye(dim))
    return make_background(grid, base_F, config['base_eta'], config['amplitude'], config['wavenumber'],
                           config['K'], config['eta_amplitude'])


def _stages(model, bg: BackgroundField, config: dict) -> list:
    seed = config['seed']
    coercivity = hessian_coercivity_fixed_point(model, bg, None, config['n_fields'], seed, modes=config['modes'])
    delocalized = delocalized_hessian_check(model, bg, n_fields=config['n_fields'], seed=seed,
                                            modes=config['modes'])
    cube = small_cube_radius_probe(model, bg, bg.peak_cell(), tuple(config['radii']), config['n_fields'], seed,
                                   modes=config['modes'])
    rows = [{'stage': 'coercivity', 'quantity': 'c', 'value': coercivity.minimum},
            {'stage': 'delocalized', 'quantity': 'needed_c_pen', 'value': delocalized.needed_c_pen},
            {'stage': 'delocalized', 'quantity': 'worst_margin', 'value': delocalized.worst_margin},
            {'stage': 'small_cube', 'quantity': 'radius',
             'value': cube.radius if cube.radius is not None else np.nan}]
    rows += [{'stage': 'small_cube', 'quantity': f'ratio_r{r:g}', 'value': v} for r, v in cube.per_radius.items()]
    if not delocalized.passed:
        logger.warning('no penalty on the grid %s covers the delocalized deficit', delocalized.c_pen_grid)
    if not cube.passed:
        logger.warning('small-cube probe found no clean radius at cell %s', bg.peak_cell())
    return rows


def run(config: dict, run_dir: str) -> CommandResult:
    model = build_model(config)
    bg = background_from_config(config, model.dim)
    rows = _stages(model, bg, config) if config['stages'] else []

    if config['C0'] > 0.0:
        C0, C1 = config['C0'], config['C1']
        check = garding_check(model, bg, C0, C1, garding_batch(bg.grid, config['seed'], config['n_fields'],
                                                              config['modes']))
        witness_tf, ok = check.witness, check.passed
        lines = [f'Garding check for {model.name} with C0={C0:g}, C1={C1:g}: min margin {check.min_margin:.6g}']
    else:
        C0, C1, evidence = garding_estimate_constants(model, bg, config['budget'], config['seed'],
                                                      config['n_fields'], config['iters'], config['modes'])
        witness_tf, ok = evidence.witness, evidence.feasible and evidence.verified
        lines = [f'Garding constants for {model.name}: C0={C0:.6g}, C1={C1:.6g}',
                 f'feasible={evidence.feasible}, hold-out verified={evidence.verified}, '
                 f'worst margin {evidence.worst_margin:.6g}, hold-out margin {evidence.holdout_margin:.6g}',
                 f'{evidence.pairs_checked} pairs checked on a batch of {evidence.batch_size}']
    rows += [{'stage': 'constants', 'quantity': 'C0', 'value': C0},
             {'stage': 'constants', 'quantity': 'C1', 'value': C1}]
    lines += [f"{row['stage']} {row['quantity']}: {row['value']:.6g}" for row in rows[:-2]]
    frame = pd.DataFrame(rows)

    if ok or witness_tf is None:
        if not ok:
            lines.append('no violating field in hand; result inconclusive')
        lines.append('passed' if ok else 'inconclusive')
        return CommandResult(EXIT_PASSED, '\n'.join(lines), frame)

    margin = garding_margin(model, bg, C0, C1, witness_tf)
    paths = write_test_field(witness_tf, run_dir, WITNESS_PREFIX)
    witness = {'kind': 'garding', 'value': float(margin), 'prefix': WITNESS_PREFIX, 'C0': float(C0),
               'C1': float(C1)}
    lines.append(f'VIOLATION: margin {margin:.6g} at C0={C0:g}, C1={C1:g}')
    return CommandResult(EXIT_VIOLATION, '\n'.join(lines), frame, paths, witness)


def replay_value(model, witness: dict, config: dict, run_dir: str) -> float:
    bg = background_from_config(config, model.dim)
    tf = read_test_field(run_dir, witness['prefix'], 'zero_trace')
    return garding_margin(model, bg, witness['C0'], witness['C1'], tf)


garding_cmd = Command('garding', DEFAULTS, run, 'Garding constants over a smooth background')
