"""qc-check: quasiconvexity quotient search at one base state, with a rank-one curvature scan."""
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
from quasiconvexity.functionals import qc_quotient
from quasiconvexity.search import COUNTEREXAMPLE, minimize_qc_quotient, rank_one_profile
from quasiconvexity.testfields import read_test_field, write_test_field
from symmetrizer.analysis import sobol_directions

logger = logging.getLogger(__name__)

WITNESS_PREFIX = 'witness'

DEFAULTS = {
    'F0': [],
    'eta0': 0.0,
    'modes': 4,
    'amplitudes': [0.01, 0.1, 1.0, 3.0],
    'iters': 40,
    'n_dirs': 32,
    'restarts': 2,
    'profile_dirs': 16,
}


def base_matrix(config: dict, dim: int) -> np.ndarray:
    return matrix_from_config(config['F0'], dim, np.eye(dim))


def _profile_rows(model, F0, eta0, count: int, seed: int) -> list:
    d = model.dim
    rows = []
    for pair in sobol_directions(2 * d, count, seed):
        a, n = pair[:d], pair[d:]
        if np.linalg.norm(a) < 1e-12 or np.linalg.norm(n) < 1e-12:
            continue
        a, n = a / np.linalg.norm(a), n / np.linalg.norm(n)
        profile = rank_one_profile(model, F0, eta0, a, n)
        rows.append({'a': ' '.join(f'{x:.17g}' for x in a), 'n': ' '.join(f'{x:.17g}' for x in n),
                     'min_curvature': profile.min_curvature, 't_at': profile.t_at,
                     'amplitude_at': profile.amplitude_at, 'convex': profile.convex})
    return rows


def run(config: dict, run_dir: str) -> CommandResult:
    model = build_model(config)
    grid = build_grid(config, model.dim)
    F0 = base_matrix(config, model.dim)
    eta0 = config['eta0']
    report = minimize_qc_quotient(model, F0, eta0, grid, config['modes'], tuple(config['amplitudes']),
                                  config['iters'], config['seed'], config['n_dirs'], config['restarts'])
    rows = _profile_rows(model, F0, eta0, config['profile_dirs'], config['seed'])
    frame = pd.DataFrame(rows)
    non_convex = int((~frame.convex).sum()) if len(frame) else 0

    lines = [f'Quasiconvexity search for {model.name} at F0={np.ravel(F0).tolist()}, eta0={eta0:g}',
             report.summary(),
             f'rank-one lines scanned: {len(rows)}, non-convex: {non_convex}']
    if report.status != COUNTEREXAMPLE:
        lines.append('passed' if report.passed else 'inconclusive')
        return CommandResult(EXIT_PASSED, '\n'.join(lines), frame)

    paths = write_test_field(report.witness, run_dir, WITNESS_PREFIX)
    witness = {'kind': 'qc', 'value': float(report.c0_estimate), 'prefix': WITNESS_PREFIX,
               'boundary_mode': report.witness.boundary_mode,
               'lambda1': np.ravel(F0).tolist(), 'lambda2': float(eta0)}
    lines.append(f'COUNTEREXAMPLE: quotient {report.c0_estimate:.6g}, witness {WITNESS_PREFIX}_phi.bin/_psi.bin')
    return CommandResult(EXIT_VIOLATION, '\n'.join(lines), frame, paths, witness)


def replay_value(model, witness: dict, config: dict, run_dir: str) -> float:
    d = model.dim
    tf = read_test_field(run_dir, witness['prefix'], witness['boundary_mode'])
    return qc_quotient(model, np.reshape(witness['lambda1'], (d, d)), witness['lambda2'], tf)


qc_check_cmd = Command('qc-check', DEFAULTS, run, 'quasiconvexity quotient search')
