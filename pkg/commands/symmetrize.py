"""symmetrize: symmetrizer positivity over random admissible states plus the entropy-pair identities."""
import logging

import numpy as np

from commands.base import EXIT_PASSED, EXIT_VIOLATION, Command, CommandResult, build_model
from symmetrizer.analysis import check_symmetrizability, report_frame
from symmetrizer.structure import entropy_pair_residual, random_admissible_states, symmetrizer_matrix

logger = logging.getLogger(__name__)

VIOLATION_THRESHOLD = -1e-9
PAIR_TOLERANCE = 1e-5

DEFAULTS = {
    'mode': 'wave_cone',
    'samples': 16,
    'n_dirs': 1024,
    'box': 1.0,
    'pair_samples': 20,
}


def _value(result, mode: str) -> float:
    return result.min_quotient_cone if mode == 'wave_cone' else result.min_eig_full


def run(config: dict, run_dir: str) -> CommandResult:
    model = build_model(config)
    mode = config['mode']
    rng = np.random.default_rng(config['seed'])
    states = random_admissible_states(model, config['samples'], rng, config['box'])
    results = [check_symmetrizability(model, U, mode, config['n_dirs'], config['seed'] + k)
               for k, U in enumerate(states)]
    pairs = entropy_pair_residual(model, config['pair_samples'], config['seed'])

    values = np.array([_value(result, mode) for result in results])
    worst = int(np.argmin(values))
    lines = [f'Symmetrizer check for {model.name} (mode {mode}, {len(states)} states)',
             f'smallest {mode} value: {values[worst]:.6g}',
             f'entropy pair residuals: A {pairs.max_residual_A:.3e}, flux {pairs.max_residual_flux:.3e}']

    witness = None
    exit_code = EXIT_PASSED
    if values[worst] < VIOLATION_THRESHOLD:
        U = states[worst]
        exit_code = EXIT_VIOLATION
        witness = {'kind': 'symmetrize', 'value': float(values[worst]),
                   'F': np.ravel(U.F).tolist(), 'v': np.ravel(U.v).tolist(), 'eta': float(U.eta),
                   'vector': results[worst].witness.tolist()}
        lines.append(f'VIOLATION: the symmetrizer is not positive on the {mode} at state {worst}')
    if pairs.max_residual > PAIR_TOLERANCE:
        lines.append(f'WARNING: entropy pair residual {pairs.max_residual:.3e} exceeds {PAIR_TOLERANCE:g}')
        logger.warning('%s entropy pair residual %.3e', model.name, pairs.max_residual)
    lines.append('passed' if exit_code == EXIT_PASSED else 'FAILED')
    return CommandResult(exit_code, '\n'.join(lines), report_frame(states, results), witness=witness)


def replay_value(model, witness: dict, config: dict, run_dir: str) -> float:
    d = model.dim
    S = symmetrizer_matrix(model, np.reshape(witness['F'], (d, d)), witness['eta']).matrix
    w = np.asarray(witness['vector'], dtype=float)
    return float(w @ S @ w)


symmetrize_cmd = Command('symmetrize', DEFAULTS, run, 'symmetrizer positivity on sampled states')
