"""localize: time localization of an oscillating space-time sequence, compared with its time slice."""
import logging

import numpy as np
import pandas as pd

from commands.base import EXIT_PASSED, EXIT_VIOLATION, Command, CommandResult, build_grid, plot_path
from utils.plotting import convergence_plot
from young_measure.localize import SpaceTimeSequence, time_localize

logger = logging.getLogger(__name__)

DEFAULTS = {
    'dim': 1,
    'n': 8,
    'scales': [1.0 / 8, 1.0 / 16, 1.0 / 32],
    'subgrid': 32,
    'amplitude': 0.3,
    'eta_amplitude': 0.1,
    't0': 0.5,
    'n_trunc': 10.0,
    'horizon': 1.0,
    'local_time': 0.5,
}


def oscillating_sequence(config: dict, dim: int) -> SpaceTimeSequence:
    """y_k = x + a (1 + t) scale/(2 pi) sin(2 pi x1/scale) e1 and eta_k = b t sin(2 pi x1/scale)."""
    a, b = config['amplitude'], config['eta_amplitude']

    def displacement(scale, t, points):
        u = np.zeros_like(points)
        u[0] = a * (1.0 + t) * scale / (2.0 * np.pi) * np.sin(2.0 * np.pi * points[0] / scale)
        return u

    def gradient(scale, t, points):
        F = np.zeros((dim, dim) + points.shape[1:])
        for i in range(dim):
            F[i, i] = 1.0
        F[0, 0] += a * (1.0 + t) * np.cos(2.0 * np.pi * points[0] / scale)
        return F

    def entropy(scale, t, points):
        return b * t * np.sin(2.0 * np.pi * points[0] / scale)

    def limit(t, points):
        return np.zeros_like(points)

    scales = sorted(config['scales'], reverse=True)
    return SpaceTimeSequence(scales, displacement, entropy, gradient, (0.0, 1.0), config['subgrid'], limit)


def _localize(config: dict):
    grid = build_grid(config)
    seq = oscillating_sequence(config, grid.dim)
    return seq, time_localize(seq, config['t0'], config['n_trunc'], grid, config['horizon'], config['local_time'])


def run(config: dict, run_dir: str) -> CommandResult:
    seq, (_, report) = _localize(config)
    frame = pd.DataFrame({'scale': seq.scales,
                          'time': [p.time for p in report.projections],
                          'vp_integral': report.vp_integrals,
                          'lp_distance': report.lp_distances,
                          'mean_eta': [p.mean_eta for p in report.projections]})

    artifacts = []
    path = plot_path(config, run_dir)
    if path:
        artifacts.append(convergence_plot(path, list(seq.scales), report.lp_distances, 'Lp distance to the limit',
                                          reference_order=1.0))

    lines = [f'Time localization at t0={config["t0"]:g} over scales {", ".join(f"{s:g}" for s in seq.scales)}',
             report.summary(),
             f'matches slice={report.matches_slice}, equi-integrable={report.equiintegrable}, '
             f'converging={report.converging}']
    if report.passed:
        lines.append('passed')
        return CommandResult(EXIT_PASSED, '\n'.join(lines), frame, artifacts)
    lines.append('FAILED')
    witness = {'kind': 'localize', 'value': report.max_w1, 'tolerance': report.tolerance}
    return CommandResult(EXIT_VIOLATION, '\n'.join(lines), frame, artifacts, witness)


def replay_value(model, witness: dict, config: dict, run_dir: str) -> float:
    _, (_, report) = _localize(config)
    return report.max_w1


localize_cmd = Command('localize', DEFAULTS, run, 'time localization of a space-time sequence')
