"""weak-strong: relative entropy of perturbed runs against the classical reference over a mesh ladder."""
import logging
import os

import numpy as np
import pandas as pd

from commands.base import (
    DATA_NAME,
    EXIT_PASSED,
    EXIT_VIOLATION,
    Command,
    CommandResult,
    build_model,
    plot_path,
)
from commands.simulate import constant_supply
from diagnostics.experiment import DELTAS, MESHES, weak_strong_experiment
from utils.plotting import time_series_plot

logger = logging.getLogger(__name__)

DEFAULTS = {
    'dim': 1,
    'ref': 'linear-wave',
    'A': 0.1,
    'deltas': list(DELTAS),
    'meshes': list(MESHES),
    't_end': 0.5,
    'cfl': 0.45,
    'r': 0.0,
    'record_every': 1,
    'floor_tol': 1e-4,
}


def run(config: dict, run_dir: str) -> CommandResult:
    model = build_model(config)
    report = weak_strong_experiment(model, config['ref'], config['deltas'], config['meshes'], config['t_end'],
                                    config['seed'], model.dim, config['cfl'], constant_supply(config['r']),
                                    config['record_every'], floor_tolerance=config['floor_tol'],
                                    amplitude=config['A'])
    frame = report.frame()

    artifacts = []
    path = plot_path(config, run_dir)
    if path:
        finest = max(report.floors)
        series = {f'delta={run.delta:g}': (run.series.times, np.maximum(run.series.I_total, 1e-300))
                  for run in report.runs if run.n == finest}
        artifacts.append(time_series_plot(path, series, ylabel='I_total', logy=True,
                                          title=f'relative entropy, n={finest}'))

    lines = [f'Weak-strong experiment for {model.name} against {config["ref"]}', report.summary()]
    infeasible = [(run.delta, run.n) for run in report.runs if not run.feasible]
    if infeasible:
        lines.append('infeasible Gronwall fits: ' + ', '.join(f'delta={d:g} n={n}' for d, n in infeasible))
    if report.passed:
        return CommandResult(EXIT_PASSED, '\n'.join(lines), frame, artifacts)
    witness = {'kind': 'weak-strong', 'value': float(max(report.floors.values())),
               'floors': {str(n): v for n, v in report.floors.items()},
               'delta_exponent': report.delta_exponent,
               'constant_spread': {f'{d:g}': s for d, s in report.constant_spread.items()},
               'floor_tolerance': report.floor_tolerance, 'failures': report.failures()}
    return CommandResult(EXIT_VIOLATION, '\n'.join(lines), frame, artifacts, witness)


def replay_value(model, witness: dict, config: dict, run_dir: str) -> float:
    """Largest delta=0 floor, recomputed from the stored series."""
    frame = pd.read_csv(os.path.join(run_dir, DATA_NAME))
    floors = frame[frame.delta == 0.0].groupby('n').I_total.max()
    return float(floors.max()) if len(floors) else 0.0


weak_strong_cmd = Command('weak-strong', DEFAULTS, run, 'weak-strong uniqueness experiment')
