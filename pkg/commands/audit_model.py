"""audit-model: growth hypotheses, relative-quantity bounds and relative-energy estimates of one model."""
import logging

import pandas as pd

from commands.base import EXIT_PASSED, EXIT_VIOLATION, Command, CommandResult, build_model
from constitutive.audits import relative_energy_estimates, check_growth_hypotheses, relative_bounds_report

logger = logging.getLogger(__name__)

DEFAULTS = {
    'K': 5.0,
    'samples': 1000,
    'r': 1.0,
}


def _audit(model, config: dict):
    K, samples, seed = config['K'], config['samples'], config['seed']
    hypotheses = check_growth_hypotheses(model, K, samples, seed)
    bounds = relative_bounds_report(model, K, samples, seed, r=config['r'])
    estimates = relative_energy_estimates(model, K, samples, seed)
    return hypotheses, bounds, estimates


def run(config: dict, run_dir: str) -> CommandResult:
    model = build_model(config)
    hypotheses, bounds, estimates = _audit(model, config)

    rows = [{'group': 'hypotheses', 'constant': key, 'value': value}
            for key, value in sorted(hypotheses.constants.items())]
    rows += [{'group': 'bounds', **row} for row in bounds.rows()]
    rows += [{'group': 'estimates', **row} for row in estimates.rows()]
    frame = pd.DataFrame(rows)
    lines = [hypotheses.summary(), '', bounds.summary(), '', estimates.summary(), '']

    if hypotheses.passed and bounds.passed and estimates.passed:
        lines.append('passed')
        return CommandResult(EXIT_PASSED, '\n'.join(lines), frame)

    if not hypotheses.passed:
        v = hypotheses.witness
        witness = {'kind': 'audit-model', 'group': 'hypotheses', 'name': v.hypothesis, 'value': float(v.value),
                   'F': v.F, 'eta': v.eta}
    else:
        failed = bounds if not bounds.passed else estimates
        unstable = [k for k in sorted(failed.constants)
                    if not (failed.stable.get(k, True) and failed.holdout_ok.get(k, True))]
        name = (unstable or sorted(failed.constants))[0]
        witness = {'kind': 'audit-model', 'group': 'bounds' if failed is bounds else 'estimates', 'name': name,
                   'value': float(failed.constants[name])}
    lines.append(f'VIOLATION: {witness["group"]} {witness["name"]} ({witness["value"]:.6g})')
    return CommandResult(EXIT_VIOLATION, '\n'.join(lines), frame, witness=witness)


def replay_value(model, witness: dict, config: dict, run_dir: str) -> float:
    hypotheses, bounds, estimates = _audit(model, config)
    if witness['group'] == 'hypotheses':
        return float(next(v.value for v in hypotheses.violations if v.hypothesis == witness['name']))
    report = bounds if witness['group'] == 'bounds' else estimates
    return float(report.constants[witness['name']])


audit_model_cmd = Command('audit-model', DEFAULTS, run, 'constitutive audits and constants report')
