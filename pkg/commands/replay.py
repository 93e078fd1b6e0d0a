"""replay: re-evaluate the witness of an earlier run after checking its manifest and digests."""
import logging

from commands import audit_model, garding, localize, qc_check, symmetrize, weak_strong, young
from commands.base import EXIT_PASSED, EXIT_VIOLATION, Command, CommandResult, build_model
from errors import ConfigError, RunError
from storage.artifacts import read_manifest

logger = logging.getLogger(__name__)

REPLAY_TOLERANCE = 1e-9

REPLAYERS = {
    'qc': qc_check.replay_value,
    'garding': garding.replay_value,
    'symmetrize': symmetrize.replay_value,
    'weak-strong': weak_strong.replay_value,
    'localize': localize.replay_value,
    'audit-model': audit_model.replay_value,
    'energy-bound': young.replay_value,
}

DEFAULTS = {
    'run_dir': '',
}


def replay(run_dir: str) -> CommandResult:
    """Confirmed when the recomputed value matches the recorded one within 1e-9."""
    manifest = read_manifest(run_dir)
    witness = manifest.get('witness')
    if not witness:
        raise ConfigError(f'{RunError.BAD_CONFIG}: {run_dir} holds no witness')
    if witness.get('kind') not in REPLAYERS:
        raise ConfigError(f'{RunError.BAD_CONFIG}: cannot replay witness kind {witness.get("kind")!r}')
    config = manifest['config']
    model = build_model(config)
    value = REPLAYERS[witness['kind']](model, witness, config, run_dir)
    recorded = float(witness['value'])
    difference = abs(value - recorded)
    confirmed = difference <= REPLAY_TOLERANCE
    verdict = 'confirmed' if confirmed else 'refuted'
    logger.info('replay of %s (%s): recorded %.17g, recomputed %.17g', run_dir, witness['kind'], recorded, value)
    report = '\n'.join([f'{manifest["command"]} witness ({witness["kind"]}) in {run_dir}',
                        f'recorded {recorded:.17g}', f'recomputed {value:.17g}',
                        f'difference {difference:.3e}', verdict])
    return CommandResult(EXIT_PASSED if confirmed else EXIT_VIOLATION, report, run_dir=run_dir)


def run(config: dict, run_dir: str) -> CommandResult:
    if not config['run_dir']:
        raise ConfigError(f'{RunError.BAD_CONFIG}: replay needs a run directory')
    return replay(config['run_dir'])


replay_cmd = Command('replay', DEFAULTS, run, 'replay the witness of an earlier run', positional='run_dir',
                     writes_artifacts=False)
