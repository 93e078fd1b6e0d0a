"""Command registry, config resolution and the artifact bundle every run leaves behind."""
import inspect
import logging
import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import pandas as pd

from constitutive.models import MODEL_CATALOGUE, EnergyModel, make_model
from errors import ConfigError, ModelNotFound, ModelError, RunError
from fields.grid import Grid, make_grid
from storage.artifacts import run_directory, save_artifact, write_manifest
from utils.transformations import coerce, parse_key_values

logger = logging.getLogger(__name__)

EXIT_PASSED = 0
EXIT_ERROR = 1
EXIT_VIOLATION = 2

REPORT_NAME = 'report.txt'
DATA_NAME = 'data.csv'
PLOT_NAME = 'plot.svg'

COMMON_DEFAULTS = {
    'model': 'quadratic',
    'dim': 2,
    'n': 32,
    'seed': 0,
    'output_dir': '',
    'plot': True,
}
# Constructor parameters of the catalogue models; each model takes the subset it declares.
MODEL_KEYS = ('alpha', 'stiffness', 'p', 'q', 'kappa', 'beta', 'gamma', 'K')


@dataclass
class CommandResult:
    exit_code: int
    report: str
    frame: pd.DataFrame = None
    artifacts: list = field(default_factory=list)
    witness: dict = None
    run_dir: str = None

    @property
    def violation(self) -> bool:
        return self.exit_code == EXIT_VIOLATION


@dataclass
class Command:
    name: str
    defaults: dict
    handler: Callable
    help: str = ''
    positional: str = None
    writes_artifacts: bool = True


class Registry:
    """Name -> Command table that main.py dispatches on."""

    def __init__(self):
        self.commands = {}

    def register(self, command: Command) -> None:
        if command.name in self.commands:
            raise ValueError(f'command {command.name!r} registered twice')
        self.commands[command.name] = command

    def get(self, name: str) -> Command:
        if name not in self.commands:
            raise ConfigError(f'{RunError.BAD_CONFIG}: unknown command {name!r}')
        return self.commands[name]

    def names(self) -> list:
        return sorted(self.commands)


def _all_defaults(command: Command) -> dict:
    defaults = dict(COMMON_DEFAULTS) if command.writes_artifacts else {}
    defaults.update(command.defaults)
    return defaults


def _tokens(command: Command, tokens, defaults: dict) -> list:
    """Bare words become 'flag=true' for boolean keys, or fill the positional key."""
    lines = []
    for token in tokens:
        if '=' in token:
            lines.append(token)
        elif isinstance(defaults.get(token), bool):
            lines.append(f'{token}=true')
        elif command.positional and not any(line.startswith(f'{command.positional}=') for line in lines):
            lines.append(f'{command.positional}={token}')
        else:
            raise ConfigError(f'{RunError.BAD_CONFIG}: expected key=value, got {token!r}')
    return lines


def resolve_config(command: Command, path: str = None, tokens=()) -> dict:
    """Defaults, then the key=value file, then command-line tokens; unknown keys are rejected."""
    defaults = _all_defaults(command)
    raw = {}
    if path:
        try:
            with open(path) as f:
                raw.update(parse_key_values(f.read().splitlines()))
        except OSError as e:
            raise ConfigError(f'{RunError.BAD_CONFIG}: {path}: {e}')
    raw.update(parse_key_values(_tokens(command, tokens, defaults)))

    config = {'command': command.name, **defaults}
    for key, value in raw.items():
        if key in defaults:
            config[key] = coerce(value, defaults[key])
        elif key in MODEL_KEYS and command.writes_artifacts:
            config[key] = coerce(value, 0.0)
        else:
            raise ConfigError(f'{RunError.UNKNOWN_KEY}: {key}')
    logger.debug('resolved %s config: %s', command.name, config)
    return config


def build_model(config: dict) -> EnergyModel:
    """Catalogue model from the config; model keys the constructor does not take are ignored."""
    name = config['model']
    if name not in MODEL_CATALOGUE:
        raise ModelNotFound(f'{ModelError.NOT_FOUND}: {name}')
    accepted = inspect.signature(MODEL_CATALOGUE[name]).parameters
    params = {key: config[key] for key in MODEL_KEYS if key in config and key in accepted}
    if 'dim' in accepted:
        params['dim'] = config['dim']
    try:
        return make_model(name, **params)
    except (TypeError, ValueError) as e:
        raise ConfigError(f'{RunError.BAD_CONFIG}: {name}: {e}')


def build_grid(config: dict, dim: int = None) -> Grid:
    return make_grid(dim or config['dim'], config['n'])


def matrix_from_config(values, dim: int, default: np.ndarray) -> np.ndarray:
    """A d x d matrix from a row-major list; an empty list selects the default."""
    if not values:
        return np.array(default, dtype=float)
    if len(values) != dim * dim:
        raise ConfigError(f'{RunError.BAD_CONFIG}: expected {dim * dim} entries, got {len(values)}')
    return np.asarray(values, dtype=float).reshape(dim, dim)


def plot_path(config: dict, run_dir: str):
    return os.path.join(run_dir, PLOT_NAME) if config.get('plot') else None


def execute(command: Command, config: dict) -> CommandResult:
    """Run one command and leave report.txt, data.csv, extra artifacts and the manifest behind."""
    if not command.writes_artifacts:
        return command.handler(config, None)
    run_dir = run_directory(config['output_dir'], command.name, config)
    result = command.handler(config, run_dir)
    paths = [save_artifact(run_dir, REPORT_NAME, result.report + '\n')]
    if result.frame is not None:
        paths.append(save_artifact(run_dir, DATA_NAME, result.frame))
    paths.extend(result.artifacts)
    if result.violation and result.witness is None:
        logger.warning('%s reported a violation without a witness', command.name)
    write_manifest(run_dir, command.name, config, paths,
                   {'exit_code': result.exit_code, 'witness': result.witness})
    result.run_dir = run_dir
    logger.info('%s finished with exit code %d in %s', command.name, result.exit_code, run_dir)
    return result
