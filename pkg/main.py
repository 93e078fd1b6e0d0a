import argparse
import logging
import sys

from commands import execute, registry, resolve_config

logger = logging.getLogger('thermolab')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='thermolab', description='Thermoelastic stability laboratory')
    parser.add_argument('--config', help='key=value config file; command-line tokens override it')
    parser.add_argument('--verbose', action='store_true', help='log at DEBUG level')
    parser.add_argument('command', choices=registry.names())
    parser.add_argument('overrides', nargs='*', help='key=value overrides (bare words set boolean flags)')
    return parser


def handle_error(error: Exception) -> int:
    """Log the failure and map it to the exit code it carries."""
    logger.error('%s: %s', type(error).__name__, error)
    logger.debug('traceback', exc_info=error)
    return getattr(error, 'exit_code', 1)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        command = registry.get(args.command)
        config = resolve_config(command, args.config, args.overrides)
        result = execute(command, config)
    except Exception as error:
        return handle_error(error)
    print(result.report)
    if result.run_dir and command.writes_artifacts:
        print(f'artifacts: {result.run_dir}')
    return result.exit_code


if __name__ == '__main__':
    sys.exit(main())
