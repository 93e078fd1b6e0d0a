from .base import Registry, CommandResult, execute, resolve_config, build_model
from .symmetrize import symmetrize_cmd
from .qc_check import qc_check_cmd
from .garding import garding_cmd
from .simulate import simulate_cmd
from .weak_strong import weak_strong_cmd
from .young import young_cmd
from .localize import localize_cmd
from .audit_model import audit_model_cmd
from .replay import replay, replay_cmd

# Create the command registry
registry = Registry()

# Register all commands
registry.register(symmetrize_cmd)
registry.register(qc_check_cmd)
registry.register(garding_cmd)
registry.register(simulate_cmd)
registry.register(weak_strong_cmd)
registry.register(young_cmd)
registry.register(localize_cmd)
registry.register(audit_model_cmd)
registry.register(replay_cmd)
