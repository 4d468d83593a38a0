from .network import (
    AdversaryHook,
    Disposition,
    HookMode,
    LocalEvent,
    Network,
    NetworkEvent,
    Transcript,
    UnknownEndpoint,
)
from .scenario import (
    ATTACKS,
    DEFAULT_PASSWORD,
    DEFAULT_REALM,
    DEFAULT_USER,
    AdversarySpec,
    ConfigError,
    ScenarioConfig,
    ScenarioError,
    Session,
    Testbed,
    default_dictionary,
    load_config,
    read_dictionary,
    run_scenario,
    validate_config,
)

__all__ = [
    "ATTACKS", "DEFAULT_PASSWORD", "DEFAULT_REALM", "DEFAULT_USER", "AdversaryHook", "AdversarySpec", "ConfigError",
    "Disposition", "HookMode", "LocalEvent", "Network", "NetworkEvent", "ScenarioConfig", "ScenarioError", "Session",
    "Testbed", "Transcript", "UnknownEndpoint", "default_dictionary", "load_config", "read_dictionary",
    "run_scenario", "validate_config",
]
