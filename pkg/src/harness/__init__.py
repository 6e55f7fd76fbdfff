from .config import RunConfig, UsageError, COMMAND_PARAMS, load_config_file, resolve_config
from .output import SCHEMA_VERSION, build_record, write_json, write_csv
from .commands import HANDLERS, handler_for

__all__ = [
    "RunConfig",
    "UsageError",
    "COMMAND_PARAMS",
    "load_config_file",
    "resolve_config",
    "SCHEMA_VERSION",
    "build_record",
    "write_json",
    "write_csv",
    "HANDLERS",
    "handler_for",
]
