from .schemas import DataConfig, ExperimentConfig, GuidanceConfig, NetworkSpec, OptimizerConfig
from .loader import (
    apply_overrides,
    load_config,
    load_network_spec,
    parse_assignments,
    read_document,
    resolve_data_dir,
    resolve_output_dir,
    validate_config,
)

__all__ = [
    "DataConfig",
    "ExperimentConfig",
    "GuidanceConfig",
    "NetworkSpec",
    "OptimizerConfig",
    "apply_overrides",
    "load_config",
    "load_network_spec",
    "parse_assignments",
    "read_document",
    "resolve_data_dir",
    "resolve_output_dir",
    "validate_config",
]
