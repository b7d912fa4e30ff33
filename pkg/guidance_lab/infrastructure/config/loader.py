"""
Experiment config loading: JSON file, dotted overrides, environment defaults.
"""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional

from pydantic import ValidationError

from guidance_lab.domain.exceptions import ConfigError
from guidance_lab.infrastructure.config.schemas import ExperimentConfig, NetworkSpec
from guidance_lab.shared.constants import EnvironmentVariables
from guidance_lab.shared.helpers.logging_utils import get_logger

logger = get_logger(__name__)


def _parse_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def parse_assignments(assignments: Iterable[str]) -> Dict[str, Any]:
    """``["optimizer.weight_decay=0.0", "task=parity"]`` -> dotted-key mapping."""
    parsed: Dict[str, Any] = {}
    for item in assignments:
        if "=" not in item:
            raise ConfigError("override must look like key.path=value", details={"override": item})
        key, raw = item.split("=", 1)
        parsed[key.strip()] = _parse_value(raw.strip())
    return parsed


def apply_overrides(document: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """Set dotted keys in a nested dict, creating intermediate objects."""
    for dotted, value in overrides.items():
        node = document
        parts = dotted.split(".")
        for part in parts[:-1]:
            child = node.get(part)
            if child is None:
                child = node[part] = {}
            elif not isinstance(child, dict):
                raise ConfigError("cannot override inside a scalar", details={"key": dotted})
            node = child
        node[parts[-1]] = value
    return document


def validate_config(document: Mapping[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(dict(document))
    except ValidationError as exc:
        raise ConfigError(
            "config failed schema validation",
            details=[f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in exc.errors()],
        ) from exc


def read_document(path: Path | str) -> Dict[str, Any]:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError("config file not found", details={"path": str(path)}) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config file is not valid JSON", details={"path": str(path), "error": str(exc)}) from exc
    if not isinstance(document, dict):
        raise ConfigError("config file must hold a JSON object", details={"path": str(path)})
    return document


def load_config(path: Path | str, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """
    Load and validate an experiment config.

    Args:
        path: JSON config file
        overrides: dotted-key values applied before validation
    """
    document = apply_overrides(read_document(path), overrides or {})
    config = validate_config(document)
    logger.debug(f"loaded config {config.experiment_id} from {path}")
    return config


def load_network_spec(document: Mapping[str, Any]) -> NetworkSpec:
    try:
        return NetworkSpec.model_validate(dict(document))
    except ValidationError as exc:
        raise ConfigError("network spec failed schema validation", details=str(exc)) from exc


def resolve_output_dir(config: ExperimentConfig) -> Path:
    """Config value, else GUIDANCE_LAB_OUTPUT_DIR, else ``runs/``; one subdirectory per experiment."""
    base = config.output_dir or os.getenv(
        EnvironmentVariables.OUTPUT_DIR, EnvironmentVariables.DEFAULT_OUTPUT_DIR
    )
    return Path(base) / config.experiment_id


def resolve_data_dir() -> Path:
    return Path(os.getenv(EnvironmentVariables.DATA_DIR, EnvironmentVariables.DEFAULT_DATA_DIR))
