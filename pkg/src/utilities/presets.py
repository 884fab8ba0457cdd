# =============================================================================
# utilities/presets.py
# =============================================================================
# Purpose:
# Named experiment configurations. A registry file (JSON object mapping
# preset name -> config) is read once; `get` validates the chosen entry into
# an ExperimentConfig, optionally with field overrides applied first.
# =============================================================================

import json
import logging
import os
from typing import Any, Dict, List

from models.errors import ConfigError
from models.experiment import ExperimentConfig, parse_config_data

logger = logging.getLogger(__name__)


class PresetRegistry:
    """
    Loads presets from a JSON registry.

    Attributes:
        registry_file (str): Path to the JSON file holding the presets.
        presets (Dict[str, dict]): Raw preset configs by name.
    """

    def __init__(self, registry_file: str = None):
        if registry_file:
            self.registry_file = registry_file
        else:
            # presets.json ships next to this module
            self.registry_file = os.path.join(os.path.dirname(__file__), "presets.json")

        self.presets = self._load_registry()

    def _load_registry(self) -> Dict[str, dict]:
        try:
            with open(self.registry_file, "r") as f:
                data = json.load(f)
            if not isinstance(data, dict):
                raise ValueError("Preset file must contain a JSON object of name -> config.")
            return data
        except FileNotFoundError:
            logger.warning(f"Preset file not found: {self.registry_file}")
            return {}
        except (json.JSONDecodeError, ValueError) as e:
            logger.error(f"Error parsing preset file: {e}")
            return {}

    def names(self) -> List[str]:
        return sorted(self.presets)

    def raw(self, name: str) -> dict:
        if name not in self.presets:
            raise ConfigError(
                f"unknown preset '{name}' (known: {', '.join(self.names()) or 'none'})",
                preset=name,
            )
        return dict(self.presets[name])

    def get(self, name: str, overrides: Dict[str, Any] | None = None) -> ExperimentConfig:
        data = self.raw(name)
        data.update(overrides or {})
        config = parse_config_data(data)
        logger.info(f"Loaded preset '{name}' ({config.kind.value})")
        return config
