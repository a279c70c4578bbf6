# Configuration management module

from .config_manager import EFFECTIVE_CONFIG, ConfigManager, parse_config, save_config
from .schema import (
    LEARNING_RATE_GRID, ExperimentConfig, ModelConfig, SampleConfig, TrainConfig,
    create_default_config, get_config_schema, validate_config_file,
)

__all__ = [
    'ConfigManager',
    'parse_config',
    'save_config',
    'EFFECTIVE_CONFIG',
    'ExperimentConfig',
    'ModelConfig',
    'SampleConfig',
    'TrainConfig',
    'LEARNING_RATE_GRID',
    'create_default_config',
    'validate_config_file',
    'get_config_schema',
]
