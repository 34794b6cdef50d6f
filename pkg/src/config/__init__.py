"""
Configuration Package

Scenario models, layered loading and validation.
"""

from .config_manager import (
    get_project_root,
    load_env_file,
    load_scenario,
    read_scenario_file,
    require_valid,
    save_scenario,
    validate_scenario,
)
from .config_models import (
    BcSection,
    GridSection,
    Scenario,
    SolverSection,
    ToleranceSection,
    UnitsSection,
)

__all__ = [
    'get_project_root',
    'load_env_file',
    'load_scenario',
    'read_scenario_file',
    'require_valid',
    'save_scenario',
    'validate_scenario',
    'BcSection',
    'GridSection',
    'Scenario',
    'SolverSection',
    'ToleranceSection',
    'UnitsSection',
]
