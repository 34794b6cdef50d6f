#!/usr/bin/env python3
"""
Configuration Manager

Resolves a Scenario from layered sources:
- built-in defaults
- a JSON scenario file
- environment variables (optionally loaded from a .env file)
- command-line overrides
"""

import json
import math
import os
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from .config_models import BC_KINDS, MAJORANA_SIGNS, Scenario, SolverSection
from src.states.grid import MIN_POINTS
from src.utils.error_handler import ConfigurationError, ScenarioParseError
from src.utils.logger import get_global_logger

logger = get_global_logger()

project_root = Path(__file__).parent.parent.parent

ENV_OVERRIDES = {
    'KFGM_SEED': ('seed', int),
    'KFGM_OUTPUT_DIR': ('output_dir', str),
    'KFGM_GRID_N': ('grid.n', int),
    'KFGM_TOL_SCALE': ('tolerances.scale', float),
}


def get_project_root() -> str:
    """Get the project root directory"""
    return str(project_root)


def load_env_file(root: Optional[str] = None) -> bool:
    """Load environment variables from a .env file if one exists"""
    env_file = Path(root or get_project_root()) / '.env'
    if env_file.exists():
        load_dotenv(env_file, override=False)
        return True
    return False


def _set_path(scenario: Scenario, dotted: str, value: Any):
    target = scenario
    parts = dotted.split('.')
    for part in parts[:-1]:
        target = getattr(target, part)
    setattr(target, parts[-1], value)


def _env_overrides() -> Dict[str, Any]:
    overrides = {}
    for env_key, (path, cast) in ENV_OVERRIDES.items():
        raw = os.getenv(env_key)
        if raw is None or raw == '':
            continue
        try:
            overrides[path] = cast(raw)
        except ValueError:
            raise ConfigurationError(f"environment variable {env_key}={raw!r} is not a valid {cast.__name__}",
                                     variable=env_key)
    return overrides


def read_scenario_file(path: str) -> Dict[str, Any]:
    """Parse a scenario JSON file into a dictionary"""
    file_path = Path(path)
    if not file_path.exists():
        raise ConfigurationError(f"scenario file not found: {path}", path=str(path))
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(f"scenario file {path} is not valid JSON: {e.msg} (line {e.lineno})",
                                 path=str(path))


def load_scenario(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None,
                  use_env: bool = True) -> Scenario:
    """
    Load a scenario with precedence defaults < file < environment < overrides.

    Args:
        path: Optional JSON scenario file
        overrides: Dotted-path overrides such as ``{'grid.n': 128}``; None values are ignored
        use_env: Whether to read KFGM_* environment variables

    Returns:
        Scenario: Typed scenario (not yet validated)

    Raises:
        ScenarioParseError: Malformed JSON or unknown keys
        ConfigurationError: Missing file or unusable environment values
    """
    data = read_scenario_file(path) if path else {}
    scenario = Scenario.from_dict(data)

    layered: Dict[str, Any] = {}
    if use_env:
        load_env_file()
        layered.update(_env_overrides())
    layered.update({k: v for k, v in (overrides or {}).items() if v is not None})
    for dotted, value in layered.items():
        _set_path(scenario, dotted, value)

    logger.debug("Scenario loaded", data={'path': path, 'overrides': sorted(layered)})
    return scenario


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def validate_scenario(scenario: Scenario) -> Dict[str, List[str]]:
    """
    Validate scenario values.

    Returns:
        Dictionary with 'errors' and 'warnings' lists
    """
    errors: List[str] = []
    warnings: List[str] = []

    for name in ('hbar', 'm', 'c'):
        value = getattr(scenario.units, name)
        if not _is_number(value) or value <= 0:
            errors.append(f"units.{name} must be a positive number")

    g = scenario.grid
    if not (_is_number(g.a) and _is_number(g.b)) or not g.b > g.a:
        errors.append("grid requires numeric a < b")
    if not isinstance(g.n, int) or isinstance(g.n, bool) or g.n < MIN_POINTS:
        errors.append(f"grid.n must be an integer >= {MIN_POINTS}")

    bc = scenario.bc
    if bc.kind not in BC_KINDS:
        errors.append(f"bc.kind must be one of {', '.join(BC_KINDS)}")
    elif bc.kind == "FluxBalanced":
        if not _is_number(bc.mu) or not 0 < bc.mu < math.pi:
            errors.append("bc.mu must lie in (0, pi) for FluxBalanced")
        if bc.branch not in ("upper", "lower"):
            errors.append("bc.branch must be 'upper' or 'lower' for FluxBalanced")
    elif bc.kind == "NMatrix":
        values = [bc.mu, bc.m0, bc.m1, bc.m3]
        if not all(_is_number(v) for v in values):
            errors.append("bc.mu, bc.m0, bc.m1 and bc.m3 are required for NMatrix")
        elif abs(bc.m0 ** 2 + bc.m1 ** 2 + bc.m3 ** 2 - 1.0) > 1e-9:
            warnings.append("bc.m0^2 + bc.m1^2 + bc.m3^2 != 1: the relation is not unitary and verify will fail")
    elif bc.kind == "ConfiningSeparated" and bc.m0_sign not in (1, -1):
        errors.append("bc.m0_sign must be +1 or -1 for ConfiningSeparated")

    if scenario.majorana_sign not in MAJORANA_SIGNS:
        errors.append(f"majorana_sign must be one of {', '.join(MAJORANA_SIGNS)}")
    if not isinstance(scenario.seed, int) or isinstance(scenario.seed, bool):
        errors.append("seed must be an integer")

    s = scenario.solver
    for f in fields(SolverSection):
        value = getattr(s, f.name)
        if f.name in ('snapshot_stride', 'energy_window', 'k_list'):
            continue
        if not _is_number(value) or value <= 0:
            errors.append(f"solver.{f.name} must be positive")
    if s.snapshot_stride is not None and (not isinstance(s.snapshot_stride, int) or s.snapshot_stride < 1):
        errors.append("solver.snapshot_stride must be a positive integer")
    if s.energy_window is not None:
        window = s.energy_window
        if (not isinstance(window, list) or len(window) != 2 or not all(_is_number(v) for v in window)
                or not window[0] < window[1]):
            errors.append("solver.energy_window must be [E_lo, E_hi] with E_lo < E_hi")
    if not isinstance(s.k_list, list) or not all(_is_number(k) for k in s.k_list):
        errors.append("solver.k_list must be a list of numbers")
    elif len(s.k_list) < 3:
        warnings.append("solver.k_list has fewer than 3 entries; nrlimit will refuse it")
    if _is_number(s.dt_factor) and _is_number(s.cfl_factor) and s.dt_factor > s.cfl_factor:
        warnings.append("solver.dt_factor exceeds solver.cfl_factor; evolve will refuse the run")

    for name in scenario.tolerances.positive_violations():
        errors.append(f"tolerances.{name} must be positive")

    if not isinstance(scenario.output_dir, str) or not scenario.output_dir:
        errors.append("output_dir must be a non-empty path")

    return {'errors': errors, 'warnings': warnings}


def require_valid(scenario: Scenario) -> Scenario:
    """Validate and raise ConfigurationError listing every problem"""
    result = validate_scenario(scenario)
    for warning in result['warnings']:
        logger.warning(warning)
    if result['errors']:
        raise ConfigurationError("invalid scenario: " + "; ".join(result['errors']), errors=result['errors'])
    return scenario


def save_scenario(scenario: Scenario, path: str) -> bool:
    """Write a scenario as JSON"""
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(scenario.to_dict(), f, indent=2, sort_keys=True)
        return True
    except OSError as e:
        logger.error(f"Error saving scenario to {path}: {e}")
        return False
