"""
States Package

Grid, units, FV/KFG state containers and discrete operators.
"""

from .grid import Grid, UnitsConfig, first_derivative, second_derivative
from .fv_states import (
    FvState,
    KfgState,
    MajoranaSign,
    charge_conjugate,
    enforce_majorana,
    fv_from_kfg,
    kfg_from_fv,
    kfg_state_from_fv,
    parity_transform,
    random_state,
)
from .operators import (
    apply_fv_hamiltonian,
    apply_momentum,
    boundary_data,
    fv_time_derivative,
    hamiltonian_domain_check,
)

__all__ = [
    'Grid',
    'UnitsConfig',
    'first_derivative',
    'second_derivative',
    'FvState',
    'KfgState',
    'MajoranaSign',
    'charge_conjugate',
    'enforce_majorana',
    'fv_from_kfg',
    'kfg_from_fv',
    'kfg_state_from_fv',
    'parity_transform',
    'random_state',
    'apply_fv_hamiltonian',
    'apply_momentum',
    'boundary_data',
    'fv_time_derivative',
    'hamiltonian_domain_check',
]
