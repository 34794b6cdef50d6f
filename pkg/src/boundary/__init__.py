"""
Boundary Package

Boundary-condition parameterizations, constraint solvers, KFG family
membership and classification.
"""

from .membership import BoundaryRelation, GeneralKfgBcParams, kfg_family_membership
from .bc_families import (
    Branch,
    FluxSolution,
    NMatrixParams,
    SeparatedBcParams,
    TransferMatrixV,
    build_N,
    flux_balance_equations,
    flux_balance_residual,
    n_to_transfer,
    parity_residual,
    schrodinger_parity_restriction,
    separated_branch_analysis,
    solve_flux_constraint,
    solve_parity_constraint,
)
from .classification import BcClass, BcKind, classify_bc

__all__ = [
    'BoundaryRelation',
    'GeneralKfgBcParams',
    'kfg_family_membership',
    'Branch',
    'FluxSolution',
    'NMatrixParams',
    'SeparatedBcParams',
    'TransferMatrixV',
    'build_N',
    'flux_balance_equations',
    'flux_balance_residual',
    'n_to_transfer',
    'parity_residual',
    'schrodinger_parity_restriction',
    'separated_branch_analysis',
    'solve_flux_constraint',
    'solve_parity_constraint',
    'BcClass',
    'BcKind',
    'classify_bc',
]
