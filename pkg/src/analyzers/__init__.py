"""
Analyzers Package

Observables, boundary functionals, integral charges and tensor identities.
"""

from .observables import (
    ObservableField,
    boundary_term_f,
    boundary_term_g,
    continuity_residual,
    current_j,
    density_rho,
    energy_balance_residual,
    energy_current_j_en,
    energy_density_rho_en,
    g_from_data,
    indefinite_inner_product,
    integral_charges,
    rho_en_endpoint_balance,
    rho_endpoint_balance,
)
from .tensors import TensorFields, tensor_fields

__all__ = [
    'ObservableField',
    'boundary_term_f',
    'boundary_term_g',
    'continuity_residual',
    'current_j',
    'density_rho',
    'energy_balance_residual',
    'energy_current_j_en',
    'energy_density_rho_en',
    'g_from_data',
    'indefinite_inner_product',
    'integral_charges',
    'rho_en_endpoint_balance',
    'rho_endpoint_balance',
    'TensorFields',
    'tensor_fields',
]
