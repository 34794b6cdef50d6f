"""
Discrete momentum and FV Hamiltonian, plus the domain check of a transfer relation.

    h Phi = -(hbar^2 / 2m) (tau3 + i tau2) Phi'' + mc^2 tau3 Phi

Derivatives wrap around with the state's twist when its declared class is
periodic or antiperiodic, and fall back to one-sided stencils otherwise.
"""

from typing import Optional, Tuple

import numpy as np

from src.boundary.bc_families import TransferMatrixV
from src.linalg.pauli import Complex2x2
from src.states.fv_states import FvState, KfgState, MajoranaSign
from src.states.grid import UnitsConfig, first_derivative, second_derivative


def _components_d1(state: FvState) -> np.ndarray:
    return first_derivative(state.components, state.grid.spacing, state.twist)


def _components_d2(state: FvState) -> np.ndarray:
    return second_derivative(state.components, state.grid.spacing, state.twist)


def apply_momentum(state: FvState, units: UnitsConfig) -> FvState:
    """``-i hbar d/dx`` on each component."""
    d1 = _components_d1(state)
    out = -1j * units.hbar * d1
    return FvState(state.grid, out[0], out[1], MajoranaSign.NONE, state.bc)


def hamiltonian_components(state: FvState, units: UnitsConfig) -> np.ndarray:
    """Raw ``(2, n)`` samples of ``h Phi``."""
    d2 = _components_d2(state)
    kinetic = -(units.hbar ** 2) / (2 * units.m) * (d2[0] + d2[1])
    mass = units.rest_energy
    return np.vstack([kinetic + mass * state.phi1, -kinetic - mass * state.phi2])


def apply_fv_hamiltonian(state: FvState, units: UnitsConfig) -> FvState:
    out = hamiltonian_components(state, units)
    return FvState(state.grid, out[0], out[1], MajoranaSign.NONE, state.bc)


def fv_time_derivative(state: FvState, units: UnitsConfig) -> FvState:
    """
    ``Phi_dot = -i h Phi / hbar``.

    For Majorana states the second component is rebuilt from the first so
    the time derivative carries the same sign constraint exactly.
    """
    out = -1j * hamiltonian_components(state, units) / units.hbar
    sign = state.majorana_sign
    if sign is MajoranaSign.NONE:
        return FvState(state.grid, out[0], out[1], sign, state.bc)
    return FvState(state.grid, out[0], sign.factor * np.conj(out[0]), sign, state.bc)


def hamiltonian_domain_check(state: FvState, relation: TransferMatrixV,
                             derivative: Optional[np.ndarray] = None) -> Tuple[float, float]:
    """
    Endpoint violations of ``Phi(b) = V Phi(a)`` and ``Phi'(b) = V Phi'(a)``.

    Args:
        state: FV state on a closed grid
        relation: Transfer matrix, or a bare 2x2 matrix
        derivative: Optional ``(2, n)`` samples of ``Phi'``; computed with the
            state's stencils when omitted

    Returns:
        ``(value_residual, derivative_residual)``
    """
    v = relation.matrix if isinstance(relation, TransferMatrixV) else relation
    if not isinstance(v, Complex2x2):
        v = Complex2x2.from_array(np.asarray(v))
    comps = state.components
    d1 = _components_d1(state) if derivative is None else np.asarray(derivative, dtype=complex)

    def violation(f: np.ndarray) -> float:
        return float(np.max(np.abs(f[:, -1] - v.array @ f[:, 0])))

    return violation(comps), violation(d1)


def boundary_data(state: KfgState, derivative: Optional[np.ndarray] = None,
                  use_time_derivative: bool = False) -> np.ndarray:
    """KFG boundary data ``(f(b), f(a), f'(b), f'(a))`` of ``phi`` or ``phi_dot``."""
    f = state.phi_dot if use_time_derivative else state.phi
    d1 = first_derivative(f, state.grid.spacing, state.twist) if derivative is None else np.asarray(derivative)
    return np.array([f[-1], f[0], d1[-1], d1[0]], dtype=complex)
