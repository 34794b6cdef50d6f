"""
Second-rank tensors of the KFG field in 1+1 dimensions (metric diag(1, -1)).

``K`` carries the energy density and energy current (``K^0_0 = rho_en``,
``K^1_0 = j_en / c``); ``T`` is the usual energy-momentum tensor. The two
are linked pointwise by a total time derivative, which is checked here.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.analyzers.observables import ObservableField
from src.states.fv_states import KfgState
from src.states.grid import UnitsConfig, first_derivative, second_derivative
from src.utils.error_handler import InvalidInputError


@dataclass(frozen=True)
class TensorFields:
    k00: ObservableField
    k10: ObservableField
    k01_upper: ObservableField
    k10_upper: ObservableField
    t00: ObservableField
    t10: ObservableField
    relation_residual: float
    symmetry_residual: float
    divergence_residual: Optional[float] = None

    def summary(self) -> dict:
        return {
            'relation_residual': self.relation_residual,
            'symmetry_residual': self.symmetry_residual,
            'divergence_residual': self.divergence_residual,
        }


def _phi_ddot(kfg: KfgState, units: UnitsConfig) -> np.ndarray:
    """``c^2 phi'' - (mc^2 / hbar)^2 phi`` from the KFG equation."""
    d2 = second_derivative(kfg.phi, kfg.grid.spacing, kfg.twist)
    return units.c ** 2 * d2 - units.omega0 ** 2 * kfg.phi


def _k00(kfg: KfgState, units: UnitsConfig) -> np.ndarray:
    phi, phi_dot = kfg.phi, kfg.phi_dot
    return -(units.hbar ** 2) / (2 * units.m * units.c ** 2) * (
        phi.conj() * _phi_ddot(kfg, units) - np.abs(phi_dot) ** 2)


def _k10(kfg: KfgState, units: UnitsConfig) -> np.ndarray:
    dx = kfg.grid.spacing
    dphi = first_derivative(kfg.phi, dx, kfg.twist)
    dphi_dot = first_derivative(kfg.phi_dot, dx, kfg.twist)
    return (units.hbar ** 2) / (2 * units.m * units.c) * (kfg.phi.conj() * dphi_dot - dphi.conj() * kfg.phi_dot)


def tensor_fields(kfg: KfgState, units: UnitsConfig,
                  prev: Optional[KfgState] = None, next_: Optional[KfgState] = None,
                  dt: Optional[float] = None) -> TensorFields:
    """
    Evaluate ``K`` and ``T`` components and the residual of the relation between them.

    Time derivatives of products are taken analytically from ``phi_dot`` and
    the KFG equation unless neighbouring levels ``prev``/``next_`` at spacing
    ``dt`` are supplied, in which case centered differences are used and the
    divergence residual ``(1/c) d_t K^0_0 + d_x K^1_0`` is reported as well.
    """
    neighbours = (prev, next_, dt)
    if any(v is not None for v in neighbours) and not all(v is not None for v in neighbours):
        raise InvalidInputError("prev, next_ and dt must be given together")
    if dt is not None and dt <= 0:
        raise InvalidInputError("dt must be positive", dt=dt)

    grid, dx = kfg.grid, kfg.grid.spacing
    hbar, m, c = units.hbar, units.m, units.c
    phi, phi_dot = kfg.phi, kfg.phi_dot
    dphi = first_derivative(phi, dx, kfg.twist)
    dphi_dot = first_derivative(phi_dot, dx, kfg.twist)

    k00 = _k00(kfg, units)
    k10 = _k10(kfg, units)
    k01_upper = hbar ** 2 / (2 * m * c) * (phi.conj() * dphi_dot - phi_dot.conj() * dphi)
    k10_upper = k10

    mass_term = (m * c / hbar) ** 2 * np.abs(phi) ** 2
    t00 = hbar ** 2 / (2 * m) * (np.abs(phi_dot) ** 2 / c ** 2 + np.abs(dphi) ** 2 + mass_term)
    t10 = -hbar ** 2 / (2 * m * c) * (phi_dot.conj() * dphi + dphi.conj() * phi_dot)
    lagrangian = np.abs(phi_dot) ** 2 / c ** 2 - np.abs(dphi) ** 2 - mass_term

    divergence = None
    if prev is None:
        dt_phi_phidot = np.abs(phi_dot) ** 2 + phi.conj() * _phi_ddot(kfg, units)
        dt_phi_dphi = phi_dot.conj() * dphi + phi.conj() * dphi_dot
    else:
        def phi_phidot(s: KfgState):
            return s.phi.conj() * s.phi_dot

        def phi_dphi(s: KfgState):
            return s.phi.conj() * first_derivative(s.phi, dx, s.twist)

        dt_phi_phidot = (phi_phidot(next_) - phi_phidot(prev)) / (2 * dt)
        dt_phi_dphi = (phi_dphi(next_) - phi_dphi(prev)) / (2 * dt)
        dt_k00 = (_k00(next_, units) - _k00(prev, units)) / (2 * dt)
        dx_k10 = first_derivative(k10, dx, kfg.twist)
        divergence = float(np.max(np.abs(dt_k00 / c + dx_k10)))

    res00 = k00 - t00 - hbar ** 2 / (2 * m) * lagrangian + hbar ** 2 / (2 * m * c ** 2) * dt_phi_phidot
    res10 = k10 - t10 - hbar ** 2 / (2 * m * c) * dt_phi_dphi
    relation = float(max(np.max(np.abs(res00)), np.max(np.abs(res10))))

    return TensorFields(
        k00=ObservableField(k00, 'K00', grid),
        k10=ObservableField(k10, 'K10', grid),
        k01_upper=ObservableField(k01_upper, 'K01_upper', grid),
        k10_upper=ObservableField(k10_upper, 'K10_upper', grid),
        t00=ObservableField(t00, 'T00', grid),
        t10=ObservableField(t10, 'T10', grid),
        relation_residual=relation,
        symmetry_residual=float(np.max(np.abs(k01_upper - k10_upper))),
        divergence_residual=divergence,
    )
