"""
Local observables, boundary functionals and integral charges of FV states.

Scalar expressions use the KFG field ``phi = phi1 + phi2`` and are the
canonical values; the matrix forms built from ``W = tau3 + i tau2`` are
evaluated alongside and must agree with them.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from src.linalg.pauli import W
from src.states.fv_states import FvState
from src.states.grid import Grid, UnitsConfig, first_derivative
from src.utils.error_handler import InsufficientDataError, InternalConsistencyError, InvalidInputError
from src.utils.logger import get_global_logger

logger = get_global_logger()

REAL_KINDS = {'rho', 'j', 'T00', 'T10'}
KINDS = {'rho', 'rho_en', 'j', 'j_en', 'K00', 'K10', 'K01_upper', 'K10_upper', 'T00', 'T10', 'custom'}
CROSS_CHECK_TOL = 1e-9

# tau3 W = e e^T and W^dagger W = 2 e e^T with e = (1, 1)
TAU3_W = np.array([[1.0, 1.0], [1.0, 1.0]])
W_DAG_W = W.array.conj().T @ W.array


@dataclass(frozen=True, eq=False)
class ObservableField:
    values: np.ndarray
    kind: str
    grid: Grid

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown observable kind {self.kind!r}")
        values = np.array(self.values)
        if values.shape != (self.grid.n,):
            raise InvalidInputError(f"{self.kind} must have shape ({self.grid.n},), got {values.shape}")
        if self.kind in REAL_KINDS:
            scale = max(1.0, float(np.max(np.abs(values))))
            if np.max(np.abs(np.imag(values))) > 1e-12 * scale:
                raise InvalidInputError(f"{self.kind} must be real")
            values = np.real(values).astype(float)
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @property
    def at_a(self):
        return self.values[0]

    @property
    def at_b(self):
        return self.values[-1]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values) or float(np.max(np.abs(self.values.imag))) <= 1e-12

    def endpoint_jump(self) -> float:
        """``|f(b) - f(a)|``."""
        return float(abs(self.at_b - self.at_a))

    def integral(self):
        return self.grid.integrate(self.values)


def _check_same_grid(*states: FvState):
    first = states[0].grid
    for other in states[1:]:
        if other.grid != first:
            raise InvalidInputError("states live on different grids")


def _kfg_field(state: FvState) -> np.ndarray:
    return state.phi1 + state.phi2


def _d1(state: FvState, values: np.ndarray) -> np.ndarray:
    return first_derivative(values, state.grid.spacing, state.twist)


def _pairing(left: np.ndarray, matrix: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Pointwise ``left^dagger M right`` for ``(2, n)`` component arrays."""
    return np.einsum('in,ij,jn->n', left.conj(), matrix, right)


def density_rho(state: FvState) -> ObservableField:
    """``rho = |phi1|^2 - |phi2|^2``."""
    return ObservableField(np.abs(state.phi1) ** 2 - np.abs(state.phi2) ** 2, 'rho', state.grid)


def energy_density_rho_en(state: FvState, state_dot: FvState, units: Optional[UnitsConfig] = None) -> ObservableField:
    """``rho_en = i hbar (phi1* phi1_dot - phi2* phi2_dot)``."""
    _check_same_grid(state, state_dot)
    hbar = (units or UnitsConfig()).hbar
    values = 1j * hbar * (state.phi1.conj() * state_dot.phi1 - state.phi2.conj() * state_dot.phi2)
    return ObservableField(values, 'rho_en', state.grid)


def current_j(state: FvState, units: UnitsConfig) -> ObservableField:
    """``j = (i hbar / 2m)[phi'* phi - phi* phi']``, cross-checked against the matrix form."""
    phi = _kfg_field(state)
    dphi = _d1(state, phi)
    factor = 1j * units.hbar / (2 * units.m)
    scalar = factor * (dphi.conj() * phi - phi.conj() * dphi)

    comps = state.components
    dcomps = _d1(state, comps)
    matrix = factor * (_pairing(dcomps, TAU3_W, comps) - _pairing(comps, TAU3_W, dcomps))
    _cross_check('j', scalar, matrix)
    return ObservableField(scalar, 'j', state.grid)


def energy_current_j_en(state: FvState, state_dot: FvState, units: UnitsConfig) -> ObservableField:
    """
    Energy current ``j_en = -(hbar^2 / 2m)[phi'* phi_dot - phi* phi_dot']``.

    The two-component form ``-(hbar^2 / 4m)[Phi'^dagger W^dagger W Phi_dot
    - Phi^dagger W^dagger W Phi_dot']`` is evaluated as well; a disagreement
    beyond round-off means the state pair is inconsistent.

    Raises:
        InternalConsistencyError: If the scalar and matrix forms disagree
    """
    _check_same_grid(state, state_dot)
    phi, phi_dot = _kfg_field(state), _kfg_field(state_dot)
    dphi, dphi_dot = _d1(state, phi), _d1(state, phi_dot)
    kinetic = units.hbar ** 2 / (2 * units.m)
    scalar = -kinetic * (dphi.conj() * phi_dot - phi.conj() * dphi_dot)

    comps, comps_dot = state.components, state_dot.components
    dcomps, dcomps_dot = _d1(state, comps), _d1(state, comps_dot)
    matrix = -0.5 * kinetic * (_pairing(dcomps, W_DAG_W, comps_dot) - _pairing(comps, W_DAG_W, dcomps_dot))
    _cross_check('j_en', scalar, matrix)
    return ObservableField(scalar, 'j_en', state.grid)


def _cross_check(name: str, scalar: np.ndarray, matrix: np.ndarray):
    scale = max(1.0, float(np.max(np.abs(scalar))))
    gap = float(np.max(np.abs(scalar - matrix)))
    if gap > CROSS_CHECK_TOL * scale:
        raise InternalConsistencyError(f"matrix and scalar forms of {name} disagree", gap=gap)
    if gap > 1e-12 * scale:
        logger.warning(f"{name} forms agree only to {gap:.3e}")


def boundary_term_f(psi: FvState, phi: FvState, units: Optional[UnitsConfig] = None) -> complex:
    """``i hbar [Psi^dagger tau3 Phi]`` evaluated b minus a."""
    _check_same_grid(psi, phi)
    hbar = (units or UnitsConfig()).hbar

    def pairing(i: int) -> complex:
        return psi.phi1[i].conjugate() * phi.phi1[i] - psi.phi2[i].conjugate() * phi.phi2[i]

    return complex(1j * hbar * (pairing(-1) - pairing(0)))


def g_from_data(psi_data: Sequence[complex], phi_data: Sequence[complex], units: UnitsConfig) -> complex:
    """
    Scalar boundary functional from KFG boundary data.

    Both arguments are ``(f(b), f(a), f'(b), f'(a))``; the value is
    ``-(hbar^2 / 2m)[psi'* phi - psi* phi']`` evaluated b minus a.
    """
    p = np.asarray(psi_data, dtype=complex)
    q = np.asarray(phi_data, dtype=complex)
    at_b = p[2].conjugate() * q[0] - p[0].conjugate() * q[2]
    at_a = p[3].conjugate() * q[1] - p[1].conjugate() * q[3]
    return complex(-units.hbar ** 2 / (2 * units.m) * (at_b - at_a))


def boundary_term_g(psi: FvState, phi: FvState, units: UnitsConfig) -> complex:
    """
    Boundary functional of the KFG operator, scalar form.

    Raises:
        InternalConsistencyError: If the two-component form disagrees by more than 1e-9
    """
    _check_same_grid(psi, phi)
    psi_f, phi_f = _kfg_field(psi), _kfg_field(phi)
    dpsi, dphi = _d1(psi, psi_f), _d1(phi, phi_f)
    psi_data = [psi_f[-1], psi_f[0], dpsi[-1], dpsi[0]]
    phi_data = [phi_f[-1], phi_f[0], dphi[-1], dphi[0]]
    scalar = g_from_data(psi_data, phi_data, units)

    pc, qc = psi.components, phi.components
    dpc, dqc = _d1(psi, pc), _d1(phi, qc)
    density = _pairing(dpc, TAU3_W, qc) - _pairing(pc, TAU3_W, dqc)
    matrix = -units.hbar ** 2 / (2 * units.m) * (density[-1] - density[0])
    gap = abs(scalar - matrix)
    if gap > CROSS_CHECK_TOL * max(1.0, abs(scalar)):
        raise InternalConsistencyError("matrix and scalar forms of g disagree", gap=float(gap))
    return scalar


def indefinite_inner_product(psi: FvState, phi: FvState) -> complex:
    """Trapezoid quadrature of ``Psi^dagger tau3 Phi`` over the interval."""
    _check_same_grid(psi, phi)
    integrand = psi.phi1.conj() * phi.phi1 - psi.phi2.conj() * phi.phi2
    return complex(psi.grid.integrate(integrand))


def integral_charges(psi: FvState, phi: FvState, psi_dot: FvState, phi_dot: FvState,
                     units: Optional[UnitsConfig] = None) -> Tuple[complex, complex]:
    """``<<Psi, Phi>>`` and ``<<Psi, E Phi>>`` with ``E = i hbar d/dt``."""
    hbar = (units or UnitsConfig()).hbar
    _check_same_grid(psi, phi, psi_dot, phi_dot)
    charge = indefinite_inner_product(psi, phi)
    energy = 1j * hbar * indefinite_inner_product(psi, phi_dot)
    return charge, complex(energy)


def rho_endpoint_balance(state: FvState) -> float:
    return density_rho(state).endpoint_jump()


def rho_en_endpoint_balance(state: FvState, state_dot: FvState, units: Optional[UnitsConfig] = None) -> float:
    return energy_density_rho_en(state, state_dot, units).endpoint_jump()


HistoryInput = Union[np.ndarray, Sequence[ObservableField], Sequence[np.ndarray]]


def _stack_history(history: HistoryInput) -> np.ndarray:
    if isinstance(history, np.ndarray):
        return np.atleast_2d(history)
    rows = [h.values if isinstance(h, ObservableField) else np.asarray(h) for h in history]
    if not rows:
        return np.zeros((0, 0))
    return np.vstack(rows)


def _histories(densities: HistoryInput, currents: HistoryInput):
    rho = _stack_history(densities)
    cur = _stack_history(currents)
    if rho.shape[0] < 3 or cur.shape[0] < 3:
        raise InsufficientDataError("continuity checks need at least 3 time levels",
                                    levels=int(min(rho.shape[0], cur.shape[0])))
    if rho.shape != cur.shape:
        raise InvalidInputError(f"density history {rho.shape} and current history {cur.shape} differ")
    return rho, cur


def continuity_residual(densities: HistoryInput, currents: HistoryInput, dt: float, grid: Grid) -> float:
    """
    Max interior residual of ``d(rho)/dt + d(j)/dx = 0``.

    Both histories are sampled at uniform ``dt``; centered differences are used
    in time and space, so the first and last levels and both endpoints are skipped.

    Raises:
        InsufficientDataError: If fewer than three time levels are given
    """
    rho, cur = _histories(densities, currents)
    if dt <= 0:
        raise InvalidInputError("dt must be positive", dt=dt)
    dx = grid.spacing
    d_rho = (rho[2:, 1:-1] - rho[:-2, 1:-1]) / (2 * dt)
    d_cur = (cur[1:-1, 2:] - cur[1:-1, :-2]) / (2 * dx)
    return float(np.max(np.abs(d_rho + d_cur)))


def energy_balance_residual(densities: HistoryInput, currents: HistoryInput, dt: float, grid: Grid) -> float:
    """Max residual of ``d/dt int(rho_en) + j_en(b) - j_en(a) = 0`` over interior time levels."""
    rho, cur = _histories(densities, currents)
    if dt <= 0:
        raise InvalidInputError("dt must be positive", dt=dt)
    totals = np.array([grid.integrate(row) for row in rho])
    rate = (totals[2:] - totals[:-2]) / (2 * dt)
    flux = cur[1:-1, -1] - cur[1:-1, 0]
    return float(np.max(np.abs(rate + flux)))
