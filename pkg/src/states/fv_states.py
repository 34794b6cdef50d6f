"""
FV two-component and KFG one-component states on a closed grid.

The FV components relate to the KFG field and its time derivative through

    phi1 = (phi + i hbar phi_dot / mc^2) / 2,   phi2 = (phi - i hbar phi_dot / mc^2) / 2

so ``phi = phi1 + phi2`` and ``phi_dot = -i (mc^2 / hbar)(phi1 - phi2)``.
States are immutable: arrays are stored read-only and every operation
returns a new state.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

import numpy as np

from src.boundary.classification import BcClass, BcKind
from src.states.grid import Grid, UnitsConfig
from src.utils.error_handler import InvalidInputError, UnsupportedBoundaryError

MAJORANA_TOL = 1e-13


class MajoranaSign(Enum):
    PLUS = "plus"
    MINUS = "minus"
    NONE = "none"

    @property
    def factor(self) -> float:
        if self is MajoranaSign.NONE:
            raise ValueError("no Majorana factor for an unconstrained state")
        return 1.0 if self is MajoranaSign.PLUS else -1.0

    @classmethod
    def parse(cls, value: Union[str, 'MajoranaSign', None]) -> 'MajoranaSign':
        if value is None:
            return cls.NONE
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def _frozen(values, n: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    if arr.shape != (n,):
        raise InvalidInputError(f"{name} must have shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite samples")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FvState:
    grid: Grid
    phi1: np.ndarray
    phi2: np.ndarray
    majorana_sign: MajoranaSign = MajoranaSign.NONE
    bc: Optional[BcClass] = None

    def __post_init__(self):
        object.__setattr__(self, 'phi1', _frozen(self.phi1, self.grid.n, 'phi1'))
        object.__setattr__(self, 'phi2', _frozen(self.phi2, self.grid.n, 'phi2'))
        object.__setattr__(self, 'majorana_sign', MajoranaSign.parse(self.majorana_sign))
        if self.majorana_sign is not MajoranaSign.NONE:
            target = self.majorana_sign.factor * np.conj(self.phi1)
            scale = max(1.0, float(np.max(np.abs(self.phi1), initial=0.0)))
            if np.max(np.abs(self.phi2 - target)) > MAJORANA_TOL * scale:
                raise InvalidInputError(f"phi2 violates the Majorana-{self.majorana_sign.value} condition")

    @property
    def twist(self) -> Optional[float]:
        return self.bc.twist if self.bc is not None and self.bc.is_twisted else None

    @property
    def components(self) -> np.ndarray:
        return np.vstack([self.phi1, self.phi2])

    def with_components(self, phi1, phi2, majorana_sign: Optional[MajoranaSign] = None) -> 'FvState':
        sign = self.majorana_sign if majorana_sign is None else majorana_sign
        return FvState(self.grid, phi1, phi2, sign, self.bc)

    def scaled(self, factor: complex) -> 'FvState':
        sign = self.majorana_sign
        if sign is not MajoranaSign.NONE and abs(complex(factor).imag) > 0:
            sign = MajoranaSign.NONE
        return self.with_components(factor * self.phi1, factor * self.phi2, sign)


@dataclass(frozen=True, eq=False)
class KfgState:
    grid: Grid
    phi: np.ndarray
    phi_dot: np.ndarray
    majorana_sign: MajoranaSign = MajoranaSign.NONE
    bc: Optional[BcClass] = None

    def __post_init__(self):
        object.__setattr__(self, 'phi', _frozen(self.phi, self.grid.n, 'phi'))
        object.__setattr__(self, 'phi_dot', _frozen(self.phi_dot, self.grid.n, 'phi_dot'))
        object.__setattr__(self, 'majorana_sign', MajoranaSign.parse(self.majorana_sign))
        sign = self.majorana_sign
        if sign is not MajoranaSign.NONE:
            scale = max(1.0, float(np.max(np.abs(self.phi), initial=0.0)))
            stray = self.phi.imag if sign is MajoranaSign.PLUS else self.phi.real
            if np.max(np.abs(stray)) > MAJORANA_TOL * scale:
                kind = "real" if sign is MajoranaSign.PLUS else "purely imaginary"
                raise InvalidInputError(f"Majorana-{sign.value} KFG field must be {kind}")

    @property
    def twist(self) -> Optional[float]:
        return self.bc.twist if self.bc is not None and self.bc.is_twisted else None


def charge_conjugate(state: FvState) -> FvState:
    """``Phi_c = tau1 Phi^*``."""
    return state.with_components(np.conj(state.phi2), np.conj(state.phi1))


def enforce_majorana(phi1, sign: Union[str, MajoranaSign], grid: Grid,
                     bc: Optional[BcClass] = None) -> FvState:
    """Build the state with ``phi2 = +-conj(phi1)``."""
    sign = MajoranaSign.parse(sign)
    if sign is MajoranaSign.NONE:
        raise InvalidInputError("enforce_majorana needs sign 'plus' or 'minus'")
    phi1 = np.asarray(phi1, dtype=complex)
    return FvState(grid, phi1, sign.factor * np.conj(phi1), sign, bc)


def parity_transform(state: Union[FvState, KfgState]) -> Union[FvState, KfgState]:
    """Reflection about the midpoint: ``(Pi f)(x) = f(a + b - x)``."""
    if isinstance(state, FvState):
        return replace(state, phi1=state.phi1[::-1], phi2=state.phi2[::-1])
    return replace(state, phi=state.phi[::-1], phi_dot=state.phi_dot[::-1])


def fv_from_kfg(state: KfgState, units: UnitsConfig) -> FvState:
    """FV components from ``(phi, phi_dot)``."""
    shift = 1j * units.hbar * state.phi_dot / units.rest_energy
    phi1 = 0.5 * (state.phi + shift)
    sign = state.majorana_sign
    if sign is MajoranaSign.NONE:
        phi2 = 0.5 * (state.phi - shift)
    else:
        # phi2 = +-conj(phi1) holds identically for real / imaginary (phi, phi_dot)
        phi2 = sign.factor * np.conj(phi1)
    return FvState(state.grid, phi1, phi2, sign, state.bc)


def kfg_from_fv(state: FvState) -> np.ndarray:
    """``phi = phi1 + phi2``."""
    return state.phi1 + state.phi2


def kfg_state_from_fv(state: FvState, units: UnitsConfig) -> KfgState:
    """Recover ``(phi, phi_dot)``; inverse of :func:`fv_from_kfg`."""
    phi = state.phi1 + state.phi2
    phi_dot = -1j * units.omega0 * (state.phi1 - state.phi2)
    sign = state.majorana_sign
    if sign is MajoranaSign.PLUS:
        phi, phi_dot = phi.real.astype(complex), phi_dot.real.astype(complex)
    elif sign is MajoranaSign.MINUS:
        phi, phi_dot = 1j * phi.imag, 1j * phi_dot.imag
    return KfgState(state.grid, phi, phi_dot, sign, state.bc)


def admissible_wavenumbers(bc: BcClass, length: float, count: int) -> np.ndarray:
    """Lowest non-negative wavenumbers compatible with a periodic or antiperiodic twist."""
    if bc.kind is BcKind.PERIODIC:
        return 2 * math.pi * np.arange(count) / length
    if bc.kind is BcKind.ANTIPERIODIC:
        return (2 * np.arange(count) + 1) * math.pi / length
    raise UnsupportedBoundaryError(f"no plane-wave basis for {bc.label()}")


def random_state(seed: int, grid: Grid, bc: BcClass, sign: Union[str, MajoranaSign],
                 n_modes: int, units: Optional[UnitsConfig] = None) -> FvState:
    """
    Seeded Majorana state built from admissible Fourier modes.

    The KFG field and its time derivative are real (plus) or imaginary (minus)
    combinations of the ``n_modes`` lowest admissible modes; the result is
    normalized to unit maximum amplitude of ``phi`` and the last sample is set
    to exactly ``twist`` times the first.
    """
    if bc is None or not bc.is_twisted:
        raise UnsupportedBoundaryError("random_state supports only periodic and antiperiodic classes")
    sign = MajoranaSign.parse(sign)
    if sign is MajoranaSign.NONE:
        raise InvalidInputError("random_state needs a Majorana sign")
    if n_modes < 1:
        raise InvalidInputError("n_modes must be at least 1")
    units = units or UnitsConfig()

    rng = np.random.default_rng(seed)
    k = admissible_wavenumbers(bc, grid.length, n_modes)
    omega = np.sqrt(units.omega0 ** 2 + (units.c * k) ** 2)
    coeffs = rng.normal(size=(4, n_modes))
    xs = grid.x[:-1] - grid.a
    phase = np.outer(k, xs)
    field = coeffs[0] @ np.cos(phase) + coeffs[1] @ np.sin(phase)
    velocity = (coeffs[2] * omega) @ np.cos(phase) + (coeffs[3] * omega) @ np.sin(phase)

    s = bc.twist
    field = np.append(field, s * field[0])
    velocity = np.append(velocity, s * velocity[0])
    scale = float(np.max(np.abs(field)))
    field, velocity = field / scale, velocity / scale

    unit = 1.0 if sign is MajoranaSign.PLUS else 1j
    kfg = KfgState(grid, unit * field, unit * velocity, sign, bc)
    return fv_from_kfg(kfg, units)
