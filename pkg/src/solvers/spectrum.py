"""
Stationary spectrum of the free FV Hamiltonian on an interval.

Every flux-balanced transfer relation projects onto the KFG field as
``phi(b) = s phi(a)``, ``phi'(b) = s phi'(a)`` with the branch sign ``s``,
so the quantization condition only depends on the branch. Roots are
bracketed on a characteristic function that changes sign at every root and
refined with Brent's method.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import brentq

from src.analyzers.observables import g_from_data
from src.boundary.bc_families import Branch, TransferMatrixV
from src.boundary.classification import BcClass, BcKind, classify_bc, transfer_phi_relation
from src.boundary.membership import BoundaryRelation
from src.linalg.pauli import Complex2x2, IDENTITY
from src.processors.batch_processor import run_indexed
from src.states.fv_states import FvState
from src.states.grid import Grid, UnitsConfig
from src.states.operators import hamiltonian_domain_check
from src.utils.error_handler import (
    ConvergenceError,
    EvanescentRegimeError,
    InvalidParameterError,
    OutOfRangeError,
    UnsupportedBoundaryError,
)
from src.utils.logger import get_global_logger

logger = get_global_logger()

BRACKET_FRACTION = 0.1
ROOT_XTOL = 1e-13
JACOBI_MAX_SIZE = 64
JACOBI_TOL = 1e-12
FD_MAX_POINTS = 600
FD_METHODS = ("auto", "jacobi", "lapack")


@dataclass(frozen=True)
class SpectrumEntry:
    n: int
    k: float
    e_plus: float
    e_minus: float
    quantization_residual: Optional[float] = None
    flux_residual: Optional[float] = None
    domain_residual: Optional[float] = None

    def to_row(self) -> dict:
        return {
            'n': self.n, 'k': self.k, 'E_plus': self.e_plus, 'E_minus': self.e_minus,
            'flux_residual': self.flux_residual, 'domain_residual': self.domain_residual,
        }


@dataclass(frozen=True)
class SpectrumResult:
    entries: List[SpectrumEntry]
    label: str
    mu: Optional[float] = None
    branch: Optional[Branch] = None
    notes: List[str] = field(default_factory=list)

    @property
    def ks(self) -> np.ndarray:
        return np.array([e.k for e in self.entries])

    @property
    def energies(self) -> np.ndarray:
        return np.array([e.e_plus for e in self.entries])

    def __len__(self) -> int:
        return len(self.entries)

    def rows(self) -> List[dict]:
        return [e.to_row() for e in self.entries]


def analytic_spectrum(bc: BcClass, n_max: int, grid: Grid, units: UnitsConfig) -> SpectrumResult:
    """
    Closed-form spectrum for the periodic and antiperiodic classes.

    Mode indices run from 0 to ``n_max`` inclusive with ``k_n = 2 pi n / L``
    (periodic) or ``(2n + 1) pi / L`` (antiperiodic).
    """
    if n_max < 1:
        raise InvalidParameterError("n_max must be at least 1", n_max=n_max)
    if not bc.is_twisted:
        raise UnsupportedBoundaryError(f"no closed-form spectrum for {bc.label()}")
    n = np.arange(n_max + 1)
    if bc.kind is BcKind.PERIODIC:
        ks = 2 * math.pi * n / grid.length
    else:
        ks = (2 * n + 1) * math.pi / grid.length
    energies = units.energy(ks)
    transfer = IDENTITY.scale(bc.twist)
    entries = []
    for i, k, e in zip(n, ks, energies):
        k, e = float(k), float(e)
        residual = 0.0 if k == 0.0 else abs(quantization_residual(bc.mu, bc.branch, e, grid, units))
        state, _, derivative = stationary_mode(k, e, grid, units, bc)
        domain = max(hamiltonian_domain_check(state, transfer, derivative))
        entries.append(SpectrumEntry(int(i), k, e, -e, residual,
                                     _mode_flux_residual(k, e, grid, units, transfer), float(domain)))
    return SpectrumResult(entries, label=bc.label(), mu=bc.mu, branch=bc.branch)


# -- finite-difference oracle ------------------------------------------------

def _jacobi_eigenvalues(matrix: np.ndarray, max_sweeps: int = 100) -> np.ndarray:
    """Cyclic Jacobi rotations on a real symmetric matrix."""
    a = np.array(matrix, dtype=float)
    size = a.shape[0]
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(size)
    for sweep in range(max_sweeps):
        off = math.sqrt(max(float(np.sum(a ** 2) - np.sum(np.diag(a) ** 2)), 0.0))
        if off <= JACOBI_TOL * scale:
            logger.debug("Jacobi converged", data={'sweeps': sweep, 'off_diagonal': off})
            return np.sort(np.diag(a))
        for p in range(size - 1):
            for q in range(p + 1, size):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                a[:, [p, q]] = a[:, [p, q]] @ rot
                a[[p, q], :] = rot.T @ a[[p, q], :]
    raise ConvergenceError("Jacobi diagonalization did not converge", sweeps=max_sweeps, size=size)


def _stencil_matrix(grid: Grid, twist: Optional[float]) -> np.ndarray:
    dx2 = grid.spacing ** 2
    if twist is None:
        size = grid.n - 2
        mat = 2.0 * np.eye(size) - np.eye(size, k=1) - np.eye(size, k=-1)
        return mat / dx2
    size = grid.n - 1
    mat = 2.0 * np.eye(size) - np.eye(size, k=1) - np.eye(size, k=-1)
    mat[0, -1] -= twist
    mat[-1, 0] -= twist
    return mat / dx2


def _stencil_twist(relation) -> Optional[float]:
    """Wraparound sign for the stencil, or None for a Dirichlet relation."""
    if isinstance(relation, BoundaryRelation):
        if relation.rank == 2 and BoundaryRelation.dirichlet().residual(relation.subspace()) <= 1e-12:
            return None
        relation = classify_bc(relation)
    elif isinstance(relation, TransferMatrixV):
        relation = classify_bc(relation)
    if isinstance(relation, BcClass):
        if relation.is_twisted:
            return relation.twist
        if relation.kind is BcKind.FLUX_BALANCED:
            return float(relation.branch.sign)
    raise UnsupportedBoundaryError("finite-difference oracle supports twisted, flux-balanced and Dirichlet relations")


def _lapack_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """``eigh`` held to the off-diagonal test the Jacobi sweeps stop on."""
    values, vectors = eigh(matrix)
    rotated = vectors.T @ matrix @ vectors
    off = math.sqrt(max(float(np.sum(rotated ** 2) - np.sum(np.diag(rotated) ** 2)), 0.0))
    scale = float(np.linalg.norm(matrix))
    if off > JACOBI_TOL * max(scale, 1e-300):
        raise ConvergenceError("LAPACK eigenvectors leave off-diagonal mass", off_diagonal=off, scale=scale)
    return np.sort(values)


def fd_eigensolver(relation: Union[BcClass, TransferMatrixV, BoundaryRelation], grid: Grid,
                   max_sweeps: int = 100, method: str = "auto") -> np.ndarray:
    """
    Eigenvalues ``k^2`` of the three-point ``-d^2/dx^2`` stencil with the
    boundary relation built into the matrix.

    Both paths stop on the same criterion, off-diagonal mass below 1e-12 of
    the matrix norm. ``auto`` uses cyclic Jacobi rotations up to
    ``JACOBI_MAX_SIZE`` rows and LAPACK through ``scipy.linalg.eigh`` above,
    where pure-Python sweeps become too slow for the n = 400 oracle.

    Raises:
        InvalidParameterError: If method is not auto, jacobi or lapack
        OutOfRangeError: If the grid exceeds the dense desk-scale limit
        ConvergenceError: If the diagonalization misses the off-diagonal criterion
    """
    if method not in FD_METHODS:
        raise InvalidParameterError(f"unknown eigensolver method {method!r}", allowed=FD_METHODS)
    if grid.n > FD_MAX_POINTS:
        raise OutOfRangeError(f"fd_eigensolver is limited to n <= {FD_MAX_POINTS}", n=grid.n)
    twist = _stencil_twist(relation)
    mat = _stencil_matrix(grid, twist)
    if method == "jacobi" or (method == "auto" and mat.shape[0] <= JACOBI_MAX_SIZE):
        return _jacobi_eigenvalues(mat, max_sweeps)
    return _lapack_eigenvalues(mat)


def fd_relative_errors(relation, grid: Grid, ks: Sequence[float]) -> np.ndarray:
    """
    Distance of each ``k^2`` to the nearest stencil eigenvalue.

    Relative for ``k > 0``; absolute (in units of ``1 / L^2``) for ``k = 0``.
    """
    eigenvalues = fd_eigensolver(relation, grid)
    errors = []
    for k in ks:
        target = float(k) ** 2
        gap = float(np.min(np.abs(eigenvalues - target)))
        errors.append(gap / target if target > 0 else gap * grid.length ** 2)
    return np.array(errors)


# -- quantization ------------------------------------------------------------

def _validate_mu(mu: float):
    if not (0.0 < mu < math.pi):
        raise OutOfRangeError("mu must lie in (0, pi)", mu=mu)


def wavenumber(energy: float, units: UnitsConfig) -> float:
    return math.sqrt(max(energy ** 2 - units.rest_energy ** 2, 0.0)) / (units.hbar * units.c)


def characteristic(branch: Branch, k: float, length: float) -> float:
    """Real function whose zeros are the quantized wavenumbers of the branch."""
    if branch.sign > 0:
        return math.sin(0.5 * k * length)
    return math.cos(0.5 * k * length)


def quantization_residual(mu: float, branch: Branch, energy: float, grid: Grid, units: UnitsConfig,
                          allow_evanescent: bool = False) -> complex:
    """
    Determinant of the boundary system for ``phi = A e^{ikx} + B e^{-ikx}``.

    With ``x`` measured from ``a`` the two projected relations give
    ``-2ik (e^{ikL} - s)(e^{-ikL} - s)``. Below the rest energy the basis is
    ``cosh``/``sinh`` and the determinant is ``2 kappa (1 - s cosh(kappa L))``.

    Raises:
        OutOfRangeError: If mu is outside (0, pi)
        EvanescentRegimeError: If ``|E| <= mc^2`` and the hyperbolic basis was not requested
    """
    _validate_mu(mu)
    s = branch.sign
    length = grid.length
    rest = units.rest_energy
    if abs(energy) <= rest:
        if not allow_evanescent:
            raise EvanescentRegimeError("energy lies in the evanescent regime", energy=energy, rest_energy=rest)
        kappa = math.sqrt(rest ** 2 - energy ** 2) / (units.hbar * units.c)
        return complex(2 * kappa * (1 - s * math.cosh(kappa * length)))
    k = wavenumber(energy, units)
    phase = np.exp(1j * k * length)
    return complex(-2j * k * (phase - s) * (np.conj(phase) - s))


def stationary_mode(k: float, energy: float, grid: Grid, units: UnitsConfig,
                    bc: Optional[BcClass] = None) -> Tuple[FvState, FvState, np.ndarray]:
    """
    FV stationary state built on ``f(x) = e^{ik(x-a)}``.

    Returns the state, its time derivative ``-iE Phi / hbar`` and the exact
    ``(2, n)`` spatial derivative of the components.
    """
    xs = grid.x - grid.a
    f = np.exp(1j * k * xs)
    df = 1j * k * f
    ratio = energy / units.rest_energy
    weights = np.array([0.5 * (1 + ratio), 0.5 * (1 - ratio)])
    comps = np.outer(weights, f)
    state = FvState(grid, comps[0], comps[1], bc=bc)
    factor = -1j * energy / units.hbar
    state_dot = FvState(grid, factor * comps[0], factor * comps[1], bc=bc)
    return state, state_dot, np.outer(weights, df)


def _mode_flux_residual(k: float, energy: float, grid: Grid, units: UnitsConfig, transfer: Complex2x2) -> float:
    """
    Energy-current wall form of the mode against the relation implied by ``V``.

    The exact wall data of ``e^{ik(x-a)}`` are paired with an orthonormal
    basis of the admissible data through
    ``-(hbar^2 / 2m)[psi'* phi_dot - psi* phi_dot']`` evaluated b minus a.
    A single plane wave carries the same current at both walls, so only the
    cross pairings see a wavenumber that misses the relation.

    Raises:
        UnsupportedBoundaryError: If ``V`` has no KFG-level projection
    """
    relation = transfer_phi_relation(transfer)
    if relation is None:
        raise UnsupportedBoundaryError("transfer matrix has no KFG-level relation")
    f_b = np.exp(1j * k * grid.length)
    data = np.array([f_b, 1.0, 1j * k * f_b, 1j * k])
    rate = abs(energy) / units.hbar
    pairings = [g_from_data(data, data, units)]
    pairings += [g_from_data(basis, data, units) for basis in relation.subspace().T]
    return float(rate * max(abs(g) for g in pairings))


def _refine_root(branch: Branch, lo: float, hi: float, length: float) -> float:
    return brentq(lambda k: characteristic(branch, k, length), lo, hi, xtol=ROOT_XTOL, maxiter=200)


def solve_modes_family(mu: float, branch: Branch, e_window: Sequence[float], grid: Grid, units: UnitsConfig,
                       max_workers: int = 1) -> SpectrumResult:
    """
    All positive-energy modes of the flux-balanced relation ``V(mu, branch)`` in a window.

    Samples are uniform in ``k`` with ``dk = 0.1 pi / L``, so consecutive
    energies differ by at most ``0.1 hbar c pi / L``. Each root is refined
    with Brent's method and the assembled stationary mode is checked for
    wall-flux equality and the endpoint relations.

    Args:
        mu: Angle in (0, pi)
        branch: Upper (antiperiodic limit) or lower (periodic limit)
        e_window: ``(E_lo, E_hi)`` with ``E_hi >= mc^2``
        grid: Grid used to assemble the modes
        units: Physical constants
        max_workers: Parallel root refinements

    Returns:
        Modes sorted by energy; empty if no sign change lies in the window
    """
    _validate_mu(mu)
    e_lo, e_hi = (float(v) for v in e_window)
    if not e_hi > e_lo:
        raise InvalidParameterError("energy window must satisfy E_lo < E_hi", window=(e_lo, e_hi))
    rest = units.rest_energy
    if e_hi < rest:
        raise EvanescentRegimeError("energy window lies below the rest energy", window=(e_lo, e_hi))
    e_lo = max(e_lo, rest)

    length = grid.length
    k_lo, k_hi = wavenumber(e_lo, units), wavenumber(e_hi, units)
    dk = BRACKET_FRACTION * math.pi / length
    samples = np.arange(k_lo, k_hi + dk, dk)
    samples[-1] = min(samples[-1], k_hi)
    samples = np.unique(np.append(samples, k_hi))
    values = np.array([characteristic(branch, k, length) for k in samples])

    exact = [float(samples[i]) for i in range(len(samples)) if values[i] == 0.0]
    brackets = [(float(samples[i]), float(samples[i + 1])) for i in range(len(samples) - 1)
                if values[i] != 0.0 and values[i + 1] != 0.0 and values[i] * values[i + 1] < 0]

    refined = run_indexed(lambda br: _refine_root(branch, br[0], br[1], length), brackets,
                          max_workers=max_workers, label="quantization roots")
    roots = sorted(exact + list(refined))

    transfer = TransferMatrixV.flux_balanced(mu, branch)
    entries = []
    for idx, k in enumerate(roots):
        energy = float(units.energy(k))
        residual = 0.0 if k == 0.0 else abs(quantization_residual(mu, branch, energy, grid, units))
        state, _, derivative = stationary_mode(k, energy, grid, units)
        domain = max(hamiltonian_domain_check(state, transfer, derivative))
        entries.append(SpectrumEntry(idx, float(k), energy, -energy, residual,
                                     _mode_flux_residual(k, energy, grid, units, transfer.matrix), float(domain)))

    logger.info(f"Found {len(entries)} modes for mu={mu:.6g} ({branch.value})",
                data={'window': [e_lo, e_hi], 'brackets': len(brackets)})
    return SpectrumResult(entries, label=f"FluxBalanced(mu={mu:.12g}, {branch.value})", mu=mu, branch=branch,
                          notes=["spectrum values are computed here; none are tabulated in the derivation"])
