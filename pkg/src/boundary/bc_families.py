"""
Boundary-condition families for the free FV Hamiltonian on [a, b].

Parameterizations:
    * ``NMatrixParams``: the unitary symmetric matrix N relating
      ``[phi1(b), phi2(a)]`` to ``[phi2(b), phi1(a)]`` (and likewise for x-derivatives)
    * ``TransferMatrixV``: the same relations rewritten as ``Phi(b) = V Phi(a)``,
      ``Phi'(b) = V Phi'(a)``; exists when ``m1 != 0``
    * ``SeparatedBcParams``: the surviving ``m1 = 0`` members

The constraint solvers reduce the N family first by energy-current balance
(``j_en(b) = j_en(a)``) and then by parity invariance, ending at the periodic
and antiperiodic conditions.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, least_squares

from src.linalg.pauli import (
    Complex2x2,
    IDENTITY,
    W,
    adjoint,
    det,
    is_symmetric,
    is_unitary,
    mat_mul,
    max_abs_diff,
)
from src.boundary.membership import BoundaryRelation, GeneralKfgBcParams, kfg_family_membership
from src.processors.batch_processor import run_indexed
from src.utils.error_handler import (
    InternalConsistencyError,
    InvalidParameterError,
    OutOfRangeError,
    SeparatedBranchSignal,
)
from src.utils.logger import get_global_logger

logger = get_global_logger()

NORM_TOL = 1e-9
M1_EPS = 1e-12
MU_MARGIN = 1e-12
WALL_CURRENT_TOL = 1e-12


class Branch(Enum):
    """The two-valued sign of the flux-balanced family.

    ``UPPER`` has ``m1 = -sin(mu)`` and collapses to ``V = -I`` at ``mu = pi/2``;
    ``LOWER`` has ``m1 = +sin(mu)`` and collapses to ``V = +I``.
    """

    UPPER = "upper"
    LOWER = "lower"

    @property
    def sign(self) -> int:
        return -1 if self is Branch.UPPER else 1

    @classmethod
    def from_sign(cls, sign: float) -> 'Branch':
        return cls.UPPER if sign < 0 else cls.LOWER


@dataclass(frozen=True)
class NMatrixParams:
    mu: float
    m0: float
    m1: float
    m3: float

    @property
    def norm_residual(self) -> float:
        return abs(self.m0 ** 2 + self.m1 ** 2 + self.m3 ** 2 - 1.0)

    @classmethod
    def random(cls, rng: np.random.Generator) -> 'NMatrixParams':
        """Uniform unit 3-vector and mu in [0, pi)."""
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        return cls(mu=float(rng.uniform(0.0, math.pi)), m0=float(v[0]), m1=float(v[1]), m3=float(v[2]))


@dataclass(frozen=True)
class TransferMatrixV:
    """Transfer matrix with optional provenance (mu, branch) for flux-balanced members."""

    matrix: Complex2x2
    mu: Optional[float] = None
    branch: Optional[Branch] = None

    @classmethod
    def flux_balanced(cls, mu: float, branch: Branch) -> 'TransferMatrixV':
        _require_open_mu(mu)
        s, c = math.sin(mu), math.cos(mu)
        e = complex(math.cos(mu), math.sin(mu))
        pref = branch.sign * 1j / s
        m = Complex2x2(-e, -c, c, e.conjugate()).scale(pref)
        return cls(matrix=m, mu=mu, branch=branch)

    @property
    def det(self) -> complex:
        return det(self.matrix)


@dataclass(frozen=True)
class SeparatedBcParams:
    m0_sign: int

    def __post_init__(self):
        if self.m0_sign not in (1, -1):
            raise InvalidParameterError("m0_sign must be +1 or -1", m0_sign=self.m0_sign)

    @property
    def mu(self) -> float:
        return 0.0

    @property
    def m3(self) -> float:
        return 0.0

    @property
    def m0(self) -> float:
        return float(self.m0_sign)


class FluxSolution(NamedTuple):
    params: NMatrixParams
    transfer: TransferMatrixV
    residual: float
    norm_identity_residual: float
    numeric_deviation: float


@dataclass
class SeparatedBranch:
    params: SeparatedBcParams
    v1: Complex2x2
    v2: Complex2x2
    kfg_relation: BoundaryRelation
    description: str
    wall_current_factors: Tuple[float, float]
    wall_current_max: float
    membership: Optional[GeneralKfgBcParams] = None


@dataclass
class SeparatedBranchAnalysis:
    branches: Tuple[SeparatedBranch, SeparatedBranch]
    impenetrable: bool
    constraint_residual: float

    @property
    def params(self) -> Tuple[SeparatedBcParams, SeparatedBcParams]:
        return tuple(b.params for b in self.branches)

    @property
    def kfg_bc_descriptions(self) -> List[str]:
        return [b.description for b in self.branches]


@dataclass
class ParitySolution:
    mu: float
    solutions: List[TransferMatrixV] = field(default_factory=list)
    equation_residual: float = 0.0
    roots_found: int = 0


def _require_open_mu(mu: float) -> None:
    if not (MU_MARGIN < mu < math.pi - MU_MARGIN):
        raise OutOfRangeError(f"mu={mu!r} must lie in the open interval (0, pi)", mu=mu)


def build_N(params: NMatrixParams) -> Complex2x2:
    """Unitary symmetric boundary matrix ``e^{i mu}[[m0 - i m3, -i m1], [-i m1, m0 + i m3]]``."""
    if params.norm_residual > NORM_TOL:
        raise InvalidParameterError(
            f"(m0, m1, m3) must have unit norm, deviation {params.norm_residual:.3e}",
            params=params,
        )
    phase = complex(math.cos(params.mu), math.sin(params.mu))
    return Complex2x2(
        phase * complex(params.m0, -params.m3),
        phase * complex(0.0, -params.m1),
        phase * complex(0.0, -params.m1),
        phase * complex(params.m0, params.m3),
    )


def n_to_transfer(params: NMatrixParams, require_unit_norm: bool = True) -> TransferMatrixV:
    """Rewrite the N relations as ``Phi(b) = V Phi(a)``; requires ``m1 != 0``.

    With ``require_unit_norm=False`` the rewrite is applied to non-unitary
    parameter sets too, which is how broken relations are produced for
    negative controls.
    """
    if require_unit_norm and params.norm_residual > NORM_TOL:
        raise InvalidParameterError("(m0, m1, m3) must have unit norm", params=params)
    if abs(params.m1) <= M1_EPS:
        raise SeparatedBranchSignal(
            "m1 = 0: no transfer form exists; use separated_branch_analysis", params=params
        )
    e = complex(math.cos(params.mu), math.sin(params.mu))
    pref = 1j / params.m1
    m = Complex2x2(-e, complex(params.m0, -params.m3), -complex(params.m0, params.m3), e.conjugate()).scale(pref)
    return TransferMatrixV(matrix=m)


_WDW = mat_mul(adjoint(W), W)


def flux_balance_residual(v: TransferMatrixV) -> float:
    """``||V^dagger W^dagger W V - W^dagger W||_max`` with ``W = tau3 + i tau2``."""
    lhs = mat_mul(adjoint(v.matrix), mat_mul(_WDW, v.matrix))
    return max_abs_diff(lhs, _WDW)


def flux_balance_equations(params: NMatrixParams) -> np.ndarray:
    """Residuals of the three scalar flux-balance equations (complex array of length 3)."""
    mu, m0, m1, m3 = params.mu, params.m0, params.m1, params.m3
    e = complex(math.cos(mu), math.sin(mu))
    return np.array([
        1.0 + m0 * math.cos(mu) + m3 * math.sin(mu) - m1 ** 2,
        (e + complex(m0, m3)) ** 2 + m1 ** 2,
        (e.conjugate() + complex(m0, -m3)) ** 2 + m1 ** 2,
    ], dtype=complex)


def _numeric_flux_root(mu: float, branch: Branch) -> np.ndarray:
    """Residual minimization of the flux-balance equations over (m0, m1, m3)."""

    def residuals(x):
        p = NMatrixParams(mu, x[0], x[1], x[2])
        eq = flux_balance_equations(p)
        return np.concatenate([eq.real, eq.imag, [x[0] ** 2 + x[1] ** 2 + x[2] ** 2 - 1.0]])

    grid = np.linspace(-0.95, 0.95, 9)
    starts = []
    for m0 in grid:
        for m3 in grid:
            rest = 1.0 - m0 ** 2 - m3 ** 2
            if rest < 0.01:
                continue
            x0 = np.array([m0, branch.sign * math.sqrt(rest), m3])
            starts.append((float(np.sum(residuals(x0) ** 2)), x0))
    starts.sort(key=lambda item: item[0])

    # The m1 = 0 point (-cos mu, 0, -sin mu) also solves the equations; it is excluded.
    best = None
    for _, x0 in starts[:8]:
        sol = least_squares(residuals, x0, xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=200)
        if np.sign(sol.x[1]) != branch.sign or abs(sol.x[1]) <= 1e-6 or sol.cost > 1e-20:
            continue
        if best is None or abs(sol.x[1]) > abs(best.x[1]):
            best = sol
    if best is None:
        raise InternalConsistencyError("numeric flux-balance solve did not stay on the requested branch",
                                       mu=mu, branch=branch.value)
    return best.x


def _solve_flux_single(mu: float) -> List[FluxSolution]:
    _require_open_mu(mu)
    out = []
    for branch in (Branch.UPPER, Branch.LOWER):
        params = NMatrixParams(mu=mu, m0=-math.cos(mu), m1=branch.sign * math.sin(mu), m3=0.0)
        transfer = n_to_transfer(params)
        transfer = TransferMatrixV(matrix=transfer.matrix, mu=mu, branch=branch)
        closed = TransferMatrixV.flux_balanced(mu, branch)
        if max_abs_diff(closed.matrix, transfer.matrix) > 1e-12:
            raise InternalConsistencyError("closed-form V disagrees with the N rewrite", mu=mu)

        numeric = _numeric_flux_root(mu, branch)
        deviation = float(np.max(np.abs(numeric - np.array([params.m0, params.m1, params.m3]))))
        out.append(FluxSolution(
            params=params,
            transfer=transfer,
            residual=flux_balance_residual(transfer),
            norm_identity_residual=abs((-math.cos(mu)) ** 2 + (branch.sign * math.sin(mu)) ** 2 - 1.0),
            numeric_deviation=deviation,
        ))
    return out


def solve_flux_constraint(mu_samples: Sequence[float], max_workers: int = 1,
                          numeric_tol: float = 1e-8) -> List[FluxSolution]:
    """
    Both flux-balanced branches for every mu sample.

    Each closed-form solution ``m3 = 0, m0 = -cos mu, m1 = -+ sin mu`` is
    cross-checked against an independent residual minimization; a deviation
    above ``numeric_tol`` is an internal-consistency failure.

    Returns:
        Flattened list ordered by sample, then (upper, lower).
    """
    for mu in mu_samples:
        _require_open_mu(mu)
    with logger.timed_operation('solve_flux_constraint'):
        nested = run_indexed(_solve_flux_single, list(mu_samples), max_workers=max_workers,
                             label='flux constraint scan')
    solutions = [sol for group in nested for sol in group]
    worst = max((s.numeric_deviation for s in solutions), default=0.0)
    if worst > numeric_tol:
        raise InternalConsistencyError(
            f"numeric flux-balance root deviates from the closed form by {worst:.3e}", tol=numeric_tol
        )
    logger.debug("Flux constraint solved", data={'samples': len(mu_samples), 'numeric_deviation': worst})
    return solutions


def parity_constraint_equations(mu: float) -> np.ndarray:
    """Residuals of the three scalar conditions equivalent to ``V(mu)^2 = I``."""
    s, c = math.sin(mu), math.cos(mu)
    e2 = complex(math.cos(2 * mu), math.sin(2 * mu))
    return np.array([s * c, e2 - c ** 2 + s ** 2, e2.conjugate() - c ** 2 + s ** 2], dtype=complex)


def parity_residual(v: TransferMatrixV) -> float:
    """``||V^2 - I||_max``."""
    return max_abs_diff(mat_mul(v.matrix, v.matrix), IDENTITY)


def solve_parity_constraint(samples: int = 256) -> ParitySolution:
    """
    Scan mu over (0, pi) for simultaneous roots of the parity conditions.

    The first condition is bracketed on the sample grid and refined with
    Brent's method; each root is kept only if the remaining two conditions
    vanish there as well.
    """
    grid = np.linspace(1e-6, math.pi - 1e-6, samples)
    values = np.array([parity_constraint_equations(mu)[0].real for mu in grid])

    roots = []
    for i in range(len(grid) - 1):
        if values[i] == 0.0:
            roots.append(float(grid[i]))
        elif values[i] * values[i + 1] < 0:
            roots.append(brentq(lambda x: parity_constraint_equations(x)[0].real,
                                grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))

    accepted = [mu for mu in roots if np.max(np.abs(parity_constraint_equations(mu))) < 1e-12]
    if len(accepted) != 1:
        raise InternalConsistencyError(f"expected exactly one parity root, found {len(accepted)}",
                                       roots=accepted)
    mu = accepted[0]
    solutions = [TransferMatrixV.flux_balanced(mu, b) for b in (Branch.UPPER, Branch.LOWER)]
    return ParitySolution(
        mu=mu,
        solutions=solutions,
        equation_residual=float(np.max(np.abs(parity_constraint_equations(mu)))),
        roots_found=len(roots),
    )


def separated_matrices(mu: float, m0: float, m3: float) -> Tuple[Complex2x2, Complex2x2]:
    """``(V1, V2)`` with ``V1 Phi(b) = V2 Phi(a)`` for the m1 = 0 family."""
    z = complex(m0, -m3)
    e = complex(math.cos(mu), math.sin(mu))
    return Complex2x2(1, -e * z, 0, 0), Complex2x2(0, 0, 1, -e.conjugate() * z)


def separated_wall_current_factors(mu: float, m0: float, m3: float) -> Tuple[float, float]:
    """Prefactors of ``j_en(b)`` and ``j_en(a)`` in the separated family."""
    base = 1.0 + m0 * math.cos(mu)
    return base + m3 * math.sin(mu), base - m3 * math.sin(mu)


def _wall_energy_current(phi, dphi, phi_dot, dphi_dot):
    # -(hbar^2/2m) prefactor omitted: only vanishing is tested
    return np.conj(dphi) * phi_dot - np.conj(phi) * dphi_dot


def _row_kernel(row: np.ndarray) -> np.ndarray:
    r0, r1 = complex(row[0]), complex(row[1])
    if r0 != 0:
        return np.array([-r1 / r0, 1.0], dtype=complex)
    return np.array([1.0, 0.0], dtype=complex)


def separated_wall_currents(mu: float, m0: float, m3: float, samples: int = 32, seed: int = 0) -> np.ndarray:
    """
    Wall energy currents of random FV wall data admitted by ``V1 Phi(b) = V2 Phi(a)``.

    Values and slopes of ``(phi1, phi2)`` at each wall are drawn from the kernel
    of the constraining row, then mapped to ``phi = phi1 + phi2`` and
    ``phi_dot = -i (phi1 - phi2)`` (rest frequency one). Returns ``|j_en|`` up to
    the ``hbar^2 / 2m`` prefactor as a ``(samples, 2)`` array, b then a.
    """
    v1, v2 = separated_matrices(mu, m0, m3)
    rng = np.random.default_rng(seed)
    out = np.empty((samples, 2))
    for col, row in enumerate((v1.array[0], v2.array[1])):
        amplitudes = rng.normal(size=(2, samples)) + 1j * rng.normal(size=(2, samples))
        comps = _row_kernel(row)[:, None, None] * amplitudes[None, :, :]
        phi = comps[0] + comps[1]
        phi_dot = -1j * (comps[0] - comps[1])
        out[:, col] = np.abs(_wall_energy_current(phi[0], phi[1], phi_dot[0], phi_dot[1]))
    return out


def separated_branch_analysis(samples: int = 32, seed: int = 0) -> SeparatedBranchAnalysis:
    """
    Analyse the ``m1 = 0`` branch.

    Equal wall currents require ``m3 sin(mu) = 0``; the surviving members are
    ``m3 = 0, mu = 0, m0 = +-1``. For ``m0 = +1`` both FV components agree at the
    walls, so the KFG field obeys ``phi_dot = phi_dot' = 0`` there; for ``m0 = -1``
    they are opposite and ``phi = phi' = 0``. Both are confining and neither
    carves the two-dimensional subspace the pseudo self-adjoint KFG family needs.
    """
    branches = []
    impenetrable = True
    constraint_residual = 0.0

    for sign in (1, -1):
        params = SeparatedBcParams(m0_sign=sign)
        v1, v2 = separated_matrices(params.mu, params.m0, params.m3)
        factors = separated_wall_current_factors(params.mu, params.m0, params.m3)
        constraint_residual = max(constraint_residual, abs(factors[0] - factors[1]),
                                  abs(params.m3 * math.sin(params.mu)))

        if sign == 1:
            relation = BoundaryRelation.time_derivative_dirichlet_neumann()
            description = "phi_dot(b) = phi_dot(a) = 0 and phi_dot'(b) = phi_dot'(a) = 0"
        else:
            relation = BoundaryRelation.dirichlet_neumann()
            description = "phi(b) = phi(a) = 0 and phi'(b) = phi'(a) = 0"

        wall_max = float(np.max(separated_wall_currents(params.mu, params.m0, params.m3, samples, seed)))
        impenetrable = impenetrable and wall_max <= WALL_CURRENT_TOL

        membership = kfg_family_membership(relation.subspace())
        branches.append(SeparatedBranch(
            params=params, v1=v1, v2=v2, kfg_relation=relation, description=description,
            wall_current_factors=factors, wall_current_max=wall_max, membership=membership,
        ))

    return SeparatedBranchAnalysis(branches=tuple(branches), impenetrable=impenetrable,
                                   constraint_residual=constraint_residual)


def schrodinger_bc_relation(theta: float) -> Tuple[complex, complex]:
    """Forward and parity-image transfer factors ``e^{i theta}`` and ``e^{-i theta}``.

    The forward condition is ``Phi(b) = e^{i theta} Phi(a)``; its parity image
    reads ``Phi(a) = e^{i theta} Phi(b)``, i.e. ``Phi(b) = e^{-i theta} Phi(a)``.
    """
    forward = complex(math.cos(theta), math.sin(theta))
    return forward, forward.conjugate()


def schrodinger_parity_restriction(samples: int = 720) -> List[float]:
    """Angles in [0, 2 pi) whose forward and parity-image conditions coincide."""
    grid = np.linspace(0.0, 2 * math.pi, samples + 1)

    def mismatch_im(theta):
        fwd, img = schrodinger_bc_relation(theta)
        return (fwd - img).imag

    candidates = set()
    values = np.array([mismatch_im(t) for t in grid])
    for i in range(samples):
        if values[i] == 0.0:
            candidates.add(float(grid[i]))
        elif values[i] * values[i + 1] < 0:
            candidates.add(float(brentq(mismatch_im, grid[i], grid[i + 1], xtol=1e-15)))

    accepted = set()
    for theta in candidates:
        fwd, img = schrodinger_bc_relation(theta)
        if abs(fwd - img) < 1e-9:
            snapped = round(theta / math.pi) * math.pi
            if abs(snapped - theta) > 1e-9:
                raise InternalConsistencyError("parity-consistent angle is not a multiple of pi", theta=theta)
            accepted.add(snapped % (2 * math.pi))
    return sorted(accepted)


def unitary_symmetric_sweep(count: int, seed: int, tol: float = 1e-12) -> Tuple[int, float]:
    """Draw ``count`` random parameter sets; return (failures, worst det deviation)."""
    rng = np.random.default_rng(seed)
    failures = 0
    worst_det = 0.0
    for _ in range(count):
        params = NMatrixParams.random(rng)
        n = build_N(params)
        if not (is_unitary(n, tol) and is_symmetric(n, tol)):
            failures += 1
        expected = complex(math.cos(2 * params.mu), math.sin(2 * params.mu))
        worst_det = max(worst_det, abs(det(n) - expected))
    return failures, worst_det
