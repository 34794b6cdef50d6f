"""
KFG-level boundary relations and membership in the pseudo self-adjoint family.

Boundary data of the one-component field are ordered
``d = (phi(b), phi(a), phi'(b), phi'(a))``. A relation is a set of linear
constraint rows ``R d = 0``; the admissible data form the null space of ``R``.

The pseudo self-adjoint family is parameterized by a length ``lam`` and a
unitary ``U = e^{i theta}[[n0 - i n3, -n2 - i n1], [n2 - i n1, n0 + i n3]]`` via

    [phi(b) - i lam phi'(b), phi(a) + i lam phi'(a)]
        = U [phi(b) + i lam phi'(b), phi(a) - i lam phi'(a)]

and the strictly neutral (Majorana) members have ``n2 = 0``.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import null_space, svd
from scipy.optimize import minimize_scalar

from src.utils.error_handler import InvalidInputError
from src.utils.logger import get_global_logger

logger = get_global_logger()

UNITARY_TOL = 1e-10
RANK_TOL = 1e-10
LAMBDA_SAMPLES = 121


@dataclass(frozen=True)
class GeneralKfgBcParams:
    theta: float
    lam: float
    n0: float
    n1: float
    n2: float
    n3: float
    unitarity_residual: float = 0.0
    reconstruction_residual: float = 0.0

    @property
    def norm_residual(self) -> float:
        return abs(self.n0 ** 2 + self.n1 ** 2 + self.n2 ** 2 + self.n3 ** 2 - 1.0)

    @property
    def u_matrix(self) -> np.ndarray:
        phase = complex(math.cos(self.theta), math.sin(self.theta))
        return phase * np.array([
            [complex(self.n0, -self.n3), complex(-self.n2, -self.n1)],
            [complex(self.n2, -self.n1), complex(self.n0, self.n3)],
        ])

    def to_dict(self) -> dict:
        return {
            'theta': self.theta, 'lambda': self.lam,
            'n0': self.n0, 'n1': self.n1, 'n2': self.n2, 'n3': self.n3,
            'unitarity_residual': self.unitarity_residual,
            'reconstruction_residual': self.reconstruction_residual,
        }


@dataclass(frozen=True)
class BoundaryRelation:
    """Linear constraints on KFG boundary data.

    ``acts_on`` is ``"phi"`` when rows constrain ``(phi(b), phi(a), phi'(b), phi'(a))``
    and ``"phi_dot"`` when they constrain the same data of the time derivative.
    """

    rows: np.ndarray
    acts_on: str = "phi"

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=complex))
        if rows.size == 0:
            rows = np.zeros((0, 4), dtype=complex)
        if rows.ndim != 2 or rows.shape[1] != 4:
            raise InvalidInputError(f"constraint rows must have 4 columns, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise InvalidInputError("constraint rows contain non-finite entries")
        if self.acts_on not in ("phi", "phi_dot"):
            raise InvalidInputError(f"acts_on must be 'phi' or 'phi_dot', got {self.acts_on!r}")
        object.__setattr__(self, 'rows', rows)

    @property
    def rank(self) -> int:
        if self.rows.shape[0] == 0:
            return 0
        s = svd(self.rows, compute_uv=False)
        return int(np.sum(s > RANK_TOL * max(1.0, s[0])))

    def subspace(self) -> np.ndarray:
        """Orthonormal basis (4 x k) of the admissible boundary data."""
        if self.rows.shape[0] == 0:
            return np.eye(4, dtype=complex)
        return null_space(self.rows, rcond=RANK_TOL)

    def residual(self, data: np.ndarray) -> float:
        return float(np.max(np.abs(self.rows @ np.asarray(data, dtype=complex)), initial=0.0))

    @classmethod
    def twisted(cls, sign: float) -> 'BoundaryRelation':
        """``phi(b) = s phi(a)`` and ``phi'(b) = s phi'(a)``."""
        return cls(np.array([[1, -sign, 0, 0], [0, 0, 1, -sign]], dtype=complex))

    @classmethod
    def periodic(cls) -> 'BoundaryRelation':
        return cls.twisted(1.0)

    @classmethod
    def antiperiodic(cls) -> 'BoundaryRelation':
        return cls.twisted(-1.0)

    @classmethod
    def dirichlet(cls) -> 'BoundaryRelation':
        """``phi(a) = phi(b) = 0`` with free derivatives."""
        return cls(np.array([[1, 0, 0, 0], [0, 1, 0, 0]], dtype=complex))

    @classmethod
    def dirichlet_neumann(cls) -> 'BoundaryRelation':
        return cls(np.eye(4, dtype=complex), acts_on="phi")

    @classmethod
    def time_derivative_dirichlet_neumann(cls) -> 'BoundaryRelation':
        return cls(np.eye(4, dtype=complex), acts_on="phi_dot")


def _cayley_pair(lam: float):
    p = np.array([[1, 0, -1j * lam, 0], [0, 1, 0, 1j * lam]], dtype=complex)
    q = np.array([[1, 0, 1j * lam, 0], [0, 1, 0, -1j * lam]], dtype=complex)
    return p, q


def _u_for_lambda(basis: np.ndarray, lam: float) -> Optional[np.ndarray]:
    p, q = _cayley_pair(lam)
    ps, qs = p @ basis, q @ basis
    sv = svd(qs, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= 1e-12 * sv[0]:
        return None
    return ps @ np.linalg.inv(qs)


def _decompose_u(u: np.ndarray):
    """Split ``U`` into ``theta in [0, pi)`` and real (n0, n1, n2, n3)."""
    theta = 0.5 * np.angle(np.linalg.det(u))
    if theta < 0:
        theta += math.pi
    if theta >= math.pi:
        theta -= math.pi
    m = np.exp(-1j * theta) * u
    n0, n3 = m[0, 0].real, -m[0, 0].imag
    n2, n1 = -m[0, 1].real, -m[0, 1].imag
    return float(theta), float(n0), float(n1), float(n2), float(n3)


def _defect(basis: np.ndarray, lam: float) -> float:
    """Unitarity defect plus |n2| for the Cayley map at ``lam``."""
    u = _u_for_lambda(basis, lam)
    if u is None:
        return math.inf
    unitarity = float(np.max(np.abs(u.conj().T @ u - np.eye(2))))
    _, _, _, n2, _ = _decompose_u(u)
    return unitarity + abs(n2)


def _build_params(basis: np.ndarray, lam: float) -> Optional[GeneralKfgBcParams]:
    u = _u_for_lambda(basis, lam)
    if u is None:
        return None
    unitarity = float(np.max(np.abs(u.conj().T @ u - np.eye(2))))
    if unitarity > UNITARY_TOL:
        return None
    theta, n0, n1, n2, n3 = _decompose_u(u)
    if abs(n2) > UNITARY_TOL:
        return None
    params = GeneralKfgBcParams(theta=theta, lam=float(lam), n0=n0, n1=n1, n2=n2, n3=n3,
                                unitarity_residual=unitarity)
    # re-substitute the rebuilt U into the defining relation
    p, q = _cayley_pair(lam)
    recon = float(np.max(np.abs(p @ basis - params.u_matrix @ (q @ basis))))
    if recon > UNITARY_TOL:
        return None
    return GeneralKfgBcParams(theta=theta, lam=float(lam), n0=n0, n1=n1, n2=n2, n3=n3,
                              unitarity_residual=unitarity, reconstruction_residual=recon)


def kfg_family_membership(subspace: np.ndarray, length: float = 1.0) -> Optional[GeneralKfgBcParams]:
    """
    Test whether a boundary-data subspace belongs to the Majorana-restricted family.

    Args:
        subspace: Spanning set as a (4, k) array (columns are data vectors)
        length: Interval length ``b - a``; sets the ``lam`` search scale

    Returns:
        Reconstructed parameters, or None when the subspace is not a member

    Raises:
        InvalidInputError: If the spanning set is malformed
    """
    basis = np.asarray(subspace, dtype=complex)
    if basis.ndim == 1:
        basis = basis.reshape(4, 1)
    if basis.ndim != 2 or basis.shape[0] != 4:
        raise InvalidInputError(f"spanning set must have shape (4, k), got {basis.shape}")
    if not np.all(np.isfinite(basis)):
        raise InvalidInputError("spanning set contains non-finite entries")
    if length <= 0:
        raise InvalidInputError("interval length must be positive", length=length)

    if basis.shape[1] == 0:
        return None
    u_svd, s, _ = svd(basis, full_matrices=False)
    dim = int(np.sum(s > RANK_TOL * max(1.0, s[0] if s.size else 1.0)))
    if dim != 2:
        logger.debug("Membership rejected by dimension", data={'dimension': dim})
        return None
    orth = u_svd[:, :2]

    magnitudes = np.logspace(math.log10(1e-3 * length), math.log10(1e3 * length), LAMBDA_SAMPLES)
    candidates = [0.0] + [float(sign * m) for sign in (1.0, -1.0) for m in magnitudes]
    defects = np.array([_defect(orth, lam) for lam in candidates])

    # Prefer admissible samples nearest lam = +length so reports are stable.
    def preference(idx: int):
        lam = candidates[idx]
        if lam == 0.0:
            return (math.inf, 0)
        return (abs(math.log10(abs(lam) / length)), 0 if lam > 0 else 1)

    admissible = sorted((i for i in range(len(candidates)) if defects[i] <= UNITARY_TOL), key=preference)
    for idx in admissible:
        params = _build_params(orth, candidates[idx])
        if params is not None:
            return params

    log_step = (math.log10(magnitudes[-1]) - math.log10(magnitudes[0])) / (LAMBDA_SAMPLES - 1)
    for idx in np.argsort(defects, kind='stable')[:5]:
        lam = candidates[idx]
        if not np.isfinite(defects[idx]) or lam == 0.0:
            continue
        # bounded refinement in log|lam| between the neighbouring samples
        sign = math.copysign(1.0, lam)
        log_m = math.log10(abs(lam))
        res = minimize_scalar(lambda t: _defect(orth, sign * 10 ** t),
                              bounds=(log_m - log_step, log_m + log_step),
                              method='bounded', options={'xatol': 1e-12})
        params = _build_params(orth, sign * 10 ** res.x)
        if params is not None:
            return params
    logger.debug("Membership rejected: no admissible lambda", data={'best_defect': float(np.min(defects))})
    return None
