"""
Classification of boundary relations.

Every accepted representation (transfer matrix, raw 2x2 matrix, N-matrix
parameters, separated-branch parameters or a KFG-level boundary relation)
is routed to the same verdict so that classification is representation
independent.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from src.boundary.bc_families import (
    Branch,
    M1_EPS,
    NMatrixParams,
    SeparatedBcParams,
    TransferMatrixV,
    flux_balance_residual,
    n_to_transfer,
)
from src.boundary.membership import BoundaryRelation, GeneralKfgBcParams, kfg_family_membership
from src.linalg.pauli import Complex2x2, IDENTITY, TAU1, max_abs_diff
from src.utils.logger import get_global_logger

logger = get_global_logger()

CLASSIFY_TOL = 1e-10


class BcKind(Enum):
    PERIODIC = "Periodic"
    ANTIPERIODIC = "Antiperiodic"
    FLUX_BALANCED = "FluxBalanced"
    CONFINING_SEPARATED = "ConfiningSeparated"
    GENERAL_PSEUDO_SELF_ADJOINT = "GeneralPseudoSelfAdjoint"
    NOT_PSEUDO_SELF_ADJOINT = "NotPseudoSelfAdjoint"


@dataclass(frozen=True)
class BcClass:
    kind: BcKind
    mu: Optional[float] = None
    branch: Optional[Branch] = None
    m0_sign: Optional[int] = None
    membership: Optional[GeneralKfgBcParams] = None

    @classmethod
    def periodic(cls) -> 'BcClass':
        return cls(BcKind.PERIODIC, mu=math.pi / 2, branch=Branch.LOWER)

    @classmethod
    def antiperiodic(cls) -> 'BcClass':
        return cls(BcKind.ANTIPERIODIC, mu=math.pi / 2, branch=Branch.UPPER)

    @property
    def twist(self) -> float:
        """Sign ``s`` of ``Phi(b) = s Phi(a)`` for the periodic/antiperiodic classes."""
        if self.kind is BcKind.PERIODIC:
            return 1.0
        if self.kind is BcKind.ANTIPERIODIC:
            return -1.0
        raise ValueError(f"{self.kind.value} has no wraparound sign")

    @property
    def is_twisted(self) -> bool:
        return self.kind in (BcKind.PERIODIC, BcKind.ANTIPERIODIC)

    def same_class(self, other: 'BcClass', tol: float = 1e-9) -> bool:
        """Equality of verdicts ignoring membership detail."""
        if self.kind is not other.kind or self.branch != other.branch or self.m0_sign != other.m0_sign:
            return False
        if self.kind is BcKind.FLUX_BALANCED:
            return abs(self.mu - other.mu) <= tol
        return True

    def label(self) -> str:
        if self.kind is BcKind.FLUX_BALANCED:
            return f"FluxBalanced(mu={self.mu:.12g}, {self.branch.value})"
        if self.kind is BcKind.CONFINING_SEPARATED:
            return f"ConfiningSeparated(m0_sign={self.m0_sign:+d})"
        return self.kind.value

    def to_dict(self) -> dict:
        return {
            'class': self.kind.value,
            'label': self.label(),
            'mu': self.mu,
            'branch': self.branch.value if self.branch else None,
            'm0_sign': self.m0_sign,
            'member': self.membership is not None,
            'membership': self.membership.to_dict() if self.membership else None,
        }


def fit_flux_balanced(matrix: Complex2x2, tol: float = CLASSIFY_TOL):
    """Recover ``(mu, branch)`` if ``matrix`` is a flux-balanced transfer matrix, else None."""
    s_est = 0.5 * (matrix.a11 + matrix.a22)
    sign = 1.0 if s_est.real >= 0 else -1.0
    if abs(s_est - sign) > tol:
        return None
    cot_mu = matrix.a22.imag / sign
    mu = math.pi / 2 - math.atan(cot_mu)
    branch = Branch.from_sign(sign)
    candidate = TransferMatrixV.flux_balanced(mu, branch)
    if max_abs_diff(candidate.matrix, matrix) > tol * max(1.0, abs(cot_mu)):
        return None
    return mu, branch


def transfer_phi_relation(matrix: Complex2x2, tol: float = CLASSIFY_TOL) -> Optional[BoundaryRelation]:
    """KFG-level relation implied by ``Phi(b) = V Phi(a)`` when ``(1, 1) V = s (1, 1)``."""
    row = np.array([matrix.a11 + matrix.a21, matrix.a12 + matrix.a22])
    if abs(row[0] - row[1]) > tol:
        return None
    s = row[0]
    if abs(s.imag) > tol or abs(abs(s.real) - 1.0) > tol:
        return None
    return BoundaryRelation.twisted(1.0 if s.real > 0 else -1.0)


def _classify_matrix(matrix: Complex2x2, length: float) -> BcClass:
    if max_abs_diff(matrix, IDENTITY) <= CLASSIFY_TOL:
        return BcClass(BcKind.PERIODIC, mu=math.pi / 2, branch=Branch.LOWER,
                       membership=kfg_family_membership(BoundaryRelation.periodic().subspace(), length))
    if max_abs_diff(matrix, -IDENTITY) <= CLASSIFY_TOL:
        return BcClass(BcKind.ANTIPERIODIC, mu=math.pi / 2, branch=Branch.UPPER,
                       membership=kfg_family_membership(BoundaryRelation.antiperiodic().subspace(), length))

    if flux_balance_residual(TransferMatrixV(matrix)) > CLASSIFY_TOL:
        return BcClass(BcKind.NOT_PSEUDO_SELF_ADJOINT)
    fit = fit_flux_balanced(matrix)
    if fit is None:
        return BcClass(BcKind.NOT_PSEUDO_SELF_ADJOINT)
    mu, branch = fit
    relation = transfer_phi_relation(matrix)
    membership = kfg_family_membership(relation.subspace(), length) if relation is not None else None
    return BcClass(BcKind.FLUX_BALANCED, mu=mu, branch=branch, membership=membership)


def _classify_relation(relation: BoundaryRelation, length: float) -> BcClass:
    if relation.rank == 4:
        # both walls fully pinned: phi or phi_dot
        return BcClass(BcKind.CONFINING_SEPARATED, m0_sign=-1 if relation.acts_on == "phi" else 1)
    if relation.acts_on != "phi":
        return BcClass(BcKind.NOT_PSEUDO_SELF_ADJOINT)

    membership = kfg_family_membership(relation.subspace(), length)
    if membership is None:
        return BcClass(BcKind.NOT_PSEUDO_SELF_ADJOINT)
    u = Complex2x2.from_array(membership.u_matrix)
    if max_abs_diff(u, TAU1) <= CLASSIFY_TOL:
        return BcClass(BcKind.PERIODIC, mu=math.pi / 2, branch=Branch.LOWER, membership=membership)
    if max_abs_diff(u, -TAU1) <= CLASSIFY_TOL:
        return BcClass(BcKind.ANTIPERIODIC, mu=math.pi / 2, branch=Branch.UPPER, membership=membership)
    return BcClass(BcKind.GENERAL_PSEUDO_SELF_ADJOINT, membership=membership)


RelationInput = Union[TransferMatrixV, Complex2x2, NMatrixParams, SeparatedBcParams, BoundaryRelation]


def classify_bc(relation: RelationInput, length: float = 1.0) -> BcClass:
    """
    Classify a boundary relation.

    Args:
        relation: Any supported representation of the boundary condition
        length: Interval length, used as the scale of the membership search

    Returns:
        The boundary class; membership detail is attached when the relation
        reduces to a KFG-level condition inside the pseudo self-adjoint family
    """
    if isinstance(relation, SeparatedBcParams):
        verdict = BcClass(BcKind.CONFINING_SEPARATED, m0_sign=relation.m0_sign)
    elif isinstance(relation, NMatrixParams):
        if abs(relation.m1) <= M1_EPS:
            confining = (abs(relation.m3) <= CLASSIFY_TOL and abs(relation.mu) <= CLASSIFY_TOL
                         and abs(abs(relation.m0) - 1.0) <= CLASSIFY_TOL)
            verdict = (BcClass(BcKind.CONFINING_SEPARATED, m0_sign=1 if relation.m0 > 0 else -1)
                       if confining else BcClass(BcKind.NOT_PSEUDO_SELF_ADJOINT))
        else:
            verdict = _classify_matrix(n_to_transfer(relation).matrix, length)
    elif isinstance(relation, TransferMatrixV):
        verdict = _classify_matrix(relation.matrix, length)
    elif isinstance(relation, Complex2x2):
        verdict = _classify_matrix(relation, length)
    elif isinstance(relation, BoundaryRelation):
        verdict = _classify_relation(relation, length)
    else:
        raise TypeError(f"unsupported boundary relation type {type(relation).__name__}")

    logger.debug("Classified boundary relation", data=verdict.to_dict())
    return verdict
