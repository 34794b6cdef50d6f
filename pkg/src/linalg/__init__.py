"""
Linear Algebra Package

2x2 complex value types and Pauli constants.
"""

from .pauli import (
    Complex2x2,
    Complex2Vector,
    IDENTITY,
    TAU1,
    TAU2,
    TAU3,
    W,
    adjoint,
    apply,
    det,
    is_symmetric,
    is_unitary,
    mat_mul,
    max_abs_diff,
    tau3_pairing,
    transpose,
)

__all__ = [
    'Complex2x2',
    'Complex2Vector',
    'IDENTITY',
    'TAU1',
    'TAU2',
    'TAU3',
    'W',
    'adjoint',
    'apply',
    'det',
    'is_symmetric',
    'is_unitary',
    'mat_mul',
    'max_abs_diff',
    'tau3_pairing',
    'transpose',
]
