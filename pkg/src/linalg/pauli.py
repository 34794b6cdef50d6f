"""
Two-component complex algebra.

Value types for 2x2 complex matrices and complex 2-vectors, the Pauli
constants and the predicates the boundary-condition solvers are written in.
All norms used by the predicates are max-absolute-entry norms.
"""

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

Number = Union[complex, float, int]


@dataclass(frozen=True)
class Complex2x2:
    """Immutable 2x2 complex matrix ``[[a11, a12], [a21, a22]]``."""

    a11: complex
    a12: complex
    a21: complex
    a22: complex

    def __post_init__(self):
        for name in ('a11', 'a12', 'a21', 'a22'):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @classmethod
    def from_array(cls, array: Iterable) -> 'Complex2x2':
        m = np.asarray(array, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 array, got shape {m.shape}")
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def array(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]], dtype=complex)

    def __matmul__(self, other):
        if isinstance(other, Complex2x2):
            return mat_mul(self, other)
        if isinstance(other, Complex2Vector):
            return apply(self, other)
        return NotImplemented

    def __add__(self, other: 'Complex2x2') -> 'Complex2x2':
        return Complex2x2.from_array(self.array + other.array)

    def __sub__(self, other: 'Complex2x2') -> 'Complex2x2':
        return Complex2x2.from_array(self.array - other.array)

    def __neg__(self) -> 'Complex2x2':
        return Complex2x2(-self.a11, -self.a12, -self.a21, -self.a22)

    def scale(self, factor: Number) -> 'Complex2x2':
        return Complex2x2.from_array(complex(factor) * self.array)

    def __rmul__(self, factor: Number) -> 'Complex2x2':
        return self.scale(factor)


@dataclass(frozen=True)
class Complex2Vector:
    """Immutable complex 2-vector (two-component boundary data)."""

    v1: complex
    v2: complex

    def __post_init__(self):
        object.__setattr__(self, 'v1', complex(self.v1))
        object.__setattr__(self, 'v2', complex(self.v2))

    @classmethod
    def from_array(cls, array: Iterable) -> 'Complex2Vector':
        v = np.asarray(array, dtype=complex).reshape(-1)
        if v.shape != (2,):
            raise ValueError(f"expected a 2-vector, got shape {v.shape}")
        return cls(v[0], v[1])

    @property
    def array(self) -> np.ndarray:
        return np.array([self.v1, self.v2], dtype=complex)


IDENTITY = Complex2x2(1, 0, 0, 1)
TAU1 = Complex2x2(0, 1, 1, 0)
TAU2 = Complex2x2(0, -1j, 1j, 0)
TAU3 = Complex2x2(1, 0, 0, -1)
# tau3 + i tau2, the FV kinetic-term matrix
W = Complex2x2(1, 1, -1, -1)


def mat_mul(a: Complex2x2, b: Complex2x2) -> Complex2x2:
    return Complex2x2(
        a.a11 * b.a11 + a.a12 * b.a21,
        a.a11 * b.a12 + a.a12 * b.a22,
        a.a21 * b.a11 + a.a22 * b.a21,
        a.a21 * b.a12 + a.a22 * b.a22,
    )


def apply(m: Complex2x2, v: Complex2Vector) -> Complex2Vector:
    return Complex2Vector(m.a11 * v.v1 + m.a12 * v.v2, m.a21 * v.v1 + m.a22 * v.v2)


def adjoint(m: Complex2x2) -> Complex2x2:
    return Complex2x2(m.a11.conjugate(), m.a21.conjugate(), m.a12.conjugate(), m.a22.conjugate())


def transpose(m: Complex2x2) -> Complex2x2:
    return Complex2x2(m.a11, m.a21, m.a12, m.a22)


def det(m: Complex2x2) -> complex:
    return m.a11 * m.a22 - m.a12 * m.a21


def trace(m: Complex2x2) -> complex:
    return m.a11 + m.a22


def max_abs(m: Complex2x2) -> float:
    return max(abs(m.a11), abs(m.a12), abs(m.a21), abs(m.a22))


def max_abs_diff(a: Complex2x2, b: Complex2x2) -> float:
    return max_abs(a - b)


def is_unitary(m: Complex2x2, tol: float = 1e-12) -> bool:
    """True iff ``||M^dagger M - I||_max <= tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    return max_abs_diff(mat_mul(adjoint(m), m), IDENTITY) <= tol


def is_symmetric(m: Complex2x2, tol: float = 1e-12) -> bool:
    """True iff ``||M - M^T||_max <= tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    return abs(m.a12 - m.a21) <= tol


def tau3_pairing(u: Complex2Vector, v: Complex2Vector) -> complex:
    """Pointwise indefinite pairing ``u^dagger tau3 v``."""
    return u.v1.conjugate() * v.v1 - u.v2.conjugate() * v.v2
