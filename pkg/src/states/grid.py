"""
Closed uniform grid, physical units and second-order stencils.

Both endpoints are stored. For periodic (``s = +1``) and antiperiodic
(``s = -1``) fields the last sample is identified with ``s`` times the first,
so the ghost value left of ``a`` is ``s * f[n-2]`` and right of ``b`` is ``s * f[1]``.
Without a wraparound the endpoint rows use one-sided second-order stencils.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid

from src.utils.error_handler import InvalidParameterError

MIN_POINTS = 16


@dataclass(frozen=True)
class UnitsConfig:
    hbar: float = 1.0
    m: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        for name in ('hbar', 'm', 'c'):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidParameterError(f"units.{name} must be strictly positive, got {value!r}")

    @property
    def rest_energy(self) -> float:
        return self.m * self.c ** 2

    @property
    def omega0(self) -> float:
        """Rest frequency ``mc^2 / hbar``."""
        return self.m * self.c ** 2 / self.hbar

    @property
    def compton_k(self) -> float:
        """``mc / hbar``."""
        return self.m * self.c / self.hbar

    def energy(self, k):
        """Positive branch of ``E = sqrt((mc^2)^2 + (hbar c k)^2)``."""
        return np.sqrt(self.rest_energy ** 2 + (self.hbar * self.c * np.asarray(k)) ** 2)


@dataclass(frozen=True)
class Grid:
    a: float
    b: float
    n: int

    def __post_init__(self):
        if not (self.b > self.a):
            raise InvalidParameterError(f"grid requires b > a, got a={self.a}, b={self.b}")
        if int(self.n) != self.n or self.n < MIN_POINTS:
            raise InvalidParameterError(f"grid requires n >= {MIN_POINTS}, got {self.n}")
        object.__setattr__(self, 'n', int(self.n))

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def spacing(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    def refined(self) -> 'Grid':
        """Grid with half the spacing over the same interval."""
        return Grid(self.a, self.b, 2 * (self.n - 1) + 1)

    def integrate(self, values: np.ndarray) -> complex:
        """Trapezoid quadrature over [a, b]."""
        return trapezoid(values, dx=self.spacing)

    def d1(self, values: np.ndarray, twist: Optional[float] = None) -> np.ndarray:
        return first_derivative(values, self.spacing, twist)

    def d2(self, values: np.ndarray, twist: Optional[float] = None) -> np.ndarray:
        return second_derivative(values, self.spacing, twist)


def first_derivative(f: np.ndarray, dx: float, twist: Optional[float] = None) -> np.ndarray:
    """Second-order first derivative along the last axis."""
    f = np.asarray(f)
    out = np.empty_like(f, dtype=np.result_type(f, float))
    out[..., 1:-1] = (f[..., 2:] - f[..., :-2]) / (2 * dx)
    if twist is None:
        out[..., 0] = (-3 * f[..., 0] + 4 * f[..., 1] - f[..., 2]) / (2 * dx)
        out[..., -1] = (3 * f[..., -1] - 4 * f[..., -2] + f[..., -3]) / (2 * dx)
    else:
        out[..., 0] = (f[..., 1] - twist * f[..., -2]) / (2 * dx)
        out[..., -1] = twist * out[..., 0]
    return out


def second_derivative(f: np.ndarray, dx: float, twist: Optional[float] = None) -> np.ndarray:
    """Second-order second derivative along the last axis."""
    f = np.asarray(f)
    out = np.empty_like(f, dtype=np.result_type(f, float))
    out[..., 1:-1] = (f[..., 2:] - 2 * f[..., 1:-1] + f[..., :-2]) / dx ** 2
    if twist is None:
        out[..., 0] = (2 * f[..., 0] - 5 * f[..., 1] + 4 * f[..., 2] - f[..., 3]) / dx ** 2
        out[..., -1] = (2 * f[..., -1] - 5 * f[..., -2] + 4 * f[..., -3] - f[..., -4]) / dx ** 2
    else:
        out[..., 0] = (f[..., 1] - 2 * f[..., 0] + twist * f[..., -2]) / dx ** 2
        out[..., -1] = twist * out[..., 0]
    return out
