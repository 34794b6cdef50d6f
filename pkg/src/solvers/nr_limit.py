"""
Nonrelativistic-limit scaling of the Majorana wave equations for phi1.

For a travelling mode ``phi = u cos(kx - omega t)`` (``u = 1`` plus, ``u = i``
minus) the slow envelope is ``(phi1)_NR = e^{i mc^2 t / hbar} phi1`` and

    X = e^{-i mc^2 t / hbar} (-i hbar d_t - hbar^2 / 2m d_xx) (phi1)_NR

must have vanishing real part (plus) or imaginary part (minus) up to a
correction of relative order ``(hbar k / mc)^2``. ``X`` itself stays of the
size of the kinetic term, so the bare Schrodinger operator does not annihilate
the envelope.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.processors.batch_processor import run_indexed
from src.states.fv_states import MajoranaSign
from src.states.grid import UnitsConfig
from src.utils.error_handler import InsufficientDataError, OutOfRangeError
from src.utils.logger import get_global_logger

logger = get_global_logger()

NR_MAX_RATIO = 0.1
SPACE_SAMPLES = 64
TIME_SAMPLES = 16


@dataclass(frozen=True)
class NrResidual:
    k: float
    ratio: float
    sign: MajoranaSign
    bracket_residual: float
    schrodinger_residual: float
    complement_residual: float


@dataclass(frozen=True)
class NrLimitReport:
    rows: List[NrResidual]
    slope_plus: float
    slope_minus: float

    def to_dict(self) -> dict:
        return {
            'slope_plus': self.slope_plus,
            'slope_minus': self.slope_minus,
            'rows': [
                {'k': r.k, 'ratio': r.ratio, 'sign': r.sign.value,
                 'bracket_residual': r.bracket_residual, 'schrodinger_residual': r.schrodinger_residual,
                 'complement_residual': r.complement_residual}
                for r in self.rows
            ],
        }


def nr_residuals(k: float, units: UnitsConfig, sign) -> NrResidual:
    """
    Evaluate both residuals for one mode on a space-time sample lattice.

    Derivatives are exact; the bracket residual is normalised by the rest
    energy term ``max |mc^2 phi1|`` and the Schrodinger residual by the kinetic
    term ``max |(hbar^2 / 2m) d_xx (phi1)_NR|`` (zero for the rest mode).

    The complementary projection is normalised like the bracket residual.
    Both are of order ``(hbar k / mc)^2`` with ratio ``omega / omega0``, so a
    fitted slope of 2 confirms the order of the correction; it does not single
    out which projection carries the Majorana equation.
    """
    sign = MajoranaSign.parse(sign)
    unit = 1j if sign is MajoranaSign.MINUS else 1.0
    hbar, m, omega0 = units.hbar, units.m, units.omega0
    omega = math.sqrt(omega0 ** 2 + (units.c * k) ** 2)

    wavelength = 2 * math.pi / k if k > 0 else 1.0
    period = 2 * math.pi / omega
    x = np.linspace(0.0, wavelength, SPACE_SAMPLES, endpoint=False)
    t = np.linspace(0.0, period, TIME_SAMPLES, endpoint=False)
    xx, tt = np.meshgrid(x, t)
    theta = k * xx - omega * tt

    # phi and its derivatives up to the orders entering phi1, d_t phi1 and d_xx phi1
    phi = unit * np.cos(theta)
    phi_t = unit * omega * np.sin(theta)
    phi_tt = -omega ** 2 * phi
    phi_xx = -k ** 2 * phi
    phi_txx = -k ** 2 * phi_t

    phi1 = 0.5 * (phi + 1j * phi_t / omega0)
    phi1_t = 0.5 * (phi_t + 1j * phi_tt / omega0)
    phi1_xx = 0.5 * (phi_xx + 1j * phi_txx / omega0)

    # e^{-i w0 t}(-i hbar d_t)(e^{i w0 t} phi1) = hbar w0 phi1 - i hbar d_t phi1
    x_term = hbar * omega0 * phi1 - 1j * hbar * phi1_t - hbar ** 2 / (2 * m) * phi1_xx
    projected, complement = (x_term.real, x_term.imag) if sign is MajoranaSign.PLUS else (x_term.imag, x_term.real)

    rest_scale = units.rest_energy * float(np.max(np.abs(phi1)))
    kinetic_scale = hbar ** 2 / (2 * m) * float(np.max(np.abs(phi1_xx)))
    bracket = float(np.max(np.abs(projected))) / rest_scale
    other = float(np.max(np.abs(complement))) / rest_scale
    schrodinger = float(np.max(np.abs(x_term))) / kinetic_scale if kinetic_scale > 0 else 0.0
    return NrResidual(k, hbar * k / (m * units.c), sign, bracket, schrodinger, other)


def _slope(rows: Sequence[NrResidual]) -> float:
    ratios = np.log([r.ratio for r in rows])
    residuals = np.log([r.bracket_residual for r in rows])
    slope, _ = np.polyfit(ratios, residuals, 1)
    return float(slope)


def nr_limit_experiment(k_list: Sequence[float], units: Optional[UnitsConfig] = None,
                        max_workers: int = 1) -> NrLimitReport:
    """
    Fit the log-log slope of the bracket residual against ``hbar k / mc``.

    Raises:
        InsufficientDataError: If fewer than three wavenumbers are given
        OutOfRangeError: If a wavenumber is not positive or exceeds ``0.1 mc / hbar``
    """
    units = units or UnitsConfig()
    ks = [float(k) for k in k_list]
    if len(ks) < 3:
        raise InsufficientDataError("the scaling fit needs at least 3 wavenumbers", count=len(ks))
    for k in ks:
        if not (0 < k <= NR_MAX_RATIO * units.compton_k):
            raise OutOfRangeError("k must satisfy 0 < hbar k <= 0.1 mc", k=k, limit=NR_MAX_RATIO * units.compton_k)

    jobs = [(k, sign) for sign in (MajoranaSign.PLUS, MajoranaSign.MINUS) for k in ks]
    rows = run_indexed(lambda job: nr_residuals(job[0], units, job[1]), jobs,
                       max_workers=max_workers, label="nr residuals")
    plus = [r for r in rows if r.sign is MajoranaSign.PLUS]
    minus = [r for r in rows if r.sign is MajoranaSign.MINUS]
    report = NrLimitReport(rows, _slope(plus), _slope(minus))
    logger.info("Nonrelativistic scaling fitted", data={'slope_plus': report.slope_plus,
                                                        'slope_minus': report.slope_minus})
    return report
