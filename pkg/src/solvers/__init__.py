"""
Solvers Package

Stationary spectra, the finite-difference oracle, time evolution and the
nonrelativistic-limit experiment.
"""

from .spectrum import (
    SpectrumEntry,
    SpectrumResult,
    analytic_spectrum,
    characteristic,
    fd_eigensolver,
    fd_relative_errors,
    quantization_residual,
    solve_modes_family,
    stationary_mode,
)
from .evolution import (
    ConservationRow,
    EvolutionRun,
    FvEvolutionCheck,
    Snapshot,
    check_cfl,
    evolve_leapfrog,
    evolve_spectral_exact,
    mode_state,
    verify_fv_evolution,
)
from .nr_limit import NrLimitReport, NrResidual, nr_limit_experiment, nr_residuals

__all__ = [
    'SpectrumEntry',
    'SpectrumResult',
    'analytic_spectrum',
    'characteristic',
    'fd_eigensolver',
    'fd_relative_errors',
    'quantization_residual',
    'solve_modes_family',
    'stationary_mode',
    'ConservationRow',
    'EvolutionRun',
    'FvEvolutionCheck',
    'Snapshot',
    'check_cfl',
    'evolve_leapfrog',
    'evolve_spectral_exact',
    'mode_state',
    'verify_fv_evolution',
    'NrLimitReport',
    'NrResidual',
    'nr_limit_experiment',
    'nr_residuals',
]
