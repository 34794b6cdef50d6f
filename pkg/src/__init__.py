"""
KFGM Interval Verifier - Main Package

Boundary-condition solvers, observables and time-domain checks for the free
Feshbach-Villars Hamiltonian of a strictly neutral spin-0 particle on an interval.
"""

__version__ = "1.0.0"
__author__ = "KFGM Verification Team"
__description__ = "Pseudo self-adjoint boundary conditions and energy-current verification for FV/KFG particles"
