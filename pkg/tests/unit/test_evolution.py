"""
Unit tests for the leapfrog integrator and the exact modewise propagator
"""

import math
import unittest
import sys
from pathlib import Path

import numpy as np
from numpy.testing import assert_allclose

# Add project root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from src.boundary.bc_families import Branch, TransferMatrixV
from src.boundary.classification import BcClass, classify_bc
from src.solvers.evolution import (
    EvolutionRun,
    check_cfl,
    evolve_leapfrog,
    evolve_spectral_exact,
    mode_state,
    verify_fv_evolution,
)
from src.states.fv_states import MajoranaSign, kfg_state_from_fv, random_state
from src.states.grid import Grid, UnitsConfig
from src.utils.error_handler import (
    CflViolationError,
    InsufficientDataError,
    InvalidInputError,
    InvalidParameterError,
    UnsupportedBoundaryError,
)


class TestEvolutionRun(unittest.TestCase):
    """Test cases for run validation and the CFL guard"""

    def setUp(self):
        self.grid = Grid(0.0, 2 * math.pi, 65)
        self.units = UnitsConfig()
        self.initial = mode_state(self.grid, BcClass.periodic(), 1, "plus", self.units)

    def test_non_twisted_walls_refused(self):
        """Test flux-balanced walls are out of scope for time evolution"""
        bc = classify_bc(TransferMatrixV.flux_balanced(1.0, Branch.UPPER))
        with self.assertRaises(UnsupportedBoundaryError):
            EvolutionRun(self.initial, bc, dt=0.01, steps=10)

    def test_invalid_step_parameters(self):
        """Test dt, steps, stride and cfl_factor validation"""
        bc = BcClass.periodic()
        for kwargs in ({'dt': 0.0, 'steps': 1}, {'dt': 0.01, 'steps': -1},
                       {'dt': 0.01, 'steps': 1, 'stride': 0}, {'dt': 0.01, 'steps': 1, 'cfl_factor': 0.0}):
            with self.assertRaises(InvalidParameterError):
                EvolutionRun(self.initial, bc, **kwargs)

    def test_cfl_limit(self):
        """Test dt above cfl * dx / c is refused"""
        check_cfl(0.5 * self.grid.spacing, self.grid, self.units)
        with self.assertRaises(CflViolationError):
            check_cfl(0.6 * self.grid.spacing, self.grid, self.units)
        run = EvolutionRun(self.initial, BcClass.periodic(), dt=self.grid.spacing, steps=1)
        with self.assertRaises(CflViolationError):
            evolve_leapfrog(run, self.units)


class TestLeapfrog(unittest.TestCase):
    """Test cases for evolve_leapfrog"""

    def setUp(self):
        self.grid = Grid(0.0, 2 * math.pi, 65)
        self.units = UnitsConfig()
        self.dt = 0.2 * self.grid.spacing
        self.steps = 50

    def run_mode(self, bc: BcClass, sign: str = "plus", stride: int = 5) -> EvolutionRun:
        initial = mode_state(self.grid, bc, 1, sign, self.units)
        run = EvolutionRun(initial, bc, dt=self.dt, steps=self.steps, stride=stride)
        return evolve_leapfrog(run, self.units)

    def test_snapshots_and_conservation_rows(self):
        """Test snapshot count, times and the missing staggered value at t = 0"""
        result = self.run_mode(BcClass.periodic())
        self.assertEqual(len(result.snapshots), self.steps // 5 + 1)
        self.assertEqual(len(result.conservation), len(result.snapshots))
        self.assertIsNone(result.conservation[0].staggered_energy)
        self.assertAlmostEqual(result.snapshots[-1].time, self.steps * self.dt)
        self.assertAlmostEqual(result.snapshot_dt, 5 * self.dt)

    def test_staggered_energy_is_conserved(self):
        """Test the leapfrog-consistent energy is constant to round-off"""
        for bc in (BcClass.periodic(), BcClass.antiperiodic()):
            result = self.run_mode(bc, stride=1)
            self.assertLess(result.staggered_energy_drift(), 1e-10)
            self.assertLess(result.full_step_energy_drift(), 1e-3)

    def test_wall_currents_balance(self):
        """Test j_en(a) = j_en(b) on twisted walls"""
        result = self.run_mode(BcClass.antiperiodic())
        for row in result.conservation:
            self.assertAlmostEqual(row.j_en_a, row.j_en_b, places=13)

    def test_matches_lattice_exact_solution(self):
        """Test leapfrog against the semi-discrete exact propagator"""
        for sign in ("plus", "minus"):
            result = self.run_mode(BcClass.periodic(), sign)
            reference = evolve_spectral_exact(result.initial, self.steps * self.dt,
                                              units=self.units, dispersion="lattice")
            self.assertLess(float(np.max(np.abs(result.final.phi - reference.phi))), 1e-3)
            self.assertIs(result.final.majorana_sign, MajoranaSign.parse(sign))

    def test_final_state_keeps_wraparound(self):
        """Test the closing sample equals twist times the first"""
        result = self.run_mode(BcClass.antiperiodic())
        self.assertEqual(result.final.phi[-1], -result.final.phi[0])


class TestSpectralExact(unittest.TestCase):
    """Test cases for evolve_spectral_exact and mode_state"""

    def setUp(self):
        self.grid = Grid(0.0, 2 * math.pi, 65)
        self.units = UnitsConfig()

    def test_travelling_mode(self):
        """Test rotating a single mode reproduces mode_state at later times"""
        for bc in (BcClass.periodic(), BcClass.antiperiodic()):
            start = mode_state(self.grid, bc, 2, "plus", self.units)
            later = evolve_spectral_exact(start, 0.7, units=self.units)
            expected = mode_state(self.grid, bc, 2, "plus", self.units, t=0.7)
            assert_allclose(later.phi, expected.phi, atol=1e-12)
            assert_allclose(later.phi_dot, expected.phi_dot, atol=1e-12)

    def test_zero_time_is_identity(self):
        """Test t = 0 returns the initial data"""
        state = random_state(3, self.grid, BcClass.antiperiodic(), "minus", 4, self.units)
        kfg = kfg_state_from_fv(state, self.units)
        same = evolve_spectral_exact(kfg, 0.0, units=self.units)
        assert_allclose(same.phi, kfg.phi, atol=1e-13)

    def test_invalid_dispersion(self):
        """Test the dispersion switch"""
        start = mode_state(self.grid, BcClass.periodic(), 1, "plus", self.units)
        with self.assertRaises(InvalidParameterError):
            evolve_spectral_exact(start, 1.0, dispersion="exact")

    def test_mode_state_needs_sign(self):
        """Test unconstrained modes are refused"""
        with self.assertRaises(InvalidInputError):
            mode_state(self.grid, BcClass.periodic(), 1, None, self.units)


class TestFvEvolutionCheck(unittest.TestCase):
    """Test cases for verify_fv_evolution"""

    def setUp(self):
        self.grid = Grid(0.0, 2 * math.pi, 65)
        self.units = UnitsConfig()
        initial = mode_state(self.grid, BcClass.periodic(), 1, "plus", self.units)
        run = EvolutionRun(initial, BcClass.periodic(), dt=0.05 * self.grid.spacing, steps=40, stride=4)
        self.result = evolve_leapfrog(run, self.units)

    def test_matching_sign_has_small_residuals(self):
        """Test the plus equation holds on a plus evolution"""
        check = verify_fv_evolution(self.result, self.units)
        self.assertIs(check.sign, MajoranaSign.PLUS)
        self.assertEqual(check.levels, 11)
        self.assertLess(check.field_residual, 1e-12)
        self.assertLess(check.centered_residual, 1e-3)

    def test_wrong_sign_is_discriminated(self):
        """Test the minus equation fails on a plus evolution"""
        check = verify_fv_evolution(self.result, self.units, MajoranaSign.MINUS)
        self.assertGreater(check.field_residual, 1e-3)

    def test_needs_three_snapshots(self):
        """Test InsufficientDataError for short runs"""
        initial = mode_state(self.grid, BcClass.periodic(), 1, "plus", self.units)
        run = EvolutionRun(initial, BcClass.periodic(), dt=0.01, steps=1)
        with self.assertRaises(InsufficientDataError):
            verify_fv_evolution(evolve_leapfrog(run, self.units), self.units)


if __name__ == '__main__':
    unittest.main()
