"""
Unit tests for the boundary-condition families and constraint solvers
"""

import math
import unittest
import sys
from pathlib import Path

import numpy as np

# Add project root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from src.boundary.bc_families import (
    Branch,
    NMatrixParams,
    SeparatedBcParams,
    TransferMatrixV,
    build_N,
    flux_balance_equations,
    flux_balance_residual,
    n_to_transfer,
    parity_residual,
    schrodinger_bc_relation,
    schrodinger_parity_restriction,
    separated_branch_analysis,
    separated_wall_current_factors,
    separated_wall_currents,
    solve_flux_constraint,
    solve_parity_constraint,
    unitary_symmetric_sweep,
)
from src.linalg.pauli import IDENTITY, TAU3, adjoint, is_symmetric, is_unitary, max_abs_diff
from src.utils.error_handler import InvalidParameterError, OutOfRangeError, SeparatedBranchSignal


class TestNMatrix(unittest.TestCase):
    """Test cases for the unitary symmetric boundary matrix"""

    def test_build_n_is_unitary_and_symmetric(self):
        """Test random parameter sets give unitary symmetric N"""
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = build_N(NMatrixParams.random(rng))
            self.assertTrue(is_unitary(n))
            self.assertTrue(is_symmetric(n))

    def test_build_n_rejects_non_unit_norm(self):
        """Test the unit-norm invariant"""
        with self.assertRaises(InvalidParameterError):
            build_N(NMatrixParams(mu=1.0, m0=0.5, m1=0.5, m3=0.5))

    def test_sweep_reports_no_failures(self):
        """Test the property sweep and det N = exp(2 i mu)"""
        failures, worst_det = unitary_symmetric_sweep(200, seed=5)
        self.assertEqual(failures, 0)
        self.assertLess(worst_det, 1e-12)

    def test_transfer_needs_nonzero_m1(self):
        """Test that m1 = 0 signals the separated branch"""
        with self.assertRaises(SeparatedBranchSignal):
            n_to_transfer(NMatrixParams(mu=0.0, m0=1.0, m1=0.0, m3=0.0))

    def test_transfer_can_skip_norm_check(self):
        """Test that negative controls can build non-unitary transfer matrices"""
        params = NMatrixParams(mu=1.0, m0=-0.5, m1=0.9, m3=0.0)
        with self.assertRaises(InvalidParameterError):
            n_to_transfer(params)
        v = n_to_transfer(params, require_unit_norm=False)
        self.assertGreater(flux_balance_residual(v), 1e-3)

    def test_transfer_of_flux_solution_matches_closed_form(self):
        """Test n_to_transfer on m0 = -cos mu, m1 = -sin mu reproduces the upper branch"""
        mu = 1.0
        params = NMatrixParams(mu=mu, m0=-math.cos(mu), m1=-math.sin(mu), m3=0.0)
        v = n_to_transfer(params)
        expected = TransferMatrixV.flux_balanced(mu, Branch.UPPER)
        self.assertLess(max_abs_diff(v.matrix, expected.matrix), 1e-12)


class TestFluxBalanced(unittest.TestCase):
    """Test cases for the flux-balanced family"""

    def test_branches_collapse_at_half_pi(self):
        """Test V(pi/2) = -I (upper) and +I (lower)"""
        upper = TransferMatrixV.flux_balanced(math.pi / 2, Branch.UPPER)
        lower = TransferMatrixV.flux_balanced(math.pi / 2, Branch.LOWER)
        self.assertLess(max_abs_diff(upper.matrix, -IDENTITY), 1e-12)
        self.assertLess(max_abs_diff(lower.matrix, IDENTITY), 1e-12)

    def test_unimodular_and_flux_balanced(self):
        """Test det V = 1, flux balance and tau3 preservation across mu"""
        for mu in np.linspace(0.1, 3.0, 12):
            for branch in Branch:
                v = TransferMatrixV.flux_balanced(float(mu), branch)
                self.assertLess(abs(v.det - 1.0), 1e-12)
                self.assertLess(flux_balance_residual(v), 1e-11)
                lhs = adjoint(v.matrix) @ TAU3 @ v.matrix
                self.assertLess(max_abs_diff(lhs, TAU3), 1e-11)

    def test_mu_outside_open_interval_refused(self):
        """Test the open-interval requirement"""
        for mu in (0.0, math.pi, -1.0):
            with self.assertRaises(OutOfRangeError):
                TransferMatrixV.flux_balanced(mu, Branch.UPPER)

    def test_flux_equations_vanish_on_solution(self):
        """Test the scalar flux-balance equations"""
        mu = 0.7
        for sign in (-1, 1):
            params = NMatrixParams(mu=mu, m0=-math.cos(mu), m1=sign * math.sin(mu), m3=0.0)
            self.assertLess(float(np.max(np.abs(flux_balance_equations(params)))), 1e-12)

    def test_solve_flux_constraint(self):
        """Test both branches per sample with m3 = 0 and m0 = -cos mu"""
        samples = [0.4, 1.3, 2.2]
        solutions = solve_flux_constraint(samples)
        self.assertEqual(len(solutions), 2 * len(samples))
        for sol in solutions:
            self.assertEqual(sol.params.m3, 0.0)
            self.assertLess(abs(sol.params.m0 + math.cos(sol.params.mu)), 1e-15)
            self.assertLess(sol.residual, 1e-11)
            self.assertLess(sol.numeric_deviation, 1e-8)

    def test_solve_flux_constraint_parallel_matches_serial(self):
        """Test worker count does not change the result order"""
        samples = [0.3, 0.9, 1.5, 2.7]
        serial = solve_flux_constraint(samples)
        parallel = solve_flux_constraint(samples, max_workers=3)
        self.assertEqual([s.params for s in serial], [s.params for s in parallel])

    def test_solve_flux_constraint_rejects_endpoint(self):
        """Test mu = 0 is refused"""
        with self.assertRaises(OutOfRangeError):
            solve_flux_constraint([0.0])


class TestParityAndSeparated(unittest.TestCase):
    """Test cases for parity and the separated branch"""

    def test_parity_selects_half_pi(self):
        """Test the unique parity root and both collapsed branches"""
        parity = solve_parity_constraint()
        self.assertAlmostEqual(parity.mu, math.pi / 2, places=12)
        self.assertEqual(len(parity.solutions), 2)
        for v in parity.solutions:
            self.assertLess(parity_residual(v), 1e-12)

    def test_parity_fails_away_from_half_pi(self):
        """Test V^2 != I for mu != pi/2"""
        v = TransferMatrixV.flux_balanced(1.0, Branch.LOWER)
        self.assertGreater(parity_residual(v), 1e-3)

    def test_separated_branch(self):
        """Test m0 = +-1, mu = m3 = 0, impenetrable walls and non-membership"""
        analysis = separated_branch_analysis(seed=2)
        self.assertTrue(analysis.impenetrable)
        self.assertEqual(analysis.constraint_residual, 0.0)
        self.assertEqual(sorted(p.m0_sign for p in analysis.params), [-1, 1])
        for branch in analysis.branches:
            self.assertEqual(branch.params.mu, 0.0)
            self.assertEqual(branch.params.m3, 0.0)
            self.assertIsNone(branch.membership)
            self.assertEqual(branch.wall_current_max, 0.0)
        self.assertEqual(len(analysis.kfg_bc_descriptions), 2)

    def test_separated_wall_currents_from_matrices(self):
        """Test wall data drawn from V1 and V2 carry no current only on the surviving members"""
        for m0 in (1.0, -1.0):
            self.assertEqual(float(np.max(separated_wall_currents(0.0, m0, 0.0, seed=4))), 0.0)
        unbalanced = separated_wall_currents(0.7, 0.6, 0.8, seed=4)
        self.assertEqual(unbalanced.shape, (32, 2))
        self.assertGreater(float(np.max(unbalanced)), 1e-3)

    def test_separated_params_validation(self):
        """Test m0_sign must be +1 or -1"""
        with self.assertRaises(InvalidParameterError):
            SeparatedBcParams(m0_sign=0)

    def test_schrodinger_parity_restriction(self):
        """Test only theta in {0, pi} survive"""
        angles = schrodinger_parity_restriction()
        self.assertEqual(len(angles), 2)
        self.assertEqual(angles[0], 0.0)
        self.assertAlmostEqual(angles[1], math.pi, places=12)

    def test_schrodinger_bc_relation(self):
        """Test the forward factor and its parity image"""
        forward, image = schrodinger_bc_relation(0.3)
        self.assertAlmostEqual(forward, complex(math.cos(0.3), math.sin(0.3)))
        self.assertEqual(image, forward.conjugate())
        self.assertEqual(schrodinger_bc_relation(0.0), (1, 1))

    def test_separated_wall_current_factors(self):
        """Test the two prefactors differ by 2 m3 sin(mu)"""
        at_b, at_a = separated_wall_current_factors(1.0, 0.2, 0.3)
        self.assertAlmostEqual(at_b, 1 + 0.2 * math.cos(1.0) + 0.3 * math.sin(1.0))
        self.assertAlmostEqual(at_b - at_a, 0.6 * math.sin(1.0))
        self.assertEqual(separated_wall_current_factors(0.0, -1.0, 0.0), (0.0, 0.0))


if __name__ == '__main__':
    unittest.main()
