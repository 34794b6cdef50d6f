"""
Unit tests for the stationary spectrum and the finite-difference oracle
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
from src.boundary.membership import BoundaryRelation
from src.linalg.pauli import IDENTITY, Complex2x2
from src.solvers.spectrum import (
    _mode_flux_residual,
    analytic_spectrum,
    characteristic,
    fd_eigensolver,
    fd_relative_errors,
    quantization_residual,
    solve_modes_family,
    stationary_mode,
)
from src.states.grid import Grid, UnitsConfig
from src.utils.error_handler import (
    EvanescentRegimeError,
    InvalidParameterError,
    OutOfRangeError,
    UnsupportedBoundaryError,
)


class TestAnalyticSpectrum(unittest.TestCase):
    """Test cases for the closed-form twisted spectra"""

    def setUp(self):
        self.grid = Grid(0.0, 2 * math.pi, 129)
        self.units = UnitsConfig()

    def test_periodic_ladder(self):
        """Test k_n = 2 pi n / L and E = sqrt(1 + k^2)"""
        result = analytic_spectrum(BcClass.periodic(), 4, self.grid, self.units)
        self.assertEqual(len(result), 5)
        assert_allclose(result.ks, np.arange(5), atol=1e-14)
        assert_allclose(result.energies, np.sqrt(1 + np.arange(5) ** 2), rtol=1e-14)
        for entry in result.entries:
            self.assertEqual(entry.e_minus, -entry.e_plus)
            self.assertLess(entry.quantization_residual, 1e-10)
            self.assertLess(entry.flux_residual, 1e-9)
            self.assertLess(entry.domain_residual, 1e-9)

    def test_antiperiodic_ladder(self):
        """Test k_n = (2n + 1) pi / L"""
        result = analytic_spectrum(BcClass.antiperiodic(), 2, self.grid, self.units)
        assert_allclose(result.ks, [0.5, 1.5, 2.5], atol=1e-14)
        self.assertEqual(result.label, "Antiperiodic")

    def test_rows_have_csv_columns(self):
        """Test the serialized row layout"""
        row = analytic_spectrum(BcClass.periodic(), 1, self.grid, self.units).rows()[0]
        self.assertEqual(list(row), ['n', 'k', 'E_plus', 'E_minus', 'flux_residual', 'domain_residual'])

    def test_invalid_requests(self):
        """Test n_max validation and non-twisted classes"""
        with self.assertRaises(InvalidParameterError):
            analytic_spectrum(BcClass.periodic(), 0, self.grid, self.units)
        bc = classify_bc(TransferMatrixV.flux_balanced(1.0, Branch.LOWER))
        with self.assertRaises(UnsupportedBoundaryError):
            analytic_spectrum(bc, 3, self.grid, self.units)


class TestFiniteDifferenceOracle(unittest.TestCase):
    """Test cases for the dense stencil eigensolver"""

    def test_jacobi_matches_closed_form(self):
        """Test small periodic stencils against 2(1 - cos(2 pi j / N)) / dx^2"""
        grid = Grid(0.0, 2 * math.pi, 33)
        eigenvalues = fd_eigensolver(BcClass.periodic(), grid)
        count = grid.n - 1
        expected = np.sort(2 * (1 - np.cos(2 * math.pi * np.arange(count) / count)) / grid.spacing ** 2)
        assert_allclose(eigenvalues, expected, atol=1e-8)

    def test_jacobi_and_lapack_agree(self):
        """Test that both diagonalizers give the same twisted and Dirichlet spectra"""
        grid = Grid(0.0, 2 * math.pi, 41)
        for relation in (BcClass.antiperiodic(), BoundaryRelation.dirichlet()):
            jacobi = fd_eigensolver(relation, grid, method="jacobi")
            lapack = fd_eigensolver(relation, grid, method="lapack")
            assert_allclose(jacobi, lapack, rtol=1e-10, atol=1e-10)

    def test_unknown_method_rejected(self):
        """Test that an unknown diagonalizer name is refused"""
        with self.assertRaises(InvalidParameterError):
            fd_eigensolver(BcClass.periodic(), Grid(0.0, 1.0, 11), method="qr")

    def test_lapack_path_second_order(self):
        """Test relative errors of the lowest modes on a fine grid"""
        grid = Grid(0.0, 2 * math.pi, 257)
        errors = fd_relative_errors(BcClass.periodic(), grid, [0.0, 1.0, 2.0])
        self.assertLess(errors[0], 1e-8)
        self.assertLess(float(np.max(errors)), 1e-3)
        # error ratio of modes 2 and 1 follows (k dx)^2 / 12
        self.assertAlmostEqual(errors[2] / errors[1], 4.0, places=2)

    def test_flux_balanced_and_dirichlet_relations(self):
        """Test the branch sign and the Dirichlet stencil"""
        grid = Grid(0.0, 2 * math.pi, 129)
        upper = fd_relative_errors(TransferMatrixV.flux_balanced(1.0, Branch.UPPER), grid, [0.5, 1.5])
        self.assertLess(float(np.max(upper)), 1e-3)
        dirichlet = fd_relative_errors(BoundaryRelation.dirichlet(), Grid(0.0, math.pi, 101), [1.0, 2.0])
        self.assertLess(float(np.max(dirichlet)), 1e-3)

    def test_grid_limit(self):
        """Test the dense-size refusal"""
        with self.assertRaises(OutOfRangeError):
            fd_eigensolver(BcClass.periodic(), Grid(0.0, 1.0, 601))

    def test_unsupported_relation(self):
        """Test confining relations are refused"""
        with self.assertRaises(UnsupportedBoundaryError):
            fd_eigensolver(BoundaryRelation.dirichlet_neumann(), Grid(0.0, 1.0, 33))


class TestModeFluxResidual(unittest.TestCase):
    """Test cases for the per-mode wall energy-current check"""

    def setUp(self):
        self.grid = Grid(0.0, 2 * math.pi, 256)
        self.units = UnitsConfig()

    def energy(self, k):
        return math.sqrt(1 + k * k)

    def test_quantized_modes_balance(self):
        """Test roots of both twisted relations and of a family member pass"""
        upper = TransferMatrixV.flux_balanced(1.0, Branch.UPPER).matrix
        cases = [(0.5, IDENTITY.scale(-1)), (1.0, IDENTITY), (1.5, upper), (0.0, IDENTITY)]
        for k, transfer in cases:
            self.assertLess(_mode_flux_residual(k, self.energy(k), self.grid, self.units, transfer), 1e-12)

    def test_non_root_wavenumber_rejected(self):
        """Test k = 0.3 misses every relation and leaves a wall-current mismatch"""
        lower = TransferMatrixV.flux_balanced(2.0, Branch.LOWER).matrix
        for transfer in (IDENTITY, IDENTITY.scale(-1), lower):
            residual = _mode_flux_residual(0.3, self.energy(0.3), self.grid, self.units, transfer)
            self.assertGreater(residual, 0.1)

    def test_transfer_without_projection(self):
        """Test a matrix with unequal column sums is refused"""
        with self.assertRaises(UnsupportedBoundaryError):
            _mode_flux_residual(0.5, self.energy(0.5), self.grid, self.units, Complex2x2(1, 0, 0, 2))


class TestQuantization(unittest.TestCase):
    """Test cases for the quantization system and family modes"""

    def setUp(self):
        self.grid = Grid(0.0, 2 * math.pi, 129)
        self.units = UnitsConfig()

    def test_characteristic_zeros(self):
        """Test the branch characteristic vanishes on the twisted ladders"""
        self.assertAlmostEqual(characteristic(Branch.LOWER, 3.0, 2 * math.pi), 0.0, places=12)
        self.assertAlmostEqual(characteristic(Branch.UPPER, 2.5, 2 * math.pi), 0.0, places=12)

    def test_residual_regimes(self):
        """Test propagating zeros and the evanescent basis"""
        energy = math.sqrt(1 + 9.0)
        self.assertLess(abs(quantization_residual(1.0, Branch.LOWER, energy, self.grid, self.units)), 1e-12)
        self.assertGreater(abs(quantization_residual(1.0, Branch.UPPER, energy, self.grid, self.units)), 1.0)
        with self.assertRaises(EvanescentRegimeError):
            quantization_residual(1.0, Branch.LOWER, 0.5, self.grid, self.units)
        value = quantization_residual(1.0, Branch.LOWER, 0.0, self.grid, self.units, allow_evanescent=True)
        self.assertAlmostEqual(value.real, 2 * (1 - math.cosh(2 * math.pi)), places=6)
        with self.assertRaises(OutOfRangeError):
            quantization_residual(math.pi, Branch.LOWER, energy, self.grid, self.units)

    def test_stationary_mode_layout(self):
        """Test the FV weights and the time derivative"""
        state, state_dot, derivative = stationary_mode(1.0, math.sqrt(2.0), self.grid, self.units)
        ratio = math.sqrt(2.0)
        self.assertAlmostEqual(state.phi1[0], 0.5 * (1 + ratio))
        self.assertAlmostEqual(state.phi2[0], 0.5 * (1 - ratio))
        assert_allclose(state_dot.phi1, -1j * ratio * state.phi1)
        self.assertEqual(derivative.shape, (2, self.grid.n))

    def test_upper_family_modes(self):
        """Test roots, residual columns and ordering for mu = 1 (upper)"""
        result = solve_modes_family(1.0, Branch.UPPER, [1.0, 7.0], self.grid, self.units)
        assert_allclose(result.ks, np.arange(7) + 0.5, atol=1e-10)
        self.assertTrue(np.all(np.diff(result.energies) > 0))
        for entry in result.entries:
            self.assertLess(entry.quantization_residual, 1e-10)
            self.assertLess(entry.flux_residual, 1e-9)
        self.assertEqual(result.branch, Branch.UPPER)

    def test_half_pi_family_matches_periodic(self):
        """Test the lower branch at pi/2 reproduces the periodic ladder and its domain"""
        result = solve_modes_family(math.pi / 2, Branch.LOWER, [1.0, 5.2], self.grid, self.units)
        reference = analytic_spectrum(BcClass.periodic(), 5, self.grid, self.units)
        assert_allclose(result.ks, reference.ks, atol=1e-10)
        self.assertLess(max(e.domain_residual for e in result.entries), 1e-9)

    def test_parallel_roots_match_serial(self):
        """Test worker count does not change the modes"""
        serial = solve_modes_family(2.5, Branch.LOWER, [1.0, 6.0], self.grid, self.units)
        parallel = solve_modes_family(2.5, Branch.LOWER, [1.0, 6.0], self.grid, self.units, max_workers=4)
        assert_allclose(serial.ks, parallel.ks, rtol=0, atol=0)

    def test_window_validation(self):
        """Test window ordering, evanescent windows and mu range"""
        with self.assertRaises(InvalidParameterError):
            solve_modes_family(1.0, Branch.UPPER, [3.0, 2.0], self.grid, self.units)
        with self.assertRaises(EvanescentRegimeError):
            solve_modes_family(1.0, Branch.UPPER, [0.1, 0.5], self.grid, self.units)
        with self.assertRaises(OutOfRangeError):
            solve_modes_family(0.0, Branch.UPPER, [1.0, 2.0], self.grid, self.units)


if __name__ == '__main__':
    unittest.main()
