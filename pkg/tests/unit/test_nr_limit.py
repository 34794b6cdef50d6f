"""
Unit tests for the nonrelativistic-limit experiment
"""

import math
import unittest
import sys
from pathlib import Path

# Add project root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from src.solvers.nr_limit import nr_limit_experiment, nr_residuals
from src.states.fv_states import MajoranaSign
from src.states.grid import UnitsConfig
from src.utils.error_handler import InsufficientDataError, OutOfRangeError


class TestNrResiduals(unittest.TestCase):
    """Test cases for single-mode residuals"""

    def setUp(self):
        self.units = UnitsConfig()

    def test_bracket_residual_closed_form(self):
        """Test the projected residual equals k^2 / (2 omega) in natural units"""
        for sign in (MajoranaSign.PLUS, MajoranaSign.MINUS):
            k = 0.02
            row = nr_residuals(k, self.units, sign)
            expected = k ** 2 / (2 * math.sqrt(1 + k ** 2))
            self.assertLess(abs(row.bracket_residual - expected) / expected, 1e-8)
            self.assertIs(row.sign, sign)
            self.assertAlmostEqual(row.ratio, k)

    def test_complementary_projection_is_same_order(self):
        """Test the other projection is k^2 / 2, a factor omega above the bracket residual"""
        k = 0.02
        omega = math.sqrt(1 + k ** 2)
        for sign in (MajoranaSign.PLUS, MajoranaSign.MINUS):
            row = nr_residuals(k, self.units, sign)
            self.assertLess(abs(row.complement_residual - k ** 2 / 2) / (k ** 2 / 2), 1e-8)
            self.assertAlmostEqual(row.complement_residual / row.bracket_residual, omega, places=8)

    def test_schrodinger_operator_does_not_annihilate(self):
        """Test the unprojected residual stays of kinetic size"""
        row = nr_residuals(0.04, self.units, "plus")
        self.assertAlmostEqual(row.schrodinger_residual, 1.0, places=9)

    def test_units_enter_the_ratio(self):
        """Test hbar k / mc with non-unit constants"""
        units = UnitsConfig(hbar=1.0, m=2.0, c=3.0)
        row = nr_residuals(0.3, units, "minus")
        self.assertAlmostEqual(row.ratio, 0.05)


class TestNrLimitExperiment(unittest.TestCase):
    """Test cases for the log-log scaling fit"""

    def test_quadratic_scaling(self):
        """Test both slopes are close to 2"""
        report = nr_limit_experiment([0.01, 0.02, 0.04])
        self.assertAlmostEqual(report.slope_plus, 2.0, delta=0.05)
        self.assertAlmostEqual(report.slope_minus, 2.0, delta=0.05)
        self.assertEqual(len(report.rows), 6)

    def test_parallel_matches_serial(self):
        """Test worker count does not change the rows"""
        ks = [0.01, 0.03, 0.05, 0.07]
        serial = nr_limit_experiment(ks)
        parallel = nr_limit_experiment(ks, max_workers=4)
        self.assertEqual(serial.rows, parallel.rows)

    def test_to_dict(self):
        """Test the serialized report"""
        data = nr_limit_experiment([0.01, 0.02, 0.04]).to_dict()
        self.assertEqual(set(data), {'slope_plus', 'slope_minus', 'rows'})
        self.assertIn('complement_residual', data['rows'][0])
        self.assertEqual(data['rows'][0]['sign'], 'plus')

    def test_input_validation(self):
        """Test the minimum count and the k range"""
        with self.assertRaises(InsufficientDataError):
            nr_limit_experiment([0.01, 0.02])
        with self.assertRaises(OutOfRangeError):
            nr_limit_experiment([0.01, 0.02, 0.2])
        with self.assertRaises(OutOfRangeError):
            nr_limit_experiment([0.0, 0.01, 0.02])


if __name__ == '__main__':
    unittest.main()
