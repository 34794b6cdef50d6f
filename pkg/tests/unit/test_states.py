"""
Unit tests for grids, FV/KFG states and the discrete operators
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
from src.linalg.pauli import IDENTITY
from src.states.fv_states import (
    FvState,
    KfgState,
    MajoranaSign,
    admissible_wavenumbers,
    charge_conjugate,
    enforce_majorana,
    fv_from_kfg,
    kfg_from_fv,
    kfg_state_from_fv,
    parity_transform,
    random_state,
)
from src.states.grid import Grid, UnitsConfig, first_derivative, second_derivative
from src.states.operators import (
    apply_fv_hamiltonian,
    apply_momentum,
    boundary_data,
    fv_time_derivative,
    hamiltonian_domain_check,
)
from src.utils.error_handler import InvalidInputError, InvalidParameterError, UnsupportedBoundaryError


def plane_wave_state(grid: Grid, k: float, units: UnitsConfig):
    """Positive-energy discrete eigenmode of the periodic FD Hamiltonian."""
    dx = grid.spacing
    k_eff2 = 2 * (1 - math.cos(k * dx)) / dx ** 2
    energy = math.sqrt(units.rest_energy ** 2 + (units.hbar * units.c) ** 2 * k_eff2)
    phi = np.exp(1j * k * (grid.x - grid.a))
    phi[-1] = phi[0]
    ratio = energy / units.rest_energy
    return FvState(grid, 0.5 * (1 + ratio) * phi, 0.5 * (1 - ratio) * phi,
                   bc=BcClass.periodic()), energy


class TestGrid(unittest.TestCase):
    """Test cases for Grid and UnitsConfig"""

    def test_geometry(self):
        """Test spacing, refinement and quadrature"""
        grid = Grid(0.0, 2.0, 17)
        self.assertAlmostEqual(grid.spacing, 0.125)
        self.assertEqual(grid.refined().n, 33)
        self.assertAlmostEqual(grid.refined().spacing, 0.0625)
        self.assertAlmostEqual(grid.midpoint, 1.0)
        self.assertAlmostEqual(float(grid.integrate(np.ones(17))), 2.0)

    def test_invalid_grid_rejected(self):
        """Test b > a and the minimum point count"""
        with self.assertRaises(InvalidParameterError):
            Grid(1.0, 1.0, 32)
        with self.assertRaises(InvalidParameterError):
            Grid(0.0, 1.0, 8)

    def test_units(self):
        """Test derived unit quantities and validation"""
        units = UnitsConfig(hbar=2.0, m=3.0, c=0.5)
        self.assertAlmostEqual(units.rest_energy, 0.75)
        self.assertAlmostEqual(units.omega0, 0.375)
        self.assertAlmostEqual(units.compton_k, 0.75)
        self.assertAlmostEqual(float(units.energy(0.0)), 0.75)
        with self.assertRaises(InvalidParameterError):
            UnitsConfig(m=0.0)


class TestStencils(unittest.TestCase):
    """Test cases for the finite-difference stencils"""

    def test_one_sided_exact_on_quadratics(self):
        """Test the endpoint stencils reproduce derivatives of x^2"""
        grid = Grid(0.0, 1.0, 21)
        f = grid.x ** 2
        assert_allclose(first_derivative(f, grid.spacing), 2 * grid.x, atol=1e-12)
        assert_allclose(second_derivative(f, grid.spacing), 2.0, atol=1e-9)

    def test_twisted_wraparound_is_exact_at_endpoints(self):
        """Test out[-1] = twist * out[0] for both twists"""
        grid = Grid(0.0, 1.0, 33)
        for twist in (1.0, -1.0):
            k = math.pi if twist < 0 else 2 * math.pi
            f = np.cos(k * grid.x) + 0.3 * np.sin(k * grid.x)
            f[-1] = twist * f[0]
            for out in (first_derivative(f, grid.spacing, twist), second_derivative(f, grid.spacing, twist)):
                self.assertEqual(out[-1], twist * out[0])

    def test_second_order_accuracy(self):
        """Test the relative error of d2 sin(kx) is close to (k dx)^2 / 12"""
        grid = Grid(0.0, 2 * math.pi, 257)
        f = np.sin(3 * grid.x)
        d2 = second_derivative(f, grid.spacing, 1.0)
        error = float(np.max(np.abs(d2 + 9 * f)))
        expected = 9 * (3 * grid.spacing) ** 2 / 12
        self.assertLess(error, 1.1 * expected)
        self.assertGreater(error, 0.5 * expected)


class TestStates(unittest.TestCase):
    """Test cases for FvState, KfgState and the conversions"""

    def setUp(self):
        self.grid = Grid(0.0, 2 * math.pi, 65)
        self.units = UnitsConfig()

    def test_majorana_sign_parsing(self):
        """Test parse and factor"""
        self.assertIs(MajoranaSign.parse("PLUS"), MajoranaSign.PLUS)
        self.assertIs(MajoranaSign.parse(None), MajoranaSign.NONE)
        self.assertEqual(MajoranaSign.MINUS.factor, -1.0)
        with self.assertRaises(ValueError):
            _ = MajoranaSign.NONE.factor

    def test_majorana_condition_enforced(self):
        """Test phi2 = +-conj(phi1) validation"""
        phi1 = np.exp(1j * self.grid.x)
        state = enforce_majorana(phi1, "minus", self.grid)
        assert_allclose(state.phi2, -np.conj(phi1))
        with self.assertRaises(InvalidInputError):
            FvState(self.grid, phi1, np.conj(phi1) + 1e-6, MajoranaSign.PLUS)
        with self.assertRaises(InvalidInputError):
            enforce_majorana(phi1, MajoranaSign.NONE, self.grid)

    def test_shape_and_finiteness(self):
        """Test sample validation"""
        with self.assertRaises(InvalidInputError):
            FvState(self.grid, np.zeros(10), np.zeros(10))
        bad = np.zeros(self.grid.n)
        bad[3] = np.inf
        with self.assertRaises(InvalidInputError):
            FvState(self.grid, bad, np.zeros(self.grid.n))

    def test_states_are_read_only(self):
        """Test stored arrays cannot be mutated"""
        state = enforce_majorana(np.ones(self.grid.n), "plus", self.grid)
        with self.assertRaises(ValueError):
            state.phi1[0] = 2.0

    def test_kfg_majorana_class(self):
        """Test real/imaginary KFG fields per sign"""
        with self.assertRaises(InvalidInputError):
            KfgState(self.grid, 1j * np.ones(self.grid.n), np.zeros(self.grid.n), MajoranaSign.PLUS)
        KfgState(self.grid, 1j * np.ones(self.grid.n), np.zeros(self.grid.n), MajoranaSign.MINUS)

    def test_kfg_fv_conversion(self):
        """Test phi = phi1 + phi2 and recovery of phi_dot"""
        phi = np.cos(self.grid.x).astype(complex)
        phi_dot = 0.7 * np.sin(self.grid.x).astype(complex)
        kfg = KfgState(self.grid, phi, phi_dot, MajoranaSign.PLUS)
        fv = fv_from_kfg(kfg, self.units)
        assert_allclose(fv.phi2, np.conj(fv.phi1))
        assert_allclose(kfg_from_fv(fv), phi, atol=1e-14)
        back = kfg_state_from_fv(fv, self.units)
        assert_allclose(back.phi_dot, phi_dot, atol=1e-14)

    def test_charge_conjugation_fixes_majorana_states(self):
        """Test Phi_c = Phi (plus) and Phi_c = -Phi (minus)"""
        phi1 = np.exp(2j * self.grid.x) + 0.5
        plus = enforce_majorana(phi1, "plus", self.grid)
        minus = enforce_majorana(phi1, "minus", self.grid)
        assert_allclose(charge_conjugate(plus).components, plus.components, atol=1e-15)
        assert_allclose(charge_conjugate(minus).components, -minus.components, atol=1e-15)

    def test_parity_reverses_samples(self):
        """Test reflection about the midpoint"""
        state = enforce_majorana(self.grid.x.astype(complex), "plus", self.grid)
        reflected = parity_transform(state)
        assert_allclose(reflected.phi1, self.grid.x[::-1])
        self.assertIs(reflected.majorana_sign, MajoranaSign.PLUS)

    def test_admissible_wavenumbers(self):
        """Test periodic and antiperiodic mode ladders"""
        assert_allclose(admissible_wavenumbers(BcClass.periodic(), 2 * math.pi, 3), [0, 1, 2])
        assert_allclose(admissible_wavenumbers(BcClass.antiperiodic(), 2 * math.pi, 3), [0.5, 1.5, 2.5])

    def test_random_state_is_seeded_and_twisted(self):
        """Test reproducibility, the reality class and the wraparound"""
        bc = BcClass.antiperiodic()
        a = random_state(42, self.grid, bc, "plus", 4, self.units)
        b = random_state(42, self.grid, bc, "plus", 4, self.units)
        assert_allclose(a.phi1, b.phi1)
        self.assertAlmostEqual(a.phi1[-1], -a.phi1[0], places=14)
        kfg = kfg_state_from_fv(a, self.units)
        self.assertLess(float(np.max(np.abs(kfg.phi.imag))), 1e-14)
        self.assertAlmostEqual(float(np.max(np.abs(kfg.phi))), 1.0, places=12)

    def test_random_state_needs_twisted_class(self):
        """Test refusal away from periodic/antiperiodic"""
        bc = classify_bc(TransferMatrixV.flux_balanced(1.0, Branch.UPPER))
        with self.assertRaises(UnsupportedBoundaryError):
            random_state(1, self.grid, bc, "plus", 2)


class TestOperators(unittest.TestCase):
    """Test cases for the discrete Hamiltonian and momentum"""

    def setUp(self):
        self.grid = Grid(0.0, 2 * math.pi, 65)
        self.units = UnitsConfig()

    def test_plane_wave_is_discrete_eigenmode(self):
        """Test h Phi = E Phi with the discrete dispersion"""
        state, energy = plane_wave_state(self.grid, 2.0, self.units)
        out = apply_fv_hamiltonian(state, self.units)
        assert_allclose(out.components, energy * state.components, atol=1e-10)

    def test_time_derivative_keeps_majorana_sign(self):
        """Test Phi_dot of a Majorana state stays Majorana"""
        state = random_state(3, self.grid, BcClass.periodic(), "minus", 3, self.units)
        dot = fv_time_derivative(state, self.units)
        self.assertIs(dot.majorana_sign, MajoranaSign.MINUS)
        raw = -1j * apply_fv_hamiltonian(state, self.units).components / self.units.hbar
        assert_allclose(dot.phi1, raw[0])

    def test_momentum_of_plane_wave(self):
        """Test -i hbar d/dx e^{ikx} = hbar sin(k dx)/dx e^{ikx}"""
        state, _ = plane_wave_state(self.grid, 3.0, self.units)
        k_eff = math.sin(3.0 * self.grid.spacing) / self.grid.spacing
        out = apply_momentum(state, self.units)
        assert_allclose(out.components, k_eff * state.components, atol=1e-10)

    def test_domain_check_on_twisted_states(self):
        """Test the transfer relation holds exactly for V = +-I"""
        periodic = random_state(5, self.grid, BcClass.periodic(), "plus", 3, self.units)
        self.assertEqual(hamiltonian_domain_check(periodic, IDENTITY), (0.0, 0.0))
        anti = random_state(5, self.grid, BcClass.antiperiodic(), "plus", 3, self.units)
        value_res, deriv_res = hamiltonian_domain_check(anti, TransferMatrixV(-IDENTITY))
        self.assertLess(value_res, 1e-15)
        self.assertLess(deriv_res, 1e-12)
        # wrong relation is detected
        self.assertGreater(max(hamiltonian_domain_check(anti, IDENTITY)), 1e-3)

    def test_boundary_data_order(self):
        """Test (f(b), f(a), f'(b), f'(a)) ordering"""
        phi = (self.grid.x ** 2).astype(complex)
        kfg = KfgState(self.grid, phi, np.zeros(self.grid.n))
        data = boundary_data(kfg)
        self.assertAlmostEqual(data[0], self.grid.b ** 2)
        self.assertAlmostEqual(data[1], 0.0)
        self.assertAlmostEqual(data[2], 2 * self.grid.b, places=9)
        self.assertAlmostEqual(data[3], 0.0, places=9)


if __name__ == '__main__':
    unittest.main()
