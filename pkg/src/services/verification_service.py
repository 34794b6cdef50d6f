"""
Verification Service - invariant suites behind the CLI subcommands

Each public method runs one suite against the configured scenario and
returns an InvariantReport; with an output directory set it also writes
report.json and the suite's CSV artifacts there.
"""

import json
import math
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.analyzers.observables import (
    W_DAG_W,
    boundary_term_f,
    continuity_residual,
    current_j,
    density_rho,
    energy_balance_residual,
    energy_current_j_en,
    energy_density_rho_en,
    integral_charges,
)
from src.analyzers.tensors import tensor_fields
from src.boundary.bc_families import (
    Branch,
    NMatrixParams,
    SeparatedBcParams,
    TransferMatrixV,
    n_to_transfer,
    parity_residual,
    schrodinger_parity_restriction,
    separated_branch_analysis,
    solve_flux_constraint,
    solve_parity_constraint,
    unitary_symmetric_sweep,
)
from src.boundary.classification import BcClass, BcKind, classify_bc
from src.boundary.membership import BoundaryRelation, kfg_family_membership
from src.config.config_models import Scenario
from src.linalg.pauli import Complex2x2, IDENTITY, mat_mul, max_abs_diff
from src.services.report_service import (
    InvariantReport,
    ReportRow,
    write_conservation_csv,
    write_field_csv,
    write_nr_csv,
    write_observable_csv,
    write_snapshots,
    write_spectrum_csv,
)
from src.solvers.evolution import EvolutionRun, evolve_leapfrog, evolve_spectral_exact, verify_fv_evolution
from src.solvers.nr_limit import nr_limit_experiment, nr_residuals
from src.solvers.spectrum import (
    SpectrumResult,
    analytic_spectrum,
    fd_relative_errors,
    solve_modes_family,
    stationary_mode,
)
from src.states.fv_states import (
    FvState,
    KfgState,
    MajoranaSign,
    charge_conjugate,
    fv_from_kfg,
    kfg_state_from_fv,
    parity_transform,
    random_state,
)
from src.states.grid import Grid, UnitsConfig, first_derivative
from src.states.operators import apply_fv_hamiltonian, fv_time_derivative, hamiltonian_domain_check
from src.utils.error_handler import (
    ConfigurationError,
    InvalidInputError,
    InvalidParameterError,
    ScenarioParseError,
    UnsupportedBoundaryError,
)
from src.utils.file_utils import compute_config_hash, compute_file_hash
from src.utils.logger import get_global_logger

logger = get_global_logger()

FAMILY_MU_SAMPLES = (0.5, 1.0, math.pi / 2, 2.5)
ORACLE_MODES = 5
BOUNDARY_TRIALS = 32
REPRESENTATION_STRIDE = 8
SNAPSHOT_COUNT = 100
SCHRODINGER_FLOOR = 0.5
DISCRIMINATION_FLOOR = 1e-6
PARITY_AXIS_TOL = 1e-9

NAMED_RELATIONS = {
    'periodic': BoundaryRelation.periodic,
    'antiperiodic': BoundaryRelation.antiperiodic,
    'dirichlet': BoundaryRelation.dirichlet,
    'dirichlet_neumann': BoundaryRelation.dirichlet_neumann,
    'time_derivative_dirichlet_neumann': BoundaryRelation.time_derivative_dirichlet_neumann,
}


def convergence_order(coarse: float, fine: float, ratio: float = 2.0) -> float:
    """Observed order ``log(coarse / fine) / log(ratio)``; ``inf`` when the fine error is exactly zero."""
    if fine == 0.0:
        return math.inf if coarse > 0.0 else math.nan
    if coarse <= 0.0:
        return math.nan
    return math.log(coarse / fine) / math.log(ratio)


def _random_kfg(seed: int, grid: Grid, bc: BcClass, sign: MajoranaSign, n_modes: int,
                units: UnitsConfig) -> KfgState:
    return kfg_state_from_fv(random_state(seed, grid, bc, sign, n_modes, units), units)


def _fv_pair(kfg: KfgState, units: UnitsConfig) -> Tuple[FvState, FvState]:
    state = fv_from_kfg(kfg, units)
    return state, fv_time_derivative(state, units)


def _fv_wall_energy_current(value, deriv, value_dot, deriv_dot, units: UnitsConfig) -> complex:
    """Two-component ``j_en`` from the wall values of ``Phi``, ``Phi'``, ``Phi_dot`` and ``Phi_dot'``."""
    kinetic = units.hbar ** 2 / (2 * units.m)
    return complex(-0.5 * kinetic * (np.conj(deriv) @ W_DAG_W @ value_dot - np.conj(value) @ W_DAG_W @ deriv_dot))


def _interpolated_state(grid: Grid, at_a: np.ndarray, at_b: np.ndarray) -> FvState:
    xi = (grid.x - grid.a) / grid.length
    comps = np.outer(at_a, 1.0 - xi) + np.outer(at_b, xi)
    return FvState(grid, comps[0], comps[1])


def separated_wall_current(grid: Grid, units: UnitsConfig) -> float:
    """
    Largest wall ``|j_en|`` of grid states pinned by either separated branch.

    The pinned field is ``sin^2(pi xi)(1 + xi)`` (value and slope vanish at both
    walls); its partner is left free. Derivatives are one-sided, so the wall
    current is a pure discretization error.
    """
    xi = (grid.x - grid.a) / grid.length
    pinned = (np.sin(math.pi * xi) ** 2 * (1.0 + xi)).astype(complex)
    free = (2.0 + np.cos(math.pi * xi)).astype(complex)
    kinetic = units.hbar ** 2 / (2 * units.m)
    worst = 0.0
    for phi, phi_dot in ((pinned, free), (free, pinned)):
        dphi = first_derivative(phi, grid.spacing)
        dphi_dot = first_derivative(phi_dot, grid.spacing)
        j_en = -kinetic * (np.conj(dphi) * phi_dot - np.conj(phi) * dphi_dot)
        worst = max(worst, float(abs(j_en[0])), float(abs(j_en[-1])))
    return worst


def _parse_complex(value: Any, where: str) -> complex:
    if isinstance(value, bool):
        raise ScenarioParseError(f"{where}: expected a number or [re, im]")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    raise ScenarioParseError(f"{where}: expected a number or [re, im], got {value!r}")


def _parse_matrix(value: Any, rows: int, cols: int, where: str) -> np.ndarray:
    if not isinstance(value, list) or (rows and len(value) != rows):
        raise ScenarioParseError(f"{where}: expected {rows or 'a list of'} rows")
    parsed = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != cols:
            raise ScenarioParseError(f"{where}[{i}]: expected {cols} entries")
        parsed.append([_parse_complex(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    return np.array(parsed, dtype=complex).reshape(len(parsed), cols)


def parse_bc_document(data: Any):
    """
    Boundary relation described by a classify input document.

    Exactly one of ``transfer``, ``n_matrix``, ``separated``, ``relation`` or
    ``named`` must be present; ``length`` optionally sets the interval length.
    Complex entries are numbers or ``[re, im]`` pairs.

    Returns:
        ``(relation, length)`` with ``length`` None when not given

    Raises:
        ScenarioParseError: On any malformed document
    """
    if not isinstance(data, dict):
        raise ScenarioParseError("boundary document must be a JSON object")
    keys = [k for k in ('transfer', 'n_matrix', 'separated', 'relation', 'named') if k in data]
    unknown = sorted(set(data) - {'transfer', 'n_matrix', 'separated', 'relation', 'named', 'length'})
    if unknown:
        raise ScenarioParseError(f"unknown key(s) in boundary document: {', '.join(unknown)}", keys=unknown)
    if len(keys) != 1:
        raise ScenarioParseError("boundary document needs exactly one of transfer, n_matrix, separated, "
                                 "relation or named")
    length = data.get('length')
    if length is not None and (isinstance(length, bool) or not isinstance(length, (int, float)) or length <= 0):
        raise ScenarioParseError("length must be a positive number")

    kind = keys[0]
    body = data[kind]
    try:
        if kind == 'transfer':
            return Complex2x2.from_array(_parse_matrix(body, 2, 2, 'transfer')), length
        if kind == 'n_matrix':
            if not isinstance(body, dict) or set(body) != {'mu', 'm0', 'm1', 'm3'}:
                raise ScenarioParseError("n_matrix needs exactly mu, m0, m1 and m3")
            params = NMatrixParams(**{k: float(v) for k, v in body.items()})
            if params.norm_residual > 1e-9 and abs(params.m1) > 0:
                # non-unitary input is classified through its raw transfer matrix
                return n_to_transfer(params, require_unit_norm=False).matrix, length
            return params, length
        if kind == 'separated':
            if not isinstance(body, dict) or set(body) != {'m0_sign'}:
                raise ScenarioParseError("separated needs exactly m0_sign")
            return SeparatedBcParams(m0_sign=body['m0_sign']), length
        if kind == 'relation':
            if not isinstance(body, dict) or 'rows' not in body or set(body) - {'rows', 'acts_on'}:
                raise ScenarioParseError("relation needs rows and optionally acts_on")
            rows = _parse_matrix(body['rows'], 0, 4, 'relation.rows')
            return BoundaryRelation(rows, body.get('acts_on', 'phi')), length
        if body not in NAMED_RELATIONS:
            raise ScenarioParseError(f"named must be one of {', '.join(sorted(NAMED_RELATIONS))}")
        return NAMED_RELATIONS[body](), length
    except (InvalidInputError, InvalidParameterError, TypeError, ValueError) as e:
        raise ScenarioParseError(f"invalid {kind} description: {e}") from e


def load_bc_document(path: str):
    """Read and parse a classify input file"""
    file_path = Path(path)
    if not file_path.exists():
        raise ConfigurationError(f"boundary description not found: {path}", path=str(path))
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(f"{path} is not valid JSON: {e.msg} (line {e.lineno})", path=str(path))
    return parse_bc_document(data)


class VerificationService:
    """Runs the invariant suites for one scenario"""

    def __init__(self, scenario: Scenario, out_dir: Optional[str] = None, timestamp: bool = True,
                 scenario_file: Optional[str] = None):
        self.scenario = scenario
        self.scenario_file = scenario_file
        self.out_dir = out_dir
        self.timestamp = timestamp
        self.units = scenario.units_config()
        self.grid = scenario.build_grid()
        self.sign = MajoranaSign.parse(scenario.majorana_sign)

    def tol(self, name: str) -> float:
        return self.scenario.tolerances.get(name)

    # -- plumbing -------------------------------------------------------------

    def _new_report(self, command: str) -> InvariantReport:
        provenance = {
            'seed': self.scenario.seed,
            'config_hash': compute_config_hash(self.scenario.to_dict()),
        }
        if self.scenario_file:
            provenance['scenario_file'] = os.path.basename(self.scenario_file)
            provenance['scenario_file_hash'] = compute_file_hash(self.scenario_file)
        return InvariantReport(command=command, provenance=provenance)

    def _artifact(self, report: InvariantReport, name: str) -> Optional[str]:
        if not self.out_dir:
            return None
        report.artifacts.append(name)
        return os.path.join(self.out_dir, name)

    def _finish(self, report: InvariantReport) -> InvariantReport:
        if self.out_dir:
            report.save(self.out_dir, include_timestamp=self.timestamp)
        logger.performance(report.command)
        failed = len(report.failures)
        logger.info(f"{report.command}: {len(report.rows) - failed}/{len(report.rows)} rows pass",
                    data={'failed': [row.check for row in report.failures]})
        return report

    def twisted_class(self) -> Optional[BcClass]:
        kind = self.scenario.bc.kind
        if kind == 'Periodic':
            return BcClass.periodic()
        if kind == 'Antiperiodic':
            return BcClass.antiperiodic()
        return None

    def _state_class(self, report: InvariantReport) -> BcClass:
        """Walls used by the state-based rows; non-twisted scenarios fall back to the branch limit."""
        bc = self.twisted_class()
        if bc is not None:
            return bc
        lower = self.scenario.bc.kind == 'FluxBalanced' and self.scenario.bc.branch == 'lower'
        bc = BcClass.periodic() if lower else BcClass.antiperiodic()
        report.add(ReportRow.observation(
            'state walls', f"state rows use {bc.label()} walls for bc kind {self.scenario.bc.kind}"))
        return bc

    def scenario_transfer(self) -> Optional[Complex2x2]:
        """Transfer matrix of the configured relation (not required to be unitary)."""
        bc = self.scenario.bc
        if bc.kind == 'Periodic':
            return IDENTITY
        if bc.kind == 'Antiperiodic':
            return -IDENTITY
        if bc.kind == 'FluxBalanced':
            return TransferMatrixV.flux_balanced(bc.mu, Branch(bc.branch)).matrix
        if bc.kind == 'NMatrix':
            params = NMatrixParams(mu=bc.mu, m0=bc.m0, m1=bc.m1, m3=bc.m3)
            return n_to_transfer(params, require_unit_norm=False).matrix
        return None

    def energy_window(self) -> Tuple[float, float]:
        solver = self.scenario.solver
        if solver.energy_window is not None:
            return float(solver.energy_window[0]), float(solver.energy_window[1])
        k_top = (2 * solver.n_max + 2.5) * math.pi / self.grid.length
        return self.units.rest_energy, float(self.units.energy(k_top))

    # -- constrain ------------------------------------------------------------

    def constrain(self) -> InvariantReport:
        """Derivation chain: unitarity, flux balance, parity, separated branch, Schrodinger baseline."""
        report = self._new_report('constrain')
        solver = self.scenario.solver
        algebra = self.tol('algebra')
        length = self.grid.length

        with logger.timed_operation('constrain'):
            failures, worst_det = unitary_symmetric_sweep(solver.random_trials, self.scenario.seed, algebra)
            report.add(ReportRow.flag('N unitary and symmetric',
                                      f"{solver.random_trials} random N matrices are unitary and symmetric",
                                      failures == 0))
            report.add(ReportRow.at_most('det N', "det N = exp(2i mu)", worst_det, algebra))

            mu_samples = np.linspace(0.0, math.pi, solver.mu_samples + 2)[1:-1]
            flux = solve_flux_constraint(mu_samples, max_workers=solver.max_workers)
            report.add(ReportRow.at_most('m3=0', "flux balance forces m3 = 0",
                                         max(abs(s.params.m3) for s in flux), algebra))
            report.add(ReportRow.at_most('m0+cos(mu)=0', "flux balance forces m0 = -cos(mu)",
                                         max(abs(s.params.m0 + math.cos(s.params.mu)) for s in flux), algebra))
            report.add(ReportRow.at_most('flux balance residual', "V^dagger W^dagger W V = W^dagger W",
                                         max(s.residual for s in flux), algebra))
            report.add(ReportRow.at_most('det V = 1', "flux-balanced transfer matrices are unimodular",
                                         max(abs(s.transfer.det - 1.0) for s in flux), algebra))
            report.add(ReportRow.at_most('numeric flux roots', "residual minimization finds the closed form",
                                         max(s.numeric_deviation for s in flux), 1e-8))

            off_axis = [s for s in flux if abs(s.params.mu - math.pi / 2) > PARITY_AXIS_TOL]
            mismatched, worst_mu = 0, 0.0
            for sol in flux[::REPRESENTATION_STRIDE]:
                verdicts = [classify_bc(r, length) for r in (sol.params, sol.transfer, sol.transfer.matrix)]
                on_axis = abs(sol.params.mu - math.pi / 2) <= PARITY_AXIS_TOL
                expected = verdicts[0].kind if on_axis else BcKind.FLUX_BALANCED
                if any(not verdicts[0].same_class(v) for v in verdicts[1:]) or verdicts[0].kind is not expected:
                    mismatched += 1
                    continue
                worst_mu = max(worst_mu, abs(verdicts[0].mu - sol.params.mu))
            report.add(ReportRow.flag('representation independence',
                                      "N, V and raw-matrix inputs classify identically", mismatched == 0))
            report.add(ReportRow.at_most('recovered mu', "classification recovers mu of flux-balanced members",
                                         worst_mu, 1e-9))

            parity = solve_parity_constraint()
            upper, lower = parity.solutions
            report.add(ReportRow.at_most('parity root', "the only parity-invariant member has mu = pi/2",
                                         abs(parity.mu - math.pi / 2), algebra))
            report.add(ReportRow.at_most('upper branch V=-I', "upper branch collapses to V = -I",
                                         max_abs_diff(upper.matrix, -IDENTITY), algebra))
            report.add(ReportRow.at_most('lower branch V=+I', "lower branch collapses to V = +I",
                                         max_abs_diff(lower.matrix, IDENTITY), algebra))
            report.add(ReportRow.at_most('V^2 = I', "parity-invariant transfer matrices square to I",
                                         max(parity_residual(v) for v in parity.solutions), algebra))
            report.add(ReportRow.at_least('parity excludes mu != pi/2', "V^2 != I away from mu = pi/2",
                                          min((parity_residual(s.transfer) for s in off_axis), default=math.inf),
                                          DISCRIMINATION_FLOOR))

            separated = separated_branch_analysis(seed=self.scenario.seed)
            exact = all(p.mu == 0.0 and p.m3 == 0.0 and abs(p.m0) == 1.0 for p in separated.params)
            report.add(ReportRow.flag('separated branch parameters', "m1 = 0 leaves m0 = +-1, mu = 0, m3 = 0",
                                      exact))
            report.add(ReportRow.at_most('separated wall balance', "equal wall currents force m3 sin(mu) = 0",
                                         separated.constraint_residual, algebra))
            report.add(ReportRow.flag('separated impenetrable', "the m1 = 0 survivors confine the particle",
                                      separated.impenetrable))
            report.add(ReportRow.flag('separated non-members', "neither separated relation is in the KFG family",
                                      all(b.membership is None for b in separated.branches)))
            coarse = separated_wall_current(self.grid, self.units)
            fine = separated_wall_current(self.grid.refined(), self.units)
            report.add(ReportRow.at_least('separated wall current order',
                                          "wall j_en of pinned grid states converges to zero",
                                          convergence_order(coarse, fine), self.tol('order')))

            angles = schrodinger_parity_restriction()
            baseline = (len(angles) == 2 and abs(angles[0]) <= 1e-12 and abs(angles[1] - math.pi) <= 1e-12)
            report.add(ReportRow.flag('Schrodinger parity restriction',
                                      "parity leaves theta in {0, pi} for the Schrodinger family", baseline))

            survivors = sorted({classify_bc(v, length).kind.value for v in parity.solutions})
            report.add(ReportRow.flag('final BC set', "only the periodic and antiperiodic conditions survive",
                                      survivors == [BcKind.ANTIPERIODIC.value, BcKind.PERIODIC.value]))

        report.details.update({
            'mu_samples': len(mu_samples),
            'parity_mu': parity.mu,
            'parity_roots_scanned': parity.roots_found,
            'separated_relations': separated.kfg_bc_descriptions,
            'schrodinger_angles': angles,
            'final_bc_set': survivors,
            'separated_wall_current': {'coarse': coarse, 'fine': fine},
        })
        return self._finish(report)

    # -- classify -------------------------------------------------------------

    def _scenario_relation(self):
        kind = self.scenario.bc.kind
        if kind == 'Periodic':
            return BoundaryRelation.periodic()
        if kind == 'Antiperiodic':
            return BoundaryRelation.antiperiodic()
        return self.scenario.bc_relation()

    def classify(self, input_path: Optional[str] = None) -> Tuple[InvariantReport, BcClass]:
        """Classify a boundary description file, or the scenario's own relation when none is given."""
        report = self._new_report('classify')
        length = self.grid.length
        if input_path:
            relation, given = load_bc_document(input_path)
            length = given or length
            report.details['input'] = os.path.basename(input_path)
        else:
            relation = self._scenario_relation()

        verdict = classify_bc(relation, length)
        report.details['classification'] = verdict.to_dict()
        report.add(ReportRow.observation('class', verdict.label()))
        if verdict.membership is not None:
            params = verdict.membership
            report.add(ReportRow.at_most('membership reconstruction', "U reproduces the boundary subspace",
                                         params.reconstruction_residual, self.tol('reconstruction')))
            report.add(ReportRow.at_most('membership unitarity', "reconstructed U is unitary",
                                         params.unitarity_residual, self.tol('reconstruction')))
        return self._finish(report), verdict

    # -- spectrum -------------------------------------------------------------

    def _spectrum(self) -> Tuple[SpectrumResult, Any, bool]:
        """``(result, oracle relation, assert domain)`` for the configured relation."""
        solver = self.scenario.solver
        bc = self.twisted_class() or self.scenario.bc_class()
        if bc.is_twisted:
            return analytic_spectrum(bc, solver.n_max, self.grid, self.units), bc, True
        if bc.kind is not BcKind.FLUX_BALANCED:
            raise UnsupportedBoundaryError(f"no spectrum solver for {bc.label()}")
        result = solve_modes_family(bc.mu, bc.branch, self.energy_window(), self.grid, self.units,
                                    max_workers=solver.max_workers)
        return result, TransferMatrixV.flux_balanced(bc.mu, bc.branch), abs(bc.mu - math.pi / 2) <= 1e-12

    def spectrum(self) -> InvariantReport:
        report = self._new_report('spectrum')
        solver = self.scenario.solver
        with logger.timed_operation('spectrum'):
            result, relation, assert_domain = self._spectrum()

        report.add(ReportRow.flag('modes found', f"{result.label} has modes in range", len(result) > 0))
        if len(result):
            entries = result.entries
            report.add(ReportRow.at_most('quantization residual', "every mode solves the boundary determinant",
                                         max(e.quantization_residual for e in entries), self.tol('quantization')))
            report.add(ReportRow.at_most('flux residual', "j_en(b) = j_en(a) for every mode",
                                         max(e.flux_residual for e in entries), self.tol('flux')))
            domain = max(e.domain_residual for e in entries)
            if assert_domain:
                report.add(ReportRow.at_most('domain residual', "modes obey Phi(b) = V Phi(a) and Phi'(b) = V Phi'(a)",
                                             domain, self.tol('domain')))
            else:
                report.add(ReportRow.observation(
                    'domain residual', "|cot(mu)| scale mismatch of FV transfer relations for mu != pi/2", domain))
            self._oracle_rows(report, relation, result.ks[:ORACLE_MODES])
            if result.branch is not None and not assert_domain and result.mu is not None:
                twin = BcClass.periodic() if result.branch is Branch.LOWER else BcClass.antiperiodic()
                reference = analytic_spectrum(twin, solver.n_max, self.grid, self.units).ks
                count = min(len(reference), len(result))
                report.add(ReportRow.observation(
                    'family vs twisted spectrum', f"wavenumbers agree with {twin.label()} (mu independent)",
                    float(np.max(np.abs(result.ks[:count] - reference[:count]))) if count else None))

        report.details.update({'label': result.label, 'notes': list(result.notes), 'rows': result.rows()})
        path = self._artifact(report, 'spectrum.csv')
        if path:
            write_spectrum_csv(result, path)
            if len(result):
                self._write_mode_fields(report, result, relation)
        return self._finish(report)

    def _oracle_rows(self, report: InvariantReport, relation, ks: np.ndarray):
        n = self.scenario.solver.eigensolver_n
        fine = Grid(self.grid.a, self.grid.b, n)
        coarse = Grid(self.grid.a, self.grid.b, (n - 1) // 2 + 1)
        errors = fd_relative_errors(relation, fine, ks)
        report.add(ReportRow.at_most('finite-difference oracle', f"stencil eigenvalues match k^2 at n={n}",
                                     float(np.max(errors)), self.tol('fd_relative')))
        positive = [k for k in ks if k > 0]
        if positive:
            e_fine = float(np.max(fd_relative_errors(relation, fine, positive)))
            e_coarse = float(np.max(fd_relative_errors(relation, coarse, positive)))
            order = convergence_order(e_coarse, e_fine, coarse.spacing / fine.spacing)
            report.add(ReportRow.at_least('oracle order', "stencil error shrinks at second order",
                                          order, self.tol('order')))

    def _write_mode_fields(self, report: InvariantReport, result: SpectrumResult, relation):
        first = result.entries[0]
        bc = relation if isinstance(relation, BcClass) else None
        state, state_dot, _ = stationary_mode(first.k, first.e_plus, self.grid, self.units, bc)
        write_field_csv(state, self._artifact(report, 'mode_0_field.csv'))
        write_observable_csv(energy_current_j_en(state, state_dot, self.units),
                             self._artifact(report, 'mode_0_j_en.csv'))

    # -- verify ---------------------------------------------------------------

    def verify(self) -> InvariantReport:
        """Property suite over Majorana states, boundary functionals, modes, tensors and membership."""
        report = self._new_report('verify')
        bc = self._state_class(report)
        with logger.timed_operation('verify'):
            self._verify_majorana(report, bc)
            self._verify_boundary_functionals(report)
            self._verify_family_modes(report)
            self._verify_parity(report, bc)
            self._verify_charges(report, bc)
            self._verify_refinement(report, bc)
            self._verify_membership(report)
        report.details['state_walls'] = bc.label()
        return self._finish(report)

    def _verify_majorana(self, report: InvariantReport, bc: BcClass):
        solver, units = self.scenario.solver, self.units
        worst = dict.fromkeys(('rho', 'j', 'rho_en', 'j_en', 'conjugation', 'walls'), 0.0)
        for trial in range(solver.majorana_trials):
            state = random_state(self.scenario.seed + trial, self.grid, bc, self.sign, solver.n_modes, units)
            state_dot = fv_time_derivative(state, units)
            j_en = energy_current_j_en(state, state_dot, units)
            mirror = charge_conjugate(state)
            values = {
                'rho': np.max(np.abs(density_rho(state).values)),
                'j': np.max(np.abs(current_j(state, units).values)),
                'rho_en': np.max(np.abs(np.imag(energy_density_rho_en(state, state_dot, units).values))),
                'j_en': np.max(np.abs(np.imag(j_en.values))),
                'conjugation': np.max(np.abs(state.components - self.sign.factor * mirror.components)),
                'walls': abs(j_en.at_b - j_en.at_a) / max(1.0, float(np.max(np.abs(j_en.values)))),
            }
            for key, value in values.items():
                worst[key] = max(worst[key], float(value))

        trials = solver.majorana_trials
        report.add(ReportRow.at_most('rho=0', f"Majorana states carry no charge density ({trials} states)",
                                     worst['rho'], self.tol('majorana')))
        report.add(ReportRow.at_most('j=0', "Majorana states carry no current", worst['j'], self.tol('majorana')))
        report.add(ReportRow.at_most('Im rho_en=0', "energy density is real", worst['rho_en'],
                                     self.tol('majorana_imag')))
        report.add(ReportRow.at_most('Im j_en=0', "energy current is real", worst['j_en'],
                                     self.tol('majorana_imag')))
        report.add(ReportRow.at_most('Phi=+-Phi_c', "states equal their charge conjugate up to the sign",
                                     worst['conjugation'], self.tol('majorana')))
        report.add(ReportRow.at_most('j_en(b)=j_en(a)', "wall energy currents balance on grid states",
                                     worst['walls'], self.tol('flux')))

    def _verify_boundary_functionals(self, report: InvariantReport):
        transfer = self.scenario_transfer()
        if transfer is None:
            report.add(ReportRow.observation('f[Phi,Phi]=0', "separated walls have no transfer form"))
            return
        units, grid = self.units, self.grid
        rng = np.random.default_rng(self.scenario.seed)
        v = transfer.array
        f_worst = flux_worst = 0.0
        for _ in range(BOUNDARY_TRIALS):
            # rows: Phi, Phi', Phi_dot, Phi_dot' at a
            at_a = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
            at_b = at_a @ v.T
            state = _interpolated_state(grid, at_a[0], at_b[0])
            f = boundary_term_f(state, state, units)
            norm = np.vdot(at_a[0], at_a[0]).real + np.vdot(at_b[0], at_b[0]).real
            f_worst = max(f_worst, abs(f) / (units.hbar * norm))

            j_a = _fv_wall_energy_current(*at_a, units)
            j_b = _fv_wall_energy_current(*at_b, units)
            scale = units.hbar ** 2 / (2 * units.m) * (np.sum(np.abs(at_a) ** 2) + np.sum(np.abs(at_b) ** 2))
            flux_worst = max(flux_worst, abs(j_b - j_a) / scale)

        report.add(ReportRow.at_most('f[Phi,Phi]=0', "momentum boundary functional vanishes on the domain",
                                     f_worst, self.tol('boundary')))
        report.add(ReportRow.at_most('transfer flux balance', "the configured V keeps j_en(b) = j_en(a)",
                                     flux_worst, self.tol('flux')))

    def _verify_family_modes(self, report: InvariantReport):
        solver = self.scenario.solver
        cases = [(mu, branch) for mu in FAMILY_MU_SAMPLES for branch in (Branch.UPPER, Branch.LOWER)]
        bc = self.scenario.bc
        if bc.kind == 'FluxBalanced':
            cases.append((bc.mu, Branch(bc.branch)))
        window = self.energy_window()
        quantization = flux = domain = 0.0
        empty = []
        for mu, branch in cases:
            result = solve_modes_family(mu, branch, window, self.grid, self.units, max_workers=solver.max_workers)
            if not result.entries:
                empty.append(result.label)
                continue
            quantization = max(quantization, max(e.quantization_residual for e in result.entries))
            flux = max(flux, max(e.flux_residual for e in result.entries))
            if abs(mu - math.pi / 2) <= 1e-12:
                domain = max(domain, max(e.domain_residual for e in result.entries))

        report.add(ReportRow.flag('family windows populated', "every sampled member has modes in the window",
                                  not empty))
        report.add(ReportRow.at_most('family quantization', "family modes solve the boundary determinant",
                                     quantization, self.tol('quantization')))
        report.add(ReportRow.at_most('family flux', "family modes keep j_en(b) = j_en(a)", flux, self.tol('flux')))
        report.add(ReportRow.at_most('family domain at pi/2', "modes meet the transfer relations at mu = pi/2",
                                     domain, self.tol('domain')))

    def _verify_parity(self, report: InvariantReport, bc: BcClass):
        units = self.units
        state = random_state(self.scenario.seed, self.grid, bc, self.sign, self.scenario.solver.n_modes, units)
        mirrored = parity_transform(state)
        lhs = parity_transform(apply_fv_hamiltonian(state, units)).components
        rhs = apply_fv_hamiltonian(mirrored, units).components
        scale = max(float(np.max(np.abs(lhs))), 1e-300)
        report.add(ReportRow.at_most('parity commutation', "reflection commutes with the FV Hamiltonian",
                                     float(np.max(np.abs(lhs - rhs))) / scale, self.tol('reconstruction')))
        walls = max(hamiltonian_domain_check(mirrored, IDENTITY.scale(bc.twist)))
        report.add(ReportRow.at_most('parity keeps walls', "reflected states obey the same wall relation",
                                     walls, self.tol('boundary')))
        transfer_row = self.transfer_parity_row()
        if transfer_row is not None:
            report.add(transfer_row)

    def transfer_parity_row(self) -> Optional[ReportRow]:
        """``||V^2 - I||`` of the configured transfer matrix; parity holds only at mu = pi/2."""
        transfer = self.scenario_transfer()
        if transfer is None:
            return None
        residual = max_abs_diff(mat_mul(transfer, transfer), IDENTITY)
        bc = self.scenario.bc
        mu = math.pi / 2 if bc.kind in ('Periodic', 'Antiperiodic') else bc.mu
        if abs(mu - math.pi / 2) <= 1e-12:
            return ReportRow.at_most('parity of configured V', "V^2 = I at mu = pi/2", residual, self.tol('boundary'))
        return ReportRow.at_least('parity of configured V', "V^2 != I away from mu = pi/2", residual,
                                  DISCRIMINATION_FLOOR)

    def _verify_charges(self, report: InvariantReport, bc: BcClass):
        units = self.units
        kfg = _random_kfg(self.scenario.seed, self.grid, bc, self.sign, self.scenario.solver.n_modes, units)
        later = evolve_spectral_exact(kfg, self.grid.length / units.c, bc, units, dispersion='lattice')

        def charges(level: KfgState):
            state, state_dot = _fv_pair(level, units)
            return integral_charges(state, state, state_dot, state_dot, units)

        q0, e0 = charges(kfg)
        q1, e1 = charges(later)
        report.add(ReportRow.at_most('<<Phi,Phi>>=0', "Majorana states have zero indefinite norm",
                                     max(abs(q0), abs(q1)), self.tol('majorana')))
        report.add(ReportRow.at_most('energy charge conserved', "<<Phi, E Phi>> is constant in time",
                                     abs(e1 - e0) / max(abs(e0), 1e-300), self.tol('invariance')))

    def _levels(self, grid: Grid, bc: BcClass, offsets: Sequence[int], dispersion: str) -> Tuple[float, List[KfgState]]:
        h = self.scenario.solver.dt_factor * grid.spacing / self.units.c
        kfg = _random_kfg(self.scenario.seed, grid, bc, self.sign, self.scenario.solver.n_modes, self.units)
        return h, [evolve_spectral_exact(kfg, j * h, bc, self.units, dispersion) for j in offsets]

    def _refinement_residuals(self, grid: Grid, bc: BcClass) -> Dict[str, float]:
        units = self.units
        h, levels = self._levels(grid, bc, (-2, -1, 0, 1, 2), 'continuum')
        center = levels[2]
        exact = tensor_fields(center, units)
        stepped = tensor_fields(center, units, prev=levels[1], next_=levels[3], dt=h)

        pairs = [_fv_pair(level, units) for level in levels]
        rho_en = [energy_density_rho_en(s, d, units) for s, d in pairs]
        j_en = [energy_current_j_en(s, d, units) for s, d in pairs]
        rho = [density_rho(s) for s, _ in pairs]
        j = [current_j(s, units) for s, _ in pairs]

        h_lattice, lattice = self._levels(grid, bc, (0, 1, 2), 'lattice')
        lattice_pairs = [_fv_pair(level, units) for level in lattice]
        balance = energy_balance_residual([energy_density_rho_en(s, d, units) for s, d in lattice_pairs],
                                          [energy_current_j_en(s, d, units) for s, d in lattice_pairs],
                                          h_lattice, grid)
        return {
            'relation_exact': exact.relation_residual,
            'symmetry': exact.symmetry_residual,
            'relation': stepped.relation_residual,
            'divergence': stepped.divergence_residual,
            'energy_continuity': continuity_residual(rho_en, j_en, h, grid),
            'charge_continuity': continuity_residual(rho, j, h, grid),
            'energy_balance': balance,
        }

    def _verify_refinement(self, report: InvariantReport, bc: BcClass):
        coarse = self._refinement_residuals(self.grid, bc)
        fine = self._refinement_residuals(self.grid.refined(), bc)
        order = self.tol('order')

        report.add(ReportRow.at_most('K-T relation', "K and T differ by a total time derivative",
                                     coarse['relation_exact'], self.tol('reconstruction')))
        report.add(ReportRow.at_most('K^01=K^10', "K is symmetric for Majorana fields",
                                     coarse['symmetry'], self.tol('algebra')))
        for key, claim in (('relation', "K-T relation with time differences converges"),
                           ('divergence', "d_mu K^mu_0 = 0 converges"),
                           ('energy_continuity', "d_t rho_en + d_x j_en = 0 converges")):
            report.add(ReportRow.at_least(f'{key} order', claim,
                                          convergence_order(coarse[key], fine[key]), order))
        report.add(ReportRow.at_most('charge continuity', "d_t rho + d_x j = 0 (trivially for Majorana fields)",
                                     coarse['charge_continuity'], self.tol('majorana')))
        report.add(ReportRow.at_most('energy balance', "d/dt int(rho_en) = -(j_en(b) - j_en(a))",
                                     coarse['energy_balance'], self.tol('boundary')))
        report.details['refinement'] = {'coarse': coarse, 'fine': fine}

    def _verify_membership(self, report: InvariantReport):
        tol = self.tol('reconstruction')
        for name, relation in (('periodic', BoundaryRelation.periodic()),
                               ('antiperiodic', BoundaryRelation.antiperiodic())):
            params = kfg_family_membership(relation.subspace(), self.grid.length)
            report.add(ReportRow.flag(f'{name} member', f"{name} walls belong to the KFG family", params is not None))
            if params is None:
                continue
            report.add(ReportRow.at_most(f'{name} n2=0', "reconstructed n2 vanishes", abs(params.n2), tol))
            report.add(ReportRow.at_most(f'{name} reconstruction', "U reproduces the boundary subspace",
                                         params.reconstruction_residual, tol))
            report.add(ReportRow.at_most(f'{name} unitarity', "reconstructed U is unitary",
                                         params.unitarity_residual, tol))

    # -- evolve ---------------------------------------------------------------

    def evolve(self) -> InvariantReport:
        """Leapfrog run over ``crossings`` light-crossing times with dt-halving order checks."""
        bc = self.twisted_class()
        if bc is None:
            raise UnsupportedBoundaryError(f"evolve supports Periodic and Antiperiodic walls, got {self.scenario.bc.kind}")
        report = self._new_report('evolve')
        solver, units, grid = self.scenario.solver, self.units, self.grid

        initial = _random_kfg(self.scenario.seed, grid, bc, self.sign, solver.n_modes, units)
        dt = solver.dt_factor * grid.spacing / units.c
        steps = max(2, int(round(solver.crossings * grid.length / units.c / dt)))
        stride = solver.snapshot_stride or max(1, steps // SNAPSHOT_COUNT)

        with logger.timed_operation('evolve'):
            run = evolve_leapfrog(EvolutionRun(initial, bc, dt, steps, stride, solver.cfl_factor), units)
            halved = evolve_leapfrog(EvolutionRun(initial, bc, dt / 2, 2 * steps, 2 * stride, solver.cfl_factor),
                                     units)
            reference = evolve_spectral_exact(initial, steps * dt, bc, units, dispersion='lattice')

        def field_error(state: KfgState) -> float:
            return float(np.max(np.abs(state.phi - reference.phi)) / np.max(np.abs(reference.phi)))

        drift = run.staggered_energy_drift()
        report.add(ReportRow.at_most('energy drift', "leapfrog conserves int(rho_en) over the run",
                                     drift, self.tol('energy_drift')))
        report.add(ReportRow.at_least('full-step energy order', "full-step energy oscillation shrinks as dt^2",
                                      convergence_order(run.full_step_energy_drift(), halved.full_step_energy_drift()),
                                      self.tol('order')))
        errors = (field_error(run.final), field_error(halved.final))
        report.add(ReportRow.at_least('leapfrog order', "leapfrog converges to the exact propagator as dt^2",
                                      convergence_order(*errors), self.tol('order')))
        walls = max((abs(r.j_en_b - r.j_en_a) for r in run.conservation), default=0.0)
        report.add(ReportRow.at_most('wall currents', "j_en(b) = j_en(a) throughout the run", walls, self.tol('flux')))

        stray = 0.0
        for snap in run.snapshots:
            part = snap.state.phi.imag if self.sign is MajoranaSign.PLUS else snap.state.phi.real
            stray = max(stray, float(np.max(np.abs(part))))
        kind = 'real' if self.sign is MajoranaSign.PLUS else 'purely imaginary'
        report.add(ReportRow.at_most('Majorana class kept', f"phi stays {kind} in every snapshot",
                                     stray, self.tol('majorana')))

        check = verify_fv_evolution(run, units)
        report.add(ReportRow.at_most('FV wave equation', "phi1 obeys its first-order wave equation",
                                     check.field_residual, self.tol('reconstruction')))
        report.add(ReportRow.observation('FV wave equation (centered)',
                                         "same residual with snapshot time differences", check.centered_residual))
        opposite = MajoranaSign.MINUS if self.sign is MajoranaSign.PLUS else MajoranaSign.PLUS
        wrong = verify_fv_evolution(run, units, sign=opposite)
        report.add(ReportRow.at_least('opposite sign rejected', "the other sign's wave equation fails",
                                      wrong.field_residual, DISCRIMINATION_FLOOR))

        report.details.update({
            'bc': bc.label(), 'dt': dt, 'steps': steps, 'stride': stride,
            'staggered_drift': drift,
            'full_step_drift': [run.full_step_energy_drift(), halved.full_step_energy_drift()],
            'field_error': list(errors),
        })
        path = self._artifact(report, 'conservation.csv')
        if path:
            write_conservation_csv(run, path)
            report.artifacts.extend(write_snapshots(run, units, self.out_dir, self.scenario.seed))
            write_field_csv(fv_from_kfg(run.final, units), self._artifact(report, 'final_field.csv'))
        return self._finish(report)

    # -- nrlimit --------------------------------------------------------------

    def nrlimit(self) -> InvariantReport:
        """Nonrelativistic scaling of both Majorana wave equations."""
        report = self._new_report('nrlimit')
        units = self.units
        ks = [ratio * units.compton_k for ratio in self.scenario.solver.k_list]
        result = nr_limit_experiment(ks, units, max_workers=self.scenario.solver.max_workers)

        slope_tol = self.tol('slope')
        report.add(ReportRow.within('NR slope (plus)', "bracketed equation residual scales as (hbar k / mc)^2",
                                    result.slope_plus, 2.0, slope_tol))
        report.add(ReportRow.within('NR slope (minus)', "bracketed equation residual scales as (hbar k / mc)^2",
                                    result.slope_minus, 2.0, slope_tol))
        rest = max(nr_residuals(0.0, units, sign).bracket_residual
                   for sign in (MajoranaSign.PLUS, MajoranaSign.MINUS))
        report.add(ReportRow.at_most('rest mode', "the k = 0 mode solves both equations", rest,
                                     self.tol('reconstruction')))
        report.add(ReportRow.at_least('not Schrodinger', "the bare Schrodinger operator leaves an O(1) remainder",
                                      min(r.schrodinger_residual for r in result.rows), SCHRODINGER_FLOOR))
        for row in result.rows:
            report.add(ReportRow.observation(f'bracket residual {row.sign.value} {row.ratio:g}',
                                             "relative residual at hbar k / mc", row.bracket_residual))

        report.details.update(result.to_dict())
        path = self._artifact(report, 'nr_limit.csv')
        if path:
            write_nr_csv(result, path)
        return self._finish(report)
