#!/usr/bin/env python3
"""
KFGM Interval Verifier - Main Entry Point

Batch CLI over the invariant suites: every subcommand loads a scenario,
runs one suite, prints a PASS/FAIL table and writes report.json plus CSV
artifacts to the output directory.
"""

import argparse
import sys
from typing import Any, Dict, Optional

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Import after environment loading
from src.utils.logger import setup_global_logging
from src.utils.error_handler import (
    EXIT_INVARIANT_FAILURE,
    EXIT_OK,
    ErrorCategory,
    error_context,
    exit_code_for,
    setup_global_error_handling,
)

# Setup global logging and error handling
logger = setup_global_logging()
error_handler = setup_global_error_handling(logger)

from src import __version__
from src.config.config_manager import load_scenario, require_valid
from src.config.config_models import Scenario
from src.services.report_service import InvariantReport
from src.services.verification_service import VerificationService


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser with all available options"""
    parser = argparse.ArgumentParser(
        description="Verification suites for the free FV/KFGM Hamiltonian on an interval",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Derive the admissible boundary conditions from scratch
  python main.py constrain

  # Classify a boundary description
  python main.py classify scenarios/bc_dirichlet_neumann.json

  # Spectrum and full property suite for a scenario
  python main.py spectrum --config scenarios/antiperiodic.json --out Output/spectrum
  python main.py verify --config scenarios/antiperiodic.json --seed 7

  # Leapfrog run on a finer grid with relaxed tolerances
  python main.py evolve --grid 512 --tol-scale 10

  # Nonrelativistic scaling
  python main.py nrlimit --quiet

Exit codes: 0 all rows pass, 1 invariant failure, 2 refusal, 3 parse error.
        """
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')

    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    # Helper function to add global flags to subcommands
    def add_global_flags(subparser):
        subparser.add_argument('--config', '-c', help='Scenario JSON file')
        subparser.add_argument('--out', '-o', help='Output directory (default: scenario output_dir)')
        subparser.add_argument('--seed', type=int, help='Random seed override')
        subparser.add_argument('--grid', type=int, help='Grid point count override')
        subparser.add_argument('--tol-scale', type=float, help='Multiply every tolerance by this factor')
        subparser.add_argument('--no-timestamp', action='store_true',
                               help='Omit generated_at so identical runs give identical reports')
        subparser.add_argument('--verbose', '-v', action='store_true', help='Enable verbose output')
        subparser.add_argument('--quiet', '-q', action='store_true', help='Suppress output (except errors)')

    constrain_parser = subparsers.add_parser('constrain', help='Run the boundary-condition derivation chain')
    add_global_flags(constrain_parser)

    classify_parser = subparsers.add_parser('classify', help='Classify a boundary description')
    add_global_flags(classify_parser)
    classify_parser.add_argument('input', nargs='?', help='Boundary description JSON (default: scenario bc)')

    spectrum_parser = subparsers.add_parser('spectrum', help='Stationary spectrum with residual columns')
    add_global_flags(spectrum_parser)

    verify_parser = subparsers.add_parser('verify', help='Full property suite')
    add_global_flags(verify_parser)

    evolve_parser = subparsers.add_parser('evolve', help='Leapfrog time evolution with conservation series')
    add_global_flags(evolve_parser)

    nrlimit_parser = subparsers.add_parser('nrlimit', help='Nonrelativistic scaling of the wave equations')
    add_global_flags(nrlimit_parser)

    return parser


def configure_output(args: argparse.Namespace):
    """Apply --verbose / --quiet to the console handler"""
    if getattr(args, 'quiet', False):
        logger.set_console_level('ERROR')
    elif getattr(args, 'verbose', False):
        logger.set_console_level('DEBUG')


def build_scenario(args: argparse.Namespace) -> Scenario:
    """Resolve and validate the scenario for one invocation"""
    overrides: Dict[str, Any] = {
        'seed': args.seed,
        'output_dir': args.out,
        'grid.n': args.grid,
        'tolerances.scale': args.tol_scale,
    }
    with error_context('load_scenario', ErrorCategory.CONFIGURATION):
        return require_valid(load_scenario(args.config, overrides))


def build_service(args: argparse.Namespace) -> VerificationService:
    scenario = build_scenario(args)
    return VerificationService(scenario, out_dir=scenario.output_dir, timestamp=not args.no_timestamp,
                               scenario_file=args.config)


def print_report(report: InvariantReport, args: argparse.Namespace, out_dir: Optional[str] = None):
    if args.quiet:
        return
    for line in report.summary_lines():
        print(line)
    failed = len(report.failures)
    status = "[SUCCESS] all rows pass" if report.passed else f"[FAILED] {failed} of {len(report.rows)} rows fail"
    print(f"{report.command}: {status}")
    if out_dir:
        print(f"[DIR] Report written to {out_dir}")


def finish(report: InvariantReport, args: argparse.Namespace, service: VerificationService) -> int:
    print_report(report, args, service.out_dir)
    return EXIT_OK if report.passed else EXIT_INVARIANT_FAILURE


def handle_constrain(args: argparse.Namespace) -> int:
    """Handle constrain command"""
    service = build_service(args)
    with error_context('constrain', ErrorCategory.SOLVER):
        report = service.constrain()
    if not args.quiet:
        print(f"[BC] Final boundary set: {', '.join(report.details['final_bc_set'])}")
    return finish(report, args, service)


def handle_classify(args: argparse.Namespace) -> int:
    """Handle classify command"""
    service = build_service(args)
    with error_context('classify', ErrorCategory.PARSE):
        report, verdict = service.classify(args.input)
    if not args.quiet:
        print(f"[CLASS] {verdict.label()}")
        if verdict.membership is not None:
            params = verdict.membership
            print(f"[MEMBER] theta={params.theta:.12g} lambda={params.lam:.12g} "
                  f"n0={params.n0:.12g} n1={params.n1:.12g} n2={params.n2:.12g} n3={params.n3:.12g}")
        else:
            print("[MEMBER] not in the pseudo self-adjoint KFG family")
    return finish(report, args, service)


def handle_spectrum(args: argparse.Namespace) -> int:
    """Handle spectrum command"""
    service = build_service(args)
    with error_context('spectrum', ErrorCategory.SOLVER):
        report = service.spectrum()
    if args.verbose:
        for row in report.details['rows']:
            print(f"  n={row['n']:<3d} k={row['k']:.12g} E={row['E_plus']:.12g}")
    return finish(report, args, service)


def handle_verify(args: argparse.Namespace) -> int:
    """Handle verify command"""
    service = build_service(args)
    with error_context('verify', ErrorCategory.VALIDATION):
        report = service.verify()
    return finish(report, args, service)


def handle_evolve(args: argparse.Namespace) -> int:
    """Handle evolve command"""
    service = build_service(args)
    with error_context('evolve', ErrorCategory.SOLVER):
        report = service.evolve()
    if args.verbose:
        details = report.details
        print(f"[RUN] {details['bc']}: dt={details['dt']:.6g}, {details['steps']} steps, stride {details['stride']}")
    return finish(report, args, service)


def handle_nrlimit(args: argparse.Namespace) -> int:
    """Handle nrlimit command"""
    service = build_service(args)
    with error_context('nrlimit', ErrorCategory.SOLVER):
        report = service.nrlimit()
    return finish(report, args, service)


HANDLERS = {
    'constrain': handle_constrain,
    'classify': handle_classify,
    'spectrum': handle_spectrum,
    'verify': handle_verify,
    'evolve': handle_evolve,
    'nrlimit': handle_nrlimit,
}


def main() -> int:
    """Main entry point"""
    parser = create_parser()
    args = parser.parse_args()

    if not args.command:
        parser.print_help()
        return 2

    configure_output(args)
    logger.info(f"Starting {args.command}", data={'args': vars(args)})

    try:
        return HANDLERS[args.command](args)
    except KeyboardInterrupt:
        if not args.quiet:
            print("\nOperation cancelled by user")
        return 2
    except Exception as e:
        code = exit_code_for(e)
        print(f"[ERROR] {e}", file=sys.stderr)
        logger.debug(f"{args.command} exited with code {code}", data={'error_type': type(e).__name__})
        return code


if __name__ == '__main__':
    sys.exit(main())
