"""
Unit tests for main entry point module
"""

import argparse
import unittest
from unittest.mock import patch, MagicMock
import sys
import os
from pathlib import Path
import tempfile
import shutil

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from main import HANDLERS, build_scenario, create_parser, finish, main
from src.services.report_service import InvariantReport, ReportRow
from src.utils.error_handler import ConfigurationError, ScenarioParseError, UnsupportedBoundaryError


class TestParser(unittest.TestCase):
    """Test cases for the argument parser"""

    def test_every_subcommand_has_global_flags(self):
        """Test the shared flags parse on each subcommand"""
        parser = create_parser()
        for command in HANDLERS:
            args = parser.parse_args([command, '--seed', '7', '--grid', '64', '--tol-scale', '2',
                                      '--no-timestamp', '--quiet'])
            self.assertEqual(args.command, command)
            self.assertEqual(args.seed, 7)
            self.assertEqual(args.grid, 64)
            self.assertEqual(args.tol_scale, 2.0)
            self.assertTrue(args.no_timestamp)

    def test_classify_input_is_optional(self):
        """Test the positional boundary document"""
        parser = create_parser()
        self.assertIsNone(parser.parse_args(['classify']).input)
        self.assertEqual(parser.parse_args(['classify', 'bc.json']).input, 'bc.json')


class TestBuildScenario(unittest.TestCase):
    """Test cases for scenario resolution from arguments"""

    @patch('src.config.config_manager.load_env_file')
    def test_flags_override_scenario(self, mock_load_env):
        """Test command-line flags win over defaults"""
        args = create_parser().parse_args(['verify', '--seed', '9', '--grid', '64', '--out', 'Elsewhere'])
        scenario = build_scenario(args)
        self.assertEqual(scenario.seed, 9)
        self.assertEqual(scenario.grid.n, 64)
        self.assertEqual(scenario.output_dir, 'Elsewhere')

    @patch('src.config.config_manager.load_env_file')
    def test_invalid_scenario_refused(self, mock_load_env):
        """Test validation errors surface as ConfigurationError"""
        args = create_parser().parse_args(['verify', '--grid', '4'])
        with self.assertRaises(ConfigurationError):
            build_scenario(args)


class TestMain(unittest.TestCase):
    """Test cases for main entry point functionality"""

    def setUp(self):
        """Set up test fixtures"""
        self.original_argv = sys.argv.copy()
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        """Clean up test fixtures"""
        sys.argv = self.original_argv
        shutil.rmtree(self.temp_dir)

    def test_no_command_prints_help(self):
        """Test a bare invocation is a refusal"""
        sys.argv = ['main.py']
        with patch('sys.stdout'):
            self.assertEqual(main(), 2)

    def test_dispatch(self):
        """Test each subcommand reaches its handler"""
        for command in HANDLERS:
            handler = MagicMock(return_value=0)
            sys.argv = ['main.py', command, '--quiet']
            with patch.dict('main.HANDLERS', {command: handler}):
                self.assertEqual(main(), 0)
            handler.assert_called_once()

    def test_errors_map_to_exit_codes(self):
        """Test parse errors exit 3 and refusals exit 2"""
        cases = ((ScenarioParseError("bad json"), 3), (UnsupportedBoundaryError("no solver"), 2),
                 (RuntimeError("unexpected"), 2))
        for error, code in cases:
            sys.argv = ['main.py', 'spectrum', '--quiet']
            with patch.dict('main.HANDLERS', {'spectrum': MagicMock(side_effect=error)}):
                with patch('sys.stderr'):
                    self.assertEqual(main(), code)

    def test_keyboard_interrupt(self):
        """Test cancellation is a refusal"""
        sys.argv = ['main.py', 'verify', '--quiet']
        with patch.dict('main.HANDLERS', {'verify': MagicMock(side_effect=KeyboardInterrupt)}):
            self.assertEqual(main(), 2)

    def test_finish_exit_codes(self):
        """Test a failing row turns into exit code 1"""
        args = argparse.Namespace(quiet=True)
        service = MagicMock(out_dir=None)
        report = InvariantReport('verify')
        report.add(ReportRow.at_most('a', 'claim', 0.0, 1.0))
        self.assertEqual(finish(report, args, service), 0)
        report.add(ReportRow.at_most('b', 'claim', 2.0, 1.0))
        self.assertEqual(finish(report, args, service), 1)


if __name__ == '__main__':
    unittest.main()
