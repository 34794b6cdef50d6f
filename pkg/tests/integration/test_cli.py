"""
Integration tests for the command-line surface

Drives main.main() end to end with the shipped scenarios and checks exit
codes and the files written to the output directory.
"""

import json
import unittest
from unittest.mock import patch
import sys
import os
from pathlib import Path
import tempfile
import shutil

# Add project root to path for imports
PROJECT_ROOT = Path(__file__).parent.parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

import main as cli

SCENARIOS = PROJECT_ROOT / 'scenarios'


class TestCli(unittest.TestCase):
    """End-to-end exit codes and artifacts"""

    def setUp(self):
        """Set up test fixtures"""
        self.original_argv = sys.argv.copy()
        self.temp_dir = tempfile.mkdtemp()
        self.env_patch = patch('src.config.config_manager.load_env_file')
        self.env_patch.start()

    def tearDown(self):
        """Clean up test fixtures"""
        self.env_patch.stop()
        sys.argv = self.original_argv
        shutil.rmtree(self.temp_dir)

    def run_cli(self, *argv):
        sys.argv = ['main.py', *argv, '--out', self.temp_dir, '--no-timestamp', '--quiet']
        with patch('sys.stderr'):
            return cli.main()

    def report(self):
        with open(os.path.join(self.temp_dir, 'report.json'), encoding='utf-8') as f:
            return json.load(f)

    def test_nrlimit_passes(self):
        """Test a passing suite exits 0 and writes its report"""
        self.assertEqual(self.run_cli('nrlimit'), 0)
        data = self.report()
        self.assertEqual(data['command'], 'nrlimit')
        self.assertTrue(data['pass'])
        self.assertTrue(os.path.exists(os.path.join(self.temp_dir, 'nr_limit.csv')))

    def test_reports_are_reproducible(self):
        """Test --no-timestamp gives byte-identical reports"""
        self.run_cli('nrlimit')
        first = Path(self.temp_dir, 'report.json').read_text(encoding='utf-8')
        self.run_cli('nrlimit')
        self.assertEqual(first, Path(self.temp_dir, 'report.json').read_text(encoding='utf-8'))

    def test_classify_shipped_documents(self):
        """Test classification of the example boundary files"""
        self.assertEqual(self.run_cli('classify', str(SCENARIOS / 'bc_identity.json')), 0)
        self.assertEqual(self.report()['details']['classification']['class'], 'Periodic')
        self.assertEqual(self.run_cli('classify', str(SCENARIOS / 'bc_dirichlet_neumann.json')), 0)
        self.assertEqual(self.report()['details']['classification']['class'], 'ConfiningSeparated')

    def test_malformed_classify_input(self):
        """Test a malformed boundary document exits 3"""
        path = os.path.join(self.temp_dir, 'bad.json')
        with open(path, 'w', encoding='utf-8') as f:
            json.dump({'transfer': [[1, 0]]}, f)
        self.assertEqual(self.run_cli('classify', path), 3)
        with open(path, 'w', encoding='utf-8') as f:
            f.write('{"named": ')
        self.assertEqual(self.run_cli('classify', path), 3)

    def test_missing_inputs_are_refused(self):
        """Test missing files exit 2"""
        self.assertEqual(self.run_cli('classify', os.path.join(self.temp_dir, 'absent.json')), 2)
        self.assertEqual(self.run_cli('verify', '--config', os.path.join(self.temp_dir, 'absent.json')), 2)

    def test_malformed_scenario(self):
        """Test unknown scenario keys exit 3"""
        path = os.path.join(self.temp_dir, 'scenario.json')
        with open(path, 'w', encoding='utf-8') as f:
            json.dump({'grid': {'points': 64}}, f)
        self.assertEqual(self.run_cli('nrlimit', '--config', path), 3)

    def test_broken_n_matrix(self):
        """Test a non-unit N matrix fails verify and is refused by spectrum and evolve"""
        config = str(SCENARIOS / 'broken_nmatrix.json')
        self.assertEqual(self.run_cli('verify', '--config', config, '--grid', '65'), 1)
        data = self.report()
        failed = {row['check'] for row in data['rows'] if not row['pass']}
        self.assertIn('transfer flux balance', failed)
        self.assertEqual(self.run_cli('spectrum', '--config', config), 2)
        self.assertEqual(self.run_cli('evolve', '--config', config), 2)

    def test_invalid_override(self):
        """Test a refused scenario value exits 2"""
        self.assertEqual(self.run_cli('nrlimit', '--grid', '4'), 2)

    def test_no_command(self):
        """Test a bare invocation exits 2"""
        sys.argv = ['main.py']
        with patch('sys.stdout'):
            self.assertEqual(cli.main(), 2)


if __name__ == '__main__':
    unittest.main()
