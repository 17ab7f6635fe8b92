"""
This file is part of diffhomog.

Copyright (C) 2024 diffhomog contributors listed in AUTHORS.md.

diffhomog is free software: you can redistribute it and/or modify it under the
terms of the GNU General Public License as published by the Free
Software Foundation, version 3.

diffhomog is distributed in the hope that it will be useful, but WITHOUT ANY
WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A
PARTICULAR PURPOSE.  See the GNU General Public License for more details.

You should have received a copy of the GNU General Public License along
with diffhomog. If not, see <https://www.gnu.org/licenses/>.

---

Test main module.
"""
import json
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pandas as pd

from diffhomog._version import __version__
from diffhomog.cli.main import EXIT_CHECK, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main

C2_VAR_Y0 = 0.49 / 3 * (0.525 / np.pi) ** 2

SMALL_MC = {'eps_list': [0.1, 0.05], 'n_samples': 6, 'grid_points': 11, 'n_batches': 3}


class TestMain(unittest.TestCase):
    """Test the commands through the entry point"""

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def _run(self, command, raw, *extra, out='out'):
        config = self.tmp / f'{command}.json.in'
        config.write_text(json.dumps(raw))
        return main([command, '--config', str(config), '--out', str(self.tmp / out), *extra])

    def _summary(self, command, out='out'):
        with open(self.tmp / out / f'{command}.json', encoding='utf-8') as file:
            return json.load(file)

    def test_astar1d_deterministic_pass(self):
        code = self._run('astar1d', {'model': {'problem': 'C1'}}, '--seed', '5')
        self.assertEqual(code, EXIT_OK)
        summary = self._summary('astar1d')
        self.assertAlmostEqual(summary['results']['a_star'], 1.6, places=12)
        self.assertEqual(summary['results']['var_Y0'], 0.0)
        self.assertEqual(summary['seed'], 5)
        self.assertEqual(summary['version'], __version__)
        self.assertEqual(summary['config']['model']['problem'], 'C1')
        self.assertGreaterEqual(summary['duration_s'], 0.0)
        self.assertTrue(summary['passed'])
        table = pd.read_csv(self.tmp / 'out' / 'astar1d.csv')
        self.assertEqual(len(table), 1)
        self.assertAlmostEqual(table.a_star[0], 1.6, places=12)

    def test_astar1d_random_pass(self):
        self.assertEqual(self._run('astar1d', {}), EXIT_OK)
        results = self._summary('astar1d')['results']
        self.assertAlmostEqual(results['a_star'], 1.6, delta=1e-10)
        self.assertAlmostEqual(results['var_Y0'], C2_VAR_Y0, delta=1e-8)
        self.assertTrue(all(results['assumptions'].values()))

    def test_astar1d_invalid_amplitude_fail(self):
        code = self._run('astar1d', {'model': {'diffeo': {'m': 1.5}}})
        self.assertEqual(code, EXIT_CONFIG)
        self.assertFalse((self.tmp / 'out' / 'astar1d.json').exists())

    def test_unknown_key_fail(self):
        self.assertEqual(self._run('astar1d', {'experiment': {'orders': 4}}), EXIT_CONFIG)

    def test_residual_mc_deterministic_pass(self):
        code = self._run('residual-mc', {'model': {'problem': 'C1'}, 'experiment': SMALL_MC})
        self.assertEqual(code, EXIT_OK)
        table = pd.read_csv(self.tmp / 'out' / 'residual-mc.csv')
        self.assertEqual(list(table.columns), ['eps', 'x', 'emp_var', 'emp_se', 'limit_var'])
        self.assertEqual(len(table), 22)
        np.testing.assert_array_equal(table.emp_var, 0.0)
        np.testing.assert_array_equal(table.limit_var, 0.0)
        self.assertTrue((self.tmp / 'out' / 'residual-mc_rates.csv').exists())
        self.assertNotIn('clt', self._summary('residual-mc')['results'])

    def test_residual_mc_reproducible_pass(self):
        """Same seed, different worker count: identical files."""
        raw = {'experiment': SMALL_MC, 'seed': 21}
        self.assertEqual(self._run('residual-mc', raw, out='serial'), EXIT_OK)
        self.assertEqual(self._run('residual-mc', raw, '--workers', '2', out='pool'), EXIT_OK)
        for name in ('residual-mc.csv', 'residual-mc_rates.csv'):
            self.assertEqual((self.tmp / 'serial' / name).read_bytes(),
                             (self.tmp / 'pool' / name).read_bytes())
        serial, pool = self._summary('residual-mc', 'serial'), self._summary('residual-mc', 'pool')
        self.assertEqual(serial['results'], pool['results'])
        self.assertEqual(serial['checks'], pool['checks'])
        self.assertGreater(pd.read_csv(self.tmp / 'serial' / 'residual-mc.csv').emp_var.max(), 0)

    def test_limit_check_pass(self):
        raw = {'experiment': {'eps': 0.05, 'n_samples': 40}}
        self.assertIn(self._run('limit-check', raw, '--check'), (EXIT_OK, EXIT_CHECK))
        summary = self._summary('limit-check')
        self.assertEqual(summary['results']['n_samples'], 40)
        self.assertEqual(len(summary['checks']), 5)
        table = pd.read_csv(self.tmp / 'out' / 'limit-check.csv')
        self.assertEqual(list(table.columns), ['index', 'leading', 'residual'])

    def test_limit_check_deterministic_fail(self):
        raw = {'model': {'problem': 'C1'}, 'experiment': {'eps': 0.05, 'n_samples': 4}}
        self.assertEqual(self._run('limit-check', raw), EXIT_CONFIG)

    def test_moment_check_pass(self):
        raw = {'model': {'problem': 'C1'},
               'experiment': {'eps_list': [0.1, 0.05], 'n_samples': 4, 'p_list': [1]}}
        self.assertEqual(self._run('moment-check', raw), EXIT_OK)
        table = pd.read_csv(self.tmp / 'out' / 'moment-check.csv')
        self.assertEqual(list(table.columns),
                         ['eps', 'p', 'moment', 'std_err', 'denominator', 'ratio'])
        self.assertTrue(np.all(table.moment < 1e-20))

    def test_failed_check_pass(self):
        raw = {'experiment': {'eps_list': [0.1, 0.05], 'n_samples': 4, 'p_list': [1],
                              'factor': 1e-9}}
        self.assertEqual(self._run('moment-check', raw), EXIT_OK)
        self.assertEqual(self._run('moment-check', raw, '--check'), EXIT_CHECK)
        self.assertFalse(self._summary('moment-check')['passed'])

    def test_corrector_nd_pass(self):
        raw = {'model': {'problem': 'laminate_identity'},
               'experiment': {'n_cells': 1, 'r': 8}}
        self.assertEqual(self._run('corrector-nd', raw, '--check'), EXIT_OK)
        table = pd.read_csv(self.tmp / 'out' / 'corrector-nd.csv')
        self.assertEqual(list(table.columns), ['x1', 'x2', 'w'])
        self.assertEqual(len(table), 64)
        results = self._summary('corrector-nd')['results']
        self.assertEqual(results['direction'], [1.0, 0.0])
        self.assertEqual(results['n_dofs'], 64)
        self.assertAlmostEqual(results['max_abs'], 0.15, delta=0.01)

    def test_corrector_nd_no_convergence_fail(self):
        raw = {'model': {'problem': 'C3'}, 'experiment': {'n_cells': 1, 'r': 4, 'tol': 1e-300}}
        self.assertEqual(self._run('corrector-nd', raw), EXIT_RUNTIME)

    def test_corrector_nd_bad_direction_fail(self):
        raw = {'model': {'problem': 'C3'}, 'experiment': {'n_cells': 1, 'r': 2,
                                                          'direction': [1.0, 0.0, 0.0]}}
        self.assertEqual(self._run('corrector-nd', raw), EXIT_CONFIG)

    def test_astar_convergence_pass(self):
        raw = {'model': {'problem': 'laminate_identity'},
               'experiment': {'n_list': [1, 2], 'n_samples': 2, 'r': 8, 'cross_n_cells': 2,
                              'cross_n_samples': 2, 'cross_r': 16}}
        self.assertEqual(self._run('astar-convergence', raw, '--check'), EXIT_OK)
        summary = self._summary('astar-convergence')
        self.assertEqual(summary['results']['std_decay'], 0.0)
        self.assertIn('cross_validation', summary['results'])
        self.assertIsNone(summary['results']['table'][0]['cauchy_diff'])
        table = pd.read_csv(self.tmp / 'out' / 'astar-convergence.csv')
        self.assertEqual(table.N.tolist(), [1, 2])
        np.testing.assert_allclose(table.A_mean_11, 1.6, rtol=0.02)
        np.testing.assert_array_equal(table.A_std_22, 0.0)

    def test_astar_convergence_bad_list_fail(self):
        raw = {'experiment': {'n_list': [4, 2]}}
        self.assertEqual(self._run('astar-convergence', raw), EXIT_CONFIG)

    def test_bad_arguments_fail(self):
        with self.assertRaises(SystemExit) as cm:
            main(['astar1d', '--workers', '0'])
        self.assertEqual(cm.exception.code, EXIT_CONFIG)
        with self.assertRaises(SystemExit):
            main(['plot'])


# Execute Tests
if __name__ == "__main__":
    TESTS = unittest.TestLoader().loadTestsFromTestCase(TestMain)
    unittest.TextTestRunner(verbosity=2).run(TESTS)
