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

Test solution module.
"""
import unittest

import numpy as np

from diffhomog.exact1d.homog import a_star, solve_homogenized
from diffhomog.exact1d.solution import (cell_variables, corrector_w, corrector_w_prime,
                                        derivative_decompose, error_norms, h1_corrector_error,
                                        psi_integral, residual_decompose, solve_oscillatory)
from diffhomog.model.diffeo import DiffeoLaw, DiffeoPath, sample_path
from diffhomog.model.fields import PeriodicScalarField, SourceTerm
from diffhomog.model.problem import canonical_problem
from diffhomog.model.seeding import stream_seed

LAWS = [DiffeoLaw(0.7, 'uniform', 'sine'), DiffeoLaw(0.7, 'uniform_positive', 'sine'),
        DiffeoLaw(0.6, 'two_point', 'haar'), DiffeoLaw(0.8, 'uniform_positive', 'ramp')]
SOURCES = [SourceTerm.constant(1.0), SourceTerm.sine(),
           SourceTerm.piecewise_constant([0.0, 0.4], [1.0, -2.0])]


def _random_config(idx):
    """A law, path, source and eps drawn from the index."""
    rng = np.random.default_rng(idx)
    law = LAWS[idx % len(LAWS)]
    path = sample_path(law, (0, 1), stream_seed(99, idx))
    src = SOURCES[idx % len(SOURCES)]
    eps = 1.0 / rng.uniform(3.0, 60.0)
    return law, path, src, eps


class TestOscillatory(unittest.TestCase):
    """Test solve_oscillatory"""

    def test_constant_coefficient_pass(self):
        """Without oscillations u_eps is the homogenized solution."""
        law = LAWS[0]
        a_per = PeriodicScalarField.constant(2.0)
        path = sample_path(law, (0, 1), 3)
        sol = solve_oscillatory(path, a_per, SourceTerm.constant(1.0), 0.1)
        x = np.linspace(0, 1, 11)
        np.testing.assert_allclose(sol(x), x * (1 - x) / 4, atol=1e-13)
        self.assertAlmostEqual(sol.c_eps, 0.5, places=13)

    def test_c1_closed_form_pass(self):
        prob = canonical_problem('C1')
        path = sample_path(prob.law, (0, 1), 0)
        sol = solve_oscillatory(path, prob.a_per, prob.source, 0.5)
        # coefficient 1, 4, 1, 4 on quarters: c = 0.265625 / 0.625
        self.assertAlmostEqual(sol.c_eps, 0.425, places=14)
        np.testing.assert_allclose(sol(np.array([0.1, 0.3, 0.9])), [0.0375, 0.076875, 0.013125],
                                   atol=1e-14)

    def test_boundary_and_flux_pass(self):
        """u(0) = u(1) = 0 and a u' + F = c_eps against finite differences."""
        step = 1e-4
        checked = 0
        for idx in range(20):
            _, path, src, eps = _random_config(idx)
            if src.name == 'sine':
                src = SourceTerm.constant(2.0)
            a_per = PeriodicScalarField.two_phase(1.0, 4.0, split=0.35)
            sol = solve_oscillatory(path, a_per, src, eps)
            self.assertEqual(float(sol(0.0)), 0.0)
            self.assertLessEqual(abs(float(sol(1.0))), 1e-10)
            x = np.random.default_rng(1000 + idx).uniform(0.01, 0.99, 10)
            smooth = ((sol.coefficient(x - step) == sol.coefficient(x + step))
                      & (np.abs(x - 0.4) > 2 * step))
            fd = (sol(x + step) - sol(x - step)) / (2 * step)
            np.testing.assert_allclose(fd[smooth], sol.derivative(x)[smooth], atol=1e-8)
            flux = sol.coefficient(x) * sol.derivative(x) + src.primitive(x)
            np.testing.assert_allclose(flux, sol.c_eps, atol=1e-12)
            checked += int(np.sum(smooth))
        self.assertGreater(checked, 150)

    def test_invalid_fail(self):
        prob = canonical_problem('C2')
        path = sample_path(prob.law, (0, 1), 1)
        with self.assertRaises(ValueError):
            solve_oscillatory(path, prob.a_per, prob.source, 0.0)
        sol = solve_oscillatory(path, prob.a_per, prob.source, 0.1)
        with self.assertRaises(ValueError):
            sol(1.5)

    def test_fixed_path_pass(self):
        """A path with prescribed cells covering phi^{-1}(1/eps) is enough."""
        law = LAWS[0]
        path = DiffeoPath.from_cells(law, [0.7, -0.3, 0.1, 0.0, 0.5])
        sol = solve_oscillatory(path, PeriodicScalarField.two_phase(), SourceTerm.constant(1.0),
                                0.25)
        self.assertLessEqual(abs(float(sol(1.0))), 1e-12)
        self.assertAlmostEqual(sol.s_end, 4.0, places=11)


class TestCorrector(unittest.TestCase):
    """Test corrector_w"""

    def test_c1_pass(self):
        prob = canonical_problem('C1')
        hom = a_star(prob.law, prob.a_per)
        path = sample_path(prob.law, (0, 1), 0)
        self.assertAlmostEqual(corrector_w(path, hom, prob.a_per, 0.5), 0.3, places=14)
        self.assertAlmostEqual(corrector_w(path, hom, prob.a_per, 1.0), 0.0, places=14)
        self.assertEqual(corrector_w(path, hom, prob.a_per, 0.0), 0.0)
        np.testing.assert_allclose(corrector_w(path, hom, prob.a_per, np.array([-0.5, 3.5])),
                                   [0.3, 0.3], atol=1e-14)

    def test_flux_identity_pass(self):
        """a_per(phi^{-1}(y)) (1 + w'(y)) = a_star."""
        prob = canonical_problem('C2prime')
        hom = a_star(prob.law, prob.a_per)
        path = sample_path(prob.law, (0, 1), 8)
        y = np.random.default_rng(4).uniform(0, 6, 100)
        coeff = prob.a_per(path.phi_inverse(y))
        np.testing.assert_allclose(coeff * (1 + corrector_w_prime(path, hom, prob.a_per, y)),
                                   hom.a_star, rtol=1e-13)
        step = 1e-4
        smooth = prob.a_per(path.phi_inverse(y - step)) == prob.a_per(path.phi_inverse(y + step))
        fd = (corrector_w(path, hom, prob.a_per, y + step)
              - corrector_w(path, hom, prob.a_per, y - step)) / (2 * step)
        np.testing.assert_allclose(fd[smooth],
                                   corrector_w_prime(path, hom, prob.a_per, y)[smooth],
                                   atol=1e-8)

    def test_bound_pass(self):
        """|eps w(x/eps)| <= eps a_star sup|psi| M_bound x/eps."""
        prob = canonical_problem('C2')
        hom = a_star(prob.law, prob.a_per)
        path = sample_path(prob.law, (0, 1), 17)
        sup_psi = max(1 - hom.inv_a_star, hom.inv_a_star - 0.25)
        y = np.linspace(0.1, 50, 40)
        bound = hom.a_star * sup_psi * y * prob.law.m_bound
        self.assertTrue(np.all(np.abs(corrector_w(path, hom, prob.a_per, y)) <= bound))


class TestCellVariables(unittest.TestCase):
    """Test cell_variables"""

    def test_monte_carlo_var_y0_pass(self):
        prob = canonical_problem('C2')
        hom = a_star(prob.law, prob.a_per)
        path = sample_path(prob.law, (0, 1), 555)
        cells = cell_variables(path, prob.a_per, hom, 0, 100000)
        self.assertEqual(cells.index[0], 0)
        np.testing.assert_allclose(cells.D.values, path.increments(0, 100000), atol=1e-13)
        yk = cells.Y.values
        # Y_k is affine in X_k
        np.testing.assert_allclose(yk, path.cells(0, 100000) * hom.int_psi_g, atol=1e-13)
        centered = yk - yk.mean()
        std_err = np.sqrt((np.mean(centered ** 4) - np.mean(centered ** 2) ** 2) / yk.size)
        self.assertLess(abs(yk.var(ddof=1) - hom.var_y0), 4 * std_err)
        self.assertLess(abs(yk.mean()), 4 * np.sqrt(hom.var_y0 / yk.size))


class TestDecomposition(unittest.TestCase):
    """Test the residual and derivative decompositions"""

    def test_identity_random_configs_pass(self):
        a_per = PeriodicScalarField.two_phase()
        for idx in range(50):
            law, path, src, eps = _random_config(idx)
            hom = a_star(law, a_per)
            dec = residual_decompose(path, a_per, src, hom, eps)
            self.assertEqual(dec.grid.size, 101)
            self.assertLessEqual(dec.mismatch, 1e-8)
            self.assertLessEqual(dec.c_gap_mismatch, 1e-10)
            self.assertEqual(dec.remainder[0], 0.0)
            self.assertEqual(dec.remainder_direct[0], 0.0)
            np.testing.assert_allclose(dec.residual, dec.leading + dec.remainder, atol=1e-15)
            der = derivative_decompose(solve_oscillatory(path, a_per, src, eps), hom)
            self.assertLessEqual(der.mismatch, 1e-8)

    def test_residual_matches_solutions_pass(self):
        prob = canonical_problem('C2')
        hom = a_star(prob.law, prob.a_per)
        path = sample_path(prob.law, (0, 1), 21)
        sol = solve_oscillatory(path, prob.a_per, prob.source, 0.05)
        grid = np.array([0.0, 0.2, 0.5, 1.0])
        dec = residual_decompose(path, prob.a_per, prob.source, hom, 0.05, grid, sol)
        np.testing.assert_allclose(dec.residual, sol(grid) - solve_homogenized(hom, prob.source,
                                                                                grid), atol=1e-15)
        np.testing.assert_allclose(dec.psi_integral, psi_integral(sol, hom, grid), atol=1e-15)
        np.testing.assert_allclose(hom.a_star * dec.psi_integral[:3],
                                   0.05 * corrector_w(path, hom, prob.a_per, grid[:3] / 0.05),
                                   atol=1e-12)

    def test_invalid_grid_fail(self):
        prob = canonical_problem('C1')
        hom = a_star(prob.law, prob.a_per)
        path = sample_path(prob.law, (0, 1), 0)
        with self.assertRaises(ValueError):
            residual_decompose(path, prob.a_per, prob.source, hom, 0.1, grid=[0.5, 1.5])


class TestErrorNorms(unittest.TestCase):
    """Test error_norms and h1_corrector_error"""

    def test_constant_coefficient_pass(self):
        law = LAWS[1]
        a_per = PeriodicScalarField.constant(3.0)
        hom = a_star(law, a_per)
        path = sample_path(law, (0, 1), 12)
        self.assertLess(h1_corrector_error(path, a_per, SourceTerm.sine(), hom, 0.05), 1e-24)

    def test_periodic_rate_pass(self):
        """Deterministic periodic case at eps = 1/k: the squared H1 error scales like eps^2."""
        prob = canonical_problem('C1')
        hom = a_star(prob.law, prob.a_per)
        path = sample_path(prob.law, (0, 1), 0)
        eps = 1.0 / np.array([10, 20, 40, 80])
        errors = [h1_corrector_error(path, prob.a_per, prob.source, hom, e) for e in eps]
        slope = np.polyfit(np.log(eps), np.log(errors), 1)[0]
        self.assertTrue(1.9 <= slope <= 2.1, slope)

    def test_norms_consistent_pass(self):
        prob = canonical_problem('C2')
        hom = a_star(prob.law, prob.a_per)
        path = sample_path(prob.law, (0, 1), 40)
        sol = solve_oscillatory(path, prob.a_per, prob.source, 0.02)
        norms = error_norms(sol, hom)
        # fine midpoint rule on the grid values of the residual
        x = (np.arange(4000) + 0.5) / 4000
        dec = residual_decompose(path, prob.a_per, prob.source, hom, 0.02, x, sol)
        self.assertAlmostEqual(norms.residual_l2, np.mean(dec.residual ** 2),
                               delta=1e-3 * norms.residual_l2)
        self.assertAlmostEqual(norms.remainder_l2, np.mean(dec.remainder ** 2),
                               delta=1e-3 * norms.remainder_l2)
        self.assertGreater(norms.corrector_h1, norms.corrector_l2)


# Execute Tests
if __name__ == "__main__":
    TESTS = unittest.TestLoader().loadTestsFromTestCase(TestOscillatory)
    TESTS.addTests(unittest.TestLoader().loadTestsFromTestCase(TestCorrector))
    TESTS.addTests(unittest.TestLoader().loadTestsFromTestCase(TestCellVariables))
    TESTS.addTests(unittest.TestLoader().loadTestsFromTestCase(TestDecomposition))
    TESTS.addTests(unittest.TestLoader().loadTestsFromTestCase(TestErrorNorms))
    unittest.TextTestRunner(verbosity=2).run(TESTS)
