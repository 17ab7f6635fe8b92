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

Test fields and problem presets.
"""
import unittest

import numpy as np

from diffhomog.model.fields import PeriodicMatrixField, PeriodicScalarField, SourceTerm
from diffhomog.model.problem import Problem1D, ProblemND, canonical_problem


class TestScalarField(unittest.TestCase):
    """Test PeriodicScalarField"""

    def test_two_phase_pass(self):
        a_per = PeriodicScalarField.two_phase()
        np.testing.assert_array_equal(a_per([0.0, 0.25, 0.5, 0.75, 1.25, -0.25]),
                                      [1, 1, 4, 4, 1, 4])
        self.assertEqual(a_per.a_minus, 1.0)
        self.assertEqual(a_per.a_plus, 4.0)
        np.testing.assert_array_equal(a_per.breakpoints, [0.0, 0.5])

    def test_periodic_pass(self):
        a_per = PeriodicScalarField.sine(2.0, 0.5)
        x = np.linspace(-3, 3, 77)
        np.testing.assert_allclose(a_per(x + 1), a_per(x), atol=1e-12)
        self.assertEqual(a_per.a_minus, 1.5)

    def test_constant_pass(self):
        a_per = PeriodicScalarField.constant(3.0)
        np.testing.assert_array_equal(a_per(np.arange(5) / 5), np.full(5, 3.0))

    def test_invalid_fail(self):
        with self.assertRaises(ValueError):
            PeriodicScalarField.two_phase(low=0.0)
        with self.assertRaises(ValueError):
            PeriodicScalarField.piecewise_constant([0.0, 0.7, 0.3], [1, 2, 3])
        with self.assertRaises(ValueError):
            PeriodicScalarField.piecewise_constant([0.0, 0.5], [1.0])

    def test_sample_points_hit_phases_pass(self):
        a_per = PeriodicScalarField.two_phase(split=0.3)
        pts = a_per.sample_points(16)
        self.assertIn(0.3, pts)
        self.assertTrue(np.all(np.diff(pts) >= 0))


class TestMatrixField(unittest.TestCase):
    """Test PeriodicMatrixField"""

    def test_laminate_pass(self):
        a_mat = PeriodicMatrixField.laminate(PeriodicScalarField.two_phase())
        vals = a_mat(np.array([[0.25, 0.75], [0.75, 0.25]]))
        np.testing.assert_array_equal(vals[0], np.eye(2))
        np.testing.assert_array_equal(vals[1], 4 * np.eye(2))
        self.assertIsNotNone(a_mat.scalar)

    def test_checkerboard_pass(self):
        a_mat = PeriodicMatrixField.checkerboard(1.0, 4.0)
        vals = a_mat(np.array([[0.1, 0.1], [0.6, 0.1], [0.6, 0.6], [1.1, 1.6]]))
        np.testing.assert_array_equal(vals[:, 0, 0], [1, 4, 1, 4])
        np.testing.assert_array_equal(vals[:, 0, 1], np.zeros(4))

    def test_identity_and_scalar_pass(self):
        np.testing.assert_array_equal(PeriodicMatrixField.identity(2)(np.zeros((3, 2))),
                                      np.broadcast_to(np.eye(2), (3, 2, 2)))
        one_d = PeriodicMatrixField.from_scalar(PeriodicScalarField.two_phase())
        self.assertEqual(one_d(np.array([[0.75]])).shape, (1, 1, 1))
        self.assertEqual(one_d(np.array([[0.75]]))[0, 0, 0], 4.0)

    def test_dimension_pass(self):
        with self.assertRaises(ValueError):
            PeriodicMatrixField.identity(3)


class TestSourceTerm(unittest.TestCase):
    """Test SourceTerm primitives"""

    def test_constant_pass(self):
        src = SourceTerm.constant(1.0)
        t = np.array([0.0, 0.25, 1.0])
        np.testing.assert_allclose(src.primitive(t), t)
        np.testing.assert_allclose(src.double_primitive(t), t ** 2 / 2)
        self.assertAlmostEqual(src.c_star, 0.5)

    def test_sine_pass(self):
        src = SourceTerm.sine()
        self.assertAlmostEqual(src.c_star, 1 / (2 * np.pi), places=14)
        self.assertAlmostEqual(float(src.primitive(np.array(1.0))), 0.0, places=14)

    def test_piecewise_constant_pass(self):
        src = SourceTerm.piecewise_constant([0.0, 0.5], [2.0, -1.0])
        np.testing.assert_allclose(src.f(np.array([0.25, 0.75])), [2.0, -1.0])
        np.testing.assert_allclose(src.primitive(np.array([0.5, 1.0])), [1.0, 0.5])
        # int_0^1 F = int_0^.5 2t dt + int_.5^1 (1 - (t - .5)) dt
        self.assertAlmostEqual(src.c_star, 0.25 + 0.5 - 0.125, places=14)

    def test_from_function_pass(self):
        src = SourceTerm.from_function(lambda t: 3 * t ** 2)
        np.testing.assert_allclose(src.primitive(np.array([0.5, 1.0])), [0.125, 1.0], atol=1e-14)
        self.assertAlmostEqual(src.c_star, 0.25, places=13)


class TestProblems(unittest.TestCase):
    """Test the reference configurations"""

    def test_canonical_pass(self):
        c1 = canonical_problem('C1')
        self.assertIsInstance(c1, Problem1D)
        self.assertTrue(c1.is_deterministic)
        c2p = canonical_problem('C2prime')
        self.assertEqual(c2p.law.m, 0.7)
        self.assertEqual(c2p.law.x_dist.value, 'uniform_positive')
        c3 = canonical_problem('C3')
        self.assertIsInstance(c3, ProblemND)
        self.assertEqual(c3.dim, 2)
        self.assertIsNotNone(c3.scalar_reduction)
        self.assertIsNone(canonical_problem('checkerboard_identity').scalar_reduction)

    def test_unknown_fail(self):
        with self.assertRaises(ValueError):
            canonical_problem('C9')


# Execute Tests
if __name__ == "__main__":
    TESTS = unittest.TestLoader().loadTestsFromTestCase(TestScalarField)
    TESTS.addTests(unittest.TestLoader().loadTestsFromTestCase(TestMatrixField))
    TESTS.addTests(unittest.TestLoader().loadTestsFromTestCase(TestSourceTerm))
    TESTS.addTests(unittest.TestLoader().loadTestsFromTestCase(TestProblems))
    unittest.TextTestRunner(verbosity=2).run(TESTS)
