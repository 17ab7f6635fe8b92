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

Test quadrature module.
"""
import unittest

import numpy as np

from diffhomog.exact1d.quadrature import (composite_rule, gauss_legendre, interval_rule,
                                          reference_cuts, s_cuts)


class TestRules(unittest.TestCase):
    """Test Gauss-Legendre rules"""

    def test_polynomial_exactness_pass(self):
        pts, wts = composite_rule([0.0, 0.3, 1.0], order=8)
        # exact up to degree 15 on every piece
        self.assertAlmostEqual(float(np.sum(wts * pts ** 15)), 1 / 16, places=14)
        self.assertEqual(pts.shape, (2, 8))

    def test_cached_readonly_pass(self):
        nodes, _ = gauss_legendre(8)
        self.assertIs(gauss_legendre(8)[0], nodes)
        with self.assertRaises(ValueError):
            nodes[0] = 0.0
        with self.assertRaises(ValueError):
            gauss_legendre(0)

    def test_oriented_pass(self):
        pts, wts = interval_rule([1.0], [0.0], order=4)
        self.assertAlmostEqual(float(np.sum(wts * pts)), -0.5, places=14)


class TestCuts(unittest.TestCase):
    """Test partitions"""

    def test_reference_cuts_pass(self):
        cuts = reference_cuts([0.0, 0.5], [0.0, 0.5], [0.25], subdivisions=1)
        np.testing.assert_array_equal(cuts, [0.0, 0.25, 0.5])
        np.testing.assert_array_equal(reference_cuts([0.3]), [0.0, 0.25, 0.3, 0.5, 0.75])
        merged = reference_cuts([0.5, 0.5 + 1e-14], subdivisions=1)
        np.testing.assert_array_equal(merged, [0.0, 0.5])

    def test_s_cuts_pass(self):
        cuts = s_cuts(np.array([0.0, 0.5]), 0.2, 2.7, extra=[1.3, 5.0])
        np.testing.assert_allclose(cuts, [0.2, 0.5, 1.0, 1.3, 1.5, 2.0, 2.5, 2.7])
        merged = s_cuts(np.array([0.0]), 0.0, 2.0 + 1e-14)
        np.testing.assert_array_equal(merged, [0.0, 1.0, 2.0 + 1e-14])
        with self.assertRaises(ValueError):
            s_cuts(np.array([0.0]), 1.0, 1.0)

    def test_negative_range_fail(self):
        cuts = s_cuts(np.array([0.0]), -1.5, 0.5, extra=[0.0])
        np.testing.assert_array_equal(cuts, [-1.5, -1.0, 0.0, 0.5])


# Execute Tests
if __name__ == "__main__":
    TESTS = unittest.TestLoader().loadTestsFromTestCase(TestRules)
    TESTS.addTests(unittest.TestLoader().loadTestsFromTestCase(TestCuts))
    unittest.TextTestRunner(verbosity=2).run(TESTS)
