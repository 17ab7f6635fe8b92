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

Test solver module.
"""
import unittest

import numpy as np
from scipy.sparse.linalg import norm as sparse_norm

from diffhomog.corrector_fem.coefficients import sample_coefficients
from diffhomog.corrector_fem.mesh import build_mesh
from diffhomog.corrector_fem.solver import assemble_system, pcg, solve_corrector
from diffhomog.exact1d.homog import a_star
from diffhomog.exact1d.solution import corrector_w
from diffhomog.model.diffeo import DiffeoLaw, DiffeoPath, TensorDiffeoField
from diffhomog.model.fields import PeriodicMatrixField, PeriodicScalarField
from diffhomog.model.problem import canonical_problem

LAMINATE = PeriodicMatrixField.laminate(PeriodicScalarField.two_phase())


def _solve(mesh, diffeo, a_per, direction):
    coeff = sample_coefficients(mesh, diffeo, a_per)
    return solve_corrector(mesh, coeff, direction)


class TestSolver(unittest.TestCase):
    """Test solve_corrector on configurations with known correctors"""

    def test_identity_vanishes_pass(self):
        mesh = build_mesh(2, 2, 4)
        for j in range(2):
            sol = _solve(mesh, TensorDiffeoField.identity(2), PeriodicMatrixField.identity(2), j)
            self.assertLess(np.max(np.abs(sol.values)), 1e-12)
            self.assertEqual(sol.iterations, 0)

    def test_laminate_parallel_vanishes_pass(self):
        mesh = build_mesh(2, 1, 8)
        sol = _solve(mesh, TensorDiffeoField.identity(2), LAMINATE, 1)
        self.assertLess(np.max(np.abs(sol.values)), 1e-10)

    def test_laminate_matches_cell_problem_pass(self):
        """Across the layers the corrector is the 1D periodic corrector in x1."""
        mesh = build_mesh(2, 1, 16)
        sol = _solve(mesh, TensorDiffeoField.identity(2), LAMINATE, 0)
        law = DiffeoLaw()
        a_per = PeriodicScalarField.two_phase()
        path = DiffeoPath(law, seed=0)
        exact = corrector_w(path, a_star(law, a_per), a_per, mesh.node_coords[:, 0])
        exact -= np.mean(exact)
        w_inf = np.max(np.abs(exact))
        self.assertAlmostEqual(w_inf, 0.15, places=10)
        self.assertLess(np.max(np.abs(sol.values - exact)), 0.02 * w_inf)
        self.assertLess(abs(sol.mean), 1e-12)

    def test_one_dimensional_pass(self):
        mesh = build_mesh(1, 4, 8)
        a_per = PeriodicScalarField.two_phase()
        sol = _solve(mesh, TensorDiffeoField.identity(1), PeriodicMatrixField.from_scalar(a_per),
                     0)
        self.assertEqual(sol.values.size, 32)
        # one period repeats on each unit cell
        np.testing.assert_allclose(sol.values[:8], sol.values[8:16], atol=1e-7)
        self.assertAlmostEqual(sol.values[4] - sol.values[0], 0.3, places=6)

    def test_galerkin_residual_pass(self):
        """The converged solution satisfies the discrete weak form to tolerance."""
        law = DiffeoLaw(0.7, 'uniform', 'sine')
        mesh = build_mesh(2, 2, 4)
        coeff = sample_coefficients(mesh, TensorDiffeoField.sample(law, 2, seed=6),
                                    PeriodicMatrixField.checkerboard(1.0, 4.0))
        system = assemble_system(mesh, coeff)
        self.assertLess(sparse_norm(system.matrix - system.matrix.T),
                        1e-13 * sparse_norm(system.matrix))
        np.testing.assert_allclose(system.matrix @ np.ones(mesh.n_dofs), 0.0, atol=1e-12)
        for j in range(2):
            sol = solve_corrector(mesh, coeff, j, system=system)
            load, scale = system.rhs(sol.direction)
            self.assertLess(np.linalg.norm(system.matrix @ sol.values - load), 1e-10 * scale)
            self.assertLessEqual(sol.residual, 1e-10)
            self.assertLess(abs(sol.mean), 1e-12)

    def test_translation_equivariance_pass(self):
        """Shifting the cells by one period shifts the corrector by one period."""
        law = DiffeoLaw(0.7, 'uniform', 'sine')
        mesh = build_mesh(2, 2, 4)
        path_y = DiffeoPath.from_cells(law, [0.3, -0.5])
        first = TensorDiffeoField([DiffeoPath.from_cells(law, [0.6, -0.2]), path_y])
        shifted = TensorDiffeoField([DiffeoPath.from_cells(law, [-0.2, 0.6]), path_y])
        a_per = PeriodicMatrixField.checkerboard(1.0, 4.0)
        sol = _solve(mesh, first, a_per, 0)
        sol_shifted = _solve(mesh, shifted, a_per, 0)
        moved = sol.evaluate(mesh.node_coords + [1.0, 0.0])
        scale = np.max(np.abs(sol.values))
        self.assertGreater(scale, 0.01)
        np.testing.assert_allclose(sol_shifted.values, moved, atol=1e-7 * scale)

    def test_refinement_pass(self):
        """Energy distance to a fine reference decreases under refinement."""
        prob = canonical_problem('C3')
        diffeo = TensorDiffeoField.sample(prob.law, 2, seed=4)
        fine_mesh = build_mesh(2, 1, 64)
        fine_coeff = sample_coefficients(fine_mesh, diffeo, prob.a_per)
        fine_system = assemble_system(fine_mesh, fine_coeff)
        fine = solve_corrector(fine_mesh, fine_coeff, 0, system=fine_system)
        errors = []
        for r in [4, 8, 16, 32]:
            sol = _solve(build_mesh(2, 1, r), diffeo, prob.a_per, 0)
            diff = fine.values - sol.evaluate(fine_mesh.node_coords)
            errors.append(diff @ (fine_system.matrix @ diff))
        self.assertTrue(np.all(np.diff(errors) < 0), errors)

    def test_evaluate_nodes_pass(self):
        mesh = build_mesh(2, 1, 4)
        sol = _solve(mesh, TensorDiffeoField.identity(2), LAMINATE, 0)
        np.testing.assert_allclose(sol.evaluate(mesh.node_coords), sol.values, atol=1e-15)
        np.testing.assert_allclose(sol.evaluate(mesh.node_coords + 1.0), sol.values,
                                   atol=1e-14)

    def test_dataframe_pass(self):
        mesh = build_mesh(2, 1, 4)
        sol = _solve(mesh, TensorDiffeoField.identity(2), LAMINATE, 0)
        frame = sol.to_dataframe()
        self.assertEqual(list(frame.columns), ['x1', 'x2', 'w'])
        self.assertEqual(len(frame), 16)
        mesh = build_mesh(1, 1, 4)
        sol = _solve(mesh, TensorDiffeoField.identity(1),
                     PeriodicMatrixField.from_scalar(PeriodicScalarField.two_phase()), 0)
        self.assertEqual(list(sol.to_dataframe().columns), ['x1', 'w'])

    def test_invalid_direction_fail(self):
        mesh = build_mesh(2, 1, 2)
        coeff = sample_coefficients(mesh, TensorDiffeoField.identity(2), LAMINATE)
        with self.assertRaises(ValueError):
            solve_corrector(mesh, coeff, 2)
        with self.assertRaises(ValueError):
            solve_corrector(mesh, coeff, [1.0, 0.0, 0.0])

    def test_no_convergence_fail(self):
        mesh = build_mesh(2, 1, 8)
        coeff = sample_coefficients(mesh, TensorDiffeoField.identity(2), LAMINATE)
        system = assemble_system(mesh, coeff)
        load, scale = system.rhs([1.0, 0.0])
        with self.assertRaises(RuntimeError) as cm:
            pcg(system.matrix, load, 1e-30 * scale, 1)
        self.assertIn('residual', str(cm.exception))


# Execute Tests
if __name__ == "__main__":
    TESTS = unittest.TestLoader().loadTestsFromTestCase(TestSolver)
    unittest.TextTestRunner(verbosity=2).run(TESTS)
