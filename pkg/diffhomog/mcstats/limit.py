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

Covariance of the Gaussian limit G_0(x) = c int_0^1 K_0(x, t) dW_t.
"""

__all__ = ['GaussianLimitModel', 'limit_cov', 'covariance_matrix', 'sigma_bar']

import logging
from dataclasses import dataclass

import numpy as np

from diffhomog.exact1d.homog import a_star, kernel_k0
from diffhomog.exact1d.quadrature import composite_rule, reference_cuts

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class GaussianLimitModel:
    """Limit law of the scaled residual of a 1D problem.

    Attributes
    ----------
    c_sq : float
        Var(Y_0) / E(int_0^1 phi').
    source : SourceTerm
        Right-hand side, defines K_0.
    """
    c_sq: float
    source: object

    @classmethod
    def from_problem(cls, problem, order=None):
        """Model of a Problem1D, with c_sq from the homogenized constants."""
        return cls(a_star(problem.law, problem.a_per, order).c_sq, problem.source)

    def kernel(self, x, t):
        """K_0(x, t)."""
        return kernel_k0(self.source, x, t)


def _kernel_rows(glm, points, order):
    cuts = np.append(reference_cuts(points, glm.source.breakpoints), 1.0)
    nodes, wts = composite_rule(cuts, order)
    nodes, wts = nodes.ravel(), wts.ravel()
    rows = glm.kernel(points[:, None], nodes[None, :])
    return rows, wts


def covariance_matrix(glm, grid, order=None):
    """Matrix of c_sq int_0^1 K_0(x_i, t) K_0(x_j, t) dt over a grid.

    The t-integral is split at every grid point and every breakpoint of f, so
    each piece has a smooth integrand.

    Parameters
    ----------
    glm : GaussianLimitModel
    grid : array_like
        Points of [0, 1].
    order : int, optional
        Gauss-Legendre order per piece. Default from CONFIG.

    Returns
    -------
    np.ndarray
        Symmetric matrix of shape (G, G).
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if np.any(grid < 0) or np.any(grid > 1):
        raise ValueError("covariance points must lie in [0, 1]")
    rows, wts = _kernel_rows(glm, grid, order)
    cov = glm.c_sq * (rows * wts) @ rows.T
    return 0.5 * (cov + cov.T)


def limit_cov(glm, x, y, order=None):
    """Cov(G_0(x), G_0(y)) for x, y in [0, 1]."""
    return float(covariance_matrix(glm, [x, y], order)[0, 1])


def sigma_bar(glm, x=0.5, order=None):
    """Variance of the limit of eps^{-1/2} int_0^1 K_0(x, t) psi(phi^{-1}(t/eps)) dt.

    Equals c_sq times the squared L2 norm of K_0(x, .), i.e. Var G_0(x).
    """
    return float(covariance_matrix(glm, [x], order)[0, 0])
