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

Homogenized coefficient and limit constants of the one-dimensional problem.
"""

__all__ = ['Homog1D', 'a_star', 'psi', 'var_y0', 'solve_homogenized',
           'homogenized_derivative', 'kernel_k0', 'kernel_k1']

import logging
from dataclasses import dataclass

import numpy as np

from diffhomog.exact1d.quadrature import composite_rule, reference_cuts

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Homog1D:
    """Deterministic constants of the homogenized 1D problem.

    Attributes
    ----------
    a_star : float
        Homogenized coefficient.
    inv_a_star : float
        1 / a_star.
    mean_d : float
        E(int_0^1 phi').
    var_y0 : float
        Variance of the cell variable Y_0 = int_0^1 psi phi'.
    c_sq : float
        var_y0 / mean_d, variance rate of the Gaussian limit.
    int_psi_g : float
        int_0^1 psi G_per, so that Y_0 = X_0 * int_psi_g.
    """
    a_star: float
    inv_a_star: float
    mean_d: float
    var_y0: float
    c_sq: float
    int_psi_g: float = 0.0


def _cell_integrals(law, a_per, order=None):
    """int_0^1 1/a_per and int_0^1 G_per/a_per."""
    pts, wts = composite_rule(np.append(reference_cuts(a_per.breakpoints,
                                                       law.g_per.breakpoints), 1.0), order)
    inv = 1.0 / a_per(pts)
    return float(np.sum(wts * inv)), float(np.sum(wts * inv * law.g_value(pts)))


def a_star(law, a_per, order=None):
    """Homogenized coefficient of a_per composed with a random diffeomorphism of law.

    (a_star)^{-1} = [int 1/a_per + E(X_0) int G_per/a_per] / [1 + E(X_0) int G_per]

    Parameters
    ----------
    law : DiffeoLaw
    a_per : PeriodicScalarField
    order : int, optional
        Gauss-Legendre order per piece. Default from CONFIG.

    Returns
    -------
    Homog1D
    """
    if a_per.a_minus <= 0:
        raise ValueError(f"a_per is not coercive, a_minus={a_per.a_minus}")
    inv_a, g_over_a = _cell_integrals(law, a_per, order)
    inv_star = (inv_a + law.mean_x * g_over_a) / law.mean_d
    astar = 1.0 / inv_star
    partial = Homog1D(astar, inv_star, law.mean_d, 0.0, 0.0)
    variance = var_y0(law, a_per, partial, order)
    int_psi_g = g_over_a - inv_star * law.g_mean
    LOGGER.debug("a_star=%.15g, var_Y0=%.6g for %s", astar, variance, a_per.name)
    return Homog1D(astar, inv_star, law.mean_d, variance, variance / law.mean_d, int_psi_g)


def psi(a_per, h, x):
    """psi(x) = 1/a_per(x) - 1/a_star, 1-periodic."""
    return 1.0 / a_per(x) - h.inv_a_star


def var_y0(law, a_per, h, order=None):
    """Var(Y_0) = Var(X_0) * (int_0^1 psi G_per)^2.

    Y_0 = int psi + X_0 int psi G_per is affine in X_0 and centered by the
    definition of a_star.
    """
    _, g_over_a = _cell_integrals(law, a_per, order)
    int_psi_g = g_over_a - h.inv_a_star * law.g_mean
    return float(law.var_x * int_psi_g ** 2)


def solve_homogenized(h, f, x):
    """u_star(x) = (c_star x - int_0^x F) / a_star, vanishing at 0 and 1."""
    x = np.asarray(x, dtype=float)
    return (f.c_star * x - f.double_primitive(x)) * h.inv_a_star


def homogenized_derivative(h, f, x):
    """u_star'(x) = (c_star - F(x)) / a_star."""
    x = np.asarray(x, dtype=float)
    return (f.c_star - f.primitive(x)) * h.inv_a_star


def kernel_k0(f, x, t):
    """K_0(x, t) = (1[t <= x] - x) (c_star - F(t))."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    return (np.where(t <= x, 1.0, 0.0) - x) * (f.c_star - f.primitive(t))


def kernel_k1(f, h, t):
    """K_1(t) = a_star (F(t) - c_star)."""
    return h.a_star * (f.primitive(np.asarray(t, dtype=float)) - f.c_star)
