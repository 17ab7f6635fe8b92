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

Exact solutions of the oscillatory 1D problem and their residual decomposition.

Every integral over t in (0, 1) of g(t) / a_per(phi^{-1}(t / eps)) is taken in
the variable s = phi^{-1}(t / eps), i.e. as eps * int g(eps phi(s)) phi'(s) / a_per(s) ds,
on a partition of s aligned with the integers and all breakpoints. The inverse
of phi is only evaluated at interval ends.
"""

__all__ = ['OscillatorySolution', 'ResidualDecomposition', 'DerivativeDecomposition',
           'ErrorNorms', 'solve_oscillatory', 'corrector_w', 'corrector_w_prime',
           'cell_variables', 'psi_integral', 'residual_decompose', 'derivative_decompose',
           'error_norms', 'h1_corrector_error', 'default_grid']

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from diffhomog.exact1d.homog import homogenized_derivative, solve_homogenized
from diffhomog.exact1d.quadrature import composite_rule, interval_rule, reference_cuts, s_cuts
from diffhomog.util.config import CONFIG

LOGGER = logging.getLogger(__name__)


class _RunningIntegral:
    """Running integrals s -> int_anchor^s of a vectorized integrand on a partition.

    The integrand maps points of any shape to an array of shape (channels,) + shape.
    Values at arbitrary s are the cached sum up to the enclosing cut plus a
    Gauss-Legendre rule on the remaining partial piece.
    """

    def __init__(self, integrand, cuts, order, anchor=0.0):
        self.integrand = integrand
        self.cuts = cuts
        self.order = order
        pts, wts = composite_rule(cuts, order)
        pieces = np.sum(wts * integrand(pts), axis=-1)
        cum = np.concatenate([np.zeros((pieces.shape[0], 1)), np.cumsum(pieces, axis=1)], axis=1)
        at_anchor = np.searchsorted(cuts, anchor)
        self._cum = cum - cum[:, at_anchor:at_anchor + 1]

    @property
    def total(self):
        """Integrals over the whole partition."""
        return self._cum[:, -1] - self._cum[:, 0]

    @property
    def end_values(self):
        """Running integrals at the last cut."""
        return self._cum[:, -1]

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        flat = s.ravel()
        j = np.clip(np.searchsorted(self.cuts, flat, side='right') - 1, 0, self.cuts.size - 2)
        pts, wts = interval_rule(self.cuts[j], flat, self.order)
        partial = np.sum(wts * self.integrand(pts), axis=-1)
        return (self._cum[:, j] + partial).reshape((-1,) + s.shape)


def _gauss_order(order):
    return CONFIG.diffhomog.quadrature.gauss_order.int() if order is None else int(order)


class OscillatorySolution:
    """Solution of -(a_per(phi^{-1}(x/eps)) u')' = f on (0, 1), u(0) = u(1) = 0.

    u(x) = c_eps int_0^x dt / a(t) - int_0^x F(t) dt / a(t), with a(t) the composed
    coefficient and c_eps fixing u(1) = 0.

    Attributes
    ----------
    path : DiffeoPath
    a_per : PeriodicScalarField
    source : SourceTerm
    eps : float
        Scale of the oscillations.
    s_end : float
        phi^{-1}(1 / eps), end of the integration range in s.
    cuts : np.ndarray
        Partition of [0, s_end].
    c_eps : float
        Flux constant, a(t) u'(t) + F(t) = c_eps.
    """

    def __init__(self, path, a_per, source, eps, order=None):
        if not eps > 0:
            raise ValueError(f"eps must satisfy eps > 0, got {eps}")
        if a_per.a_minus <= 0:
            raise ValueError(f"a_per is not coercive, a_minus={a_per.a_minus}")
        self.path = path
        self.a_per = a_per
        self.source = source
        self.eps = float(eps)
        self.order = _gauss_order(order)
        self.s_end = float(path.phi_inverse(1.0 / self.eps))
        inner_bps = source.breakpoints[source.breakpoints > 0]
        extra = path.phi_inverse(inner_bps / self.eps) if inner_bps.size else []
        ref = reference_cuts(a_per.breakpoints, path.law.g_per.breakpoints)
        self.cuts = s_cuts(ref, 0.0, self.s_end, extra)
        self._running = _RunningIntegral(self._integrands, self.cuts, self.order)
        inv_total, force_total = self._running.end_values
        self.c_eps = float(force_total / inv_total)

    def _integrands(self, s):
        weight = self.eps * self.path.phi_prime(s) / self.a_per(s)
        force = self.source.primitive(self.eps * self.path.phi(s))
        return np.stack([weight, weight * force])

    @property
    def inverse_total(self):
        """int_0^1 dt / a_per(phi^{-1}(t/eps))."""
        return float(self._running.end_values[0])

    def locate(self, x):
        """S = phi^{-1}(x / eps) for x in [0, 1], exact at both ends."""
        x = np.asarray(x, dtype=float)
        if np.any(x < 0) or np.any(x > 1):
            raise ValueError("x must lie in [0, 1]")
        flat = x.ravel()
        s_val = np.where(flat >= 1, self.s_end, 0.0)
        inner = (flat > 0) & (flat < 1)
        if np.any(inner):
            s_val[inner] = self.path.phi_inverse(flat[inner] / self.eps)
        return s_val.reshape(x.shape)

    def running_integrals(self, s):
        """(int_0^t dt/a, int_0^t F dt/a) at t = eps phi(s), shape (2,) + shape(s)."""
        return self._running(s)

    def __call__(self, x):
        """u_eps(x)."""
        inv, force = self._running(self.locate(x))
        return self.c_eps * inv - force

    def coefficient(self, x):
        """a_per(phi^{-1}(x / eps))."""
        return self.a_per(self.locate(x))

    def derivative(self, x):
        """u_eps'(x) = (c_eps - F(x)) / a_per(phi^{-1}(x / eps))."""
        x = np.asarray(x, dtype=float)
        return (self.c_eps - self.source.primitive(x)) / self.coefficient(x)


def solve_oscillatory(path, a_per, f, eps, order=None):
    """Build the exact solution u_eps for one realization, see OscillatorySolution."""
    return OscillatorySolution(path, a_per, f, eps, order)


def _psi_integrand(path, a_per, h, s):
    der = path.phi_prime(s)
    return np.stack([(1.0 / a_per(s) - h.inv_a_star) * der, der])


def _symmetric_cuts(path, a_per, s_values, extra=()):
    s_lo = min(0.0, float(np.min(s_values)))
    s_hi = max(0.0, float(np.max(s_values)))
    if s_hi == s_lo:
        s_hi = s_lo + 1.0
    ref = reference_cuts(a_per.breakpoints, path.law.g_per.breakpoints)
    return s_cuts(ref, s_lo, s_hi, np.concatenate([[0.0], np.asarray(extra, dtype=float)]))


def corrector_w(path, h, a_per, y, order=None):
    """Corrector w(y) = a_star int_0^y psi(phi^{-1}(t)) dt, with w(0) = 0.

    Parameters
    ----------
    path : DiffeoPath
    h : Homog1D
    a_per : PeriodicScalarField
    y : float or array_like
    order : int, optional

    Returns
    -------
    float or np.ndarray
    """
    y_arr = np.asarray(y, dtype=float)
    s_val = np.where(y_arr == 0, 0.0, path.phi_inverse(y_arr))
    cuts = _symmetric_cuts(path, a_per, s_val)
    running = _RunningIntegral(lambda s: _psi_integrand(path, a_per, h, s)[:1], cuts,
                               _gauss_order(order))
    values = h.a_star * running(s_val)[0]
    return float(values) if np.ndim(y) == 0 else values


def corrector_w_prime(path, h, a_per, y):
    """w'(y) = a_star psi(phi^{-1}(y)) = a_star / a_per(phi^{-1}(y)) - 1."""
    return h.a_star / a_per(path.phi_inverse(y)) - 1.0


def cell_variables(path, a_per, h, k_lo, k_hi, order=None):
    """Per-cell variables Y_k = int_k^{k+1} psi phi' and D_k = int_k^{k+1} phi'.

    Parameters
    ----------
    path : DiffeoPath
    a_per : PeriodicScalarField
    h : Homog1D
    k_lo, k_hi : int
        Cells [k_lo, k_hi).

    Returns
    -------
    pd.DataFrame
        Columns Y and D, indexed by k.
    """
    k_lo, k_hi = int(k_lo), int(k_hi)
    ref = reference_cuts(a_per.breakpoints, path.law.g_per.breakpoints)
    cuts = s_cuts(ref, k_lo, k_hi)
    pts, wts = composite_rule(cuts, _gauss_order(order))
    pieces = np.sum(wts * _psi_integrand(path, a_per, h, pts), axis=-1)
    cell = np.floor(0.5 * (cuts[:-1] + cuts[1:])).astype(np.int64) - k_lo
    n_cells = k_hi - k_lo
    return pd.DataFrame({
        'Y': np.bincount(cell, weights=pieces[0], minlength=n_cells),
        'D': np.bincount(cell, weights=pieces[1], minlength=n_cells),
    }, index=pd.RangeIndex(k_lo, k_hi, name='k'))


def psi_integral(solution, h, x):
    """P(x) = int_0^x psi(phi^{-1}(t / eps)) dt, so that eps w(x / eps) = a_star P(x)."""
    x = np.asarray(x, dtype=float)
    return solution.running_integrals(solution.locate(x))[0] - x * h.inv_a_star


def _global_terms(solution, h):
    """P(1), int_0^1 (F - c_star) psi(phi^{-1}(t/eps)) dt and rho_eps."""
    c_star = solution.source.c_star
    inv_total, force_total = solution.running_integrals(np.array([solution.s_end]))[:, 0]
    p_one = inv_total - h.inv_a_star
    q_one = force_total - c_star * h.inv_a_star
    weighted = q_one - c_star * p_one
    rho = h.a_star * p_one / inv_total * weighted
    return p_one, weighted, rho


@dataclass
class ResidualDecomposition:
    """u_eps - u_star = leading + remainder on a grid.

    Attributes
    ----------
    grid : np.ndarray
        Points of [0, 1].
    residual : np.ndarray
        u_eps - u_star.
    leading : np.ndarray
        int_0^1 K_0(x, t) psi(phi^{-1}(t/eps)) dt.
    remainder : np.ndarray
        residual - leading.
    remainder_direct : np.ndarray
        -x rho_eps / a_star + (c_eps - c_star) P(x), computed independently.
    psi_integral : np.ndarray
        P(x) = int_0^x psi(phi^{-1}(t/eps)) dt.
    rho_eps : float
    c_gap : float
        c_eps - c_star.
    c_gap_identity : float
        a_star int_0^1 (F - c_star) psi(phi^{-1}(t/eps)) dt - rho_eps, equal to c_gap.
    """
    grid: np.ndarray
    residual: np.ndarray
    leading: np.ndarray
    remainder: np.ndarray
    remainder_direct: np.ndarray
    psi_integral: np.ndarray
    rho_eps: float
    c_gap: float
    c_gap_identity: float

    @property
    def mismatch(self):
        """Largest gap between the two computations of the remainder."""
        return float(np.max(np.abs(self.remainder - self.remainder_direct)))

    @property
    def c_gap_mismatch(self):
        return abs(self.c_gap - self.c_gap_identity)


def default_grid(grid=None):
    """Validated evaluation grid in [0, 1], uniform of CONFIG size when grid is None."""
    if grid is None:
        return np.linspace(0.0, 1.0, CONFIG.diffhomog.exact1d.grid_points.int())
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(grid < 0) or np.any(grid > 1):
        raise ValueError("grid must be a 1D array of points in [0, 1]")
    return grid


def residual_decompose(path, a_per, f, h, eps, grid=None, solution=None):
    """Split u_eps - u_star into the K_0 term and the remainder r_eps.

    Parameters
    ----------
    path : DiffeoPath
    a_per : PeriodicScalarField
    f : SourceTerm
    h : Homog1D
    eps : float
    grid : array_like, optional
        Points of [0, 1]. Default: uniform grid of CONFIG size.
    solution : OscillatorySolution, optional
        Reused when given, otherwise solved here.

    Returns
    -------
    ResidualDecomposition
    """
    grid = default_grid(grid)
    if solution is None:
        solution = solve_oscillatory(path, a_per, f, eps)
    c_star = f.c_star
    inv, force = solution.running_integrals(solution.locate(grid))
    residual = solution.c_eps * inv - force - solve_homogenized(h, f, grid)
    p_x = inv - grid * h.inv_a_star
    q_x = force - f.double_primitive(grid) * h.inv_a_star
    p_one, weighted, rho = _global_terms(solution, h)
    leading = (c_star * p_x - q_x) + grid * weighted
    c_gap = solution.c_eps - c_star
    return ResidualDecomposition(
        grid=grid,
        residual=residual,
        leading=leading,
        remainder=residual - leading,
        remainder_direct=-grid * rho * h.inv_a_star + c_gap * p_x,
        psi_integral=p_x,
        rho_eps=float(rho),
        c_gap=float(c_gap),
        c_gap_identity=float(h.a_star * weighted - rho),
    )


@dataclass
class DerivativeDecomposition:
    """d/dx (u_eps - u_star - eps w(x/eps) u_star') on a grid, computed two ways.

    Attributes
    ----------
    grid : np.ndarray
    direct : np.ndarray
        From the exact derivatives of u_eps, u_star and w.
    k1_term : np.ndarray
        a_per^{-1}(phi^{-1}(x/eps)) int_0^1 K_1 psi(phi^{-1}(t/eps)) dt.
    source_term : np.ndarray
        f(x) P(x) = eps f(x) w(x/eps) / a_star.
    rbar : np.ndarray
        -rho_eps / a_per(phi^{-1}(x/eps)).
    """
    grid: np.ndarray
    direct: np.ndarray
    k1_term: np.ndarray
    source_term: np.ndarray
    rbar: np.ndarray

    @property
    def mismatch(self):
        return float(np.max(np.abs(self.direct - self.k1_term - self.source_term - self.rbar)))


def derivative_decompose(solution, h, grid=None):
    """Decompose the derivative of the first-order corrector error of solution.

    Returns
    -------
    DerivativeDecomposition
    """
    grid = default_grid(grid)
    f = solution.source
    s_val = solution.locate(grid)
    coeff = solution.a_per(s_val)
    inv, _ = solution.running_integrals(s_val)
    p_x = inv - grid * h.inv_a_star
    du_star = homogenized_derivative(h, f, grid)
    du_eps = (solution.c_eps - f.primitive(grid)) / coeff
    w_prime = h.a_star / coeff - 1.0
    source_term = f.f(grid) * p_x
    _, weighted, rho = _global_terms(solution, h)
    return DerivativeDecomposition(
        grid=grid,
        direct=du_eps - du_star * (1.0 + w_prime) + source_term,
        k1_term=h.a_star * weighted / coeff,
        source_term=source_term,
        rbar=-rho / coeff,
    )


@dataclass
class ErrorNorms:
    """Squared L2 norms on (0, 1) of the error terms of one realization.

    Attributes
    ----------
    residual_l2 : float
        ||u_eps - u_star||^2.
    remainder_l2 : float
        ||r_eps||^2.
    corrector_l2 : float
        ||u_eps - u_star - eps w(./eps) u_star'||^2.
    corrector_derivative_l2 : float
        Squared L2 norm of the derivative of the same error.
    """
    residual_l2: float
    remainder_l2: float
    corrector_l2: float
    corrector_derivative_l2: float

    @property
    def corrector_h1(self):
        """Squared H1 norm of the first-order corrector error."""
        return self.corrector_l2 + self.corrector_derivative_l2


def error_norms(solution, h):
    """Error norms of solution by quadrature at the s-nodes of its partition.

    Returns
    -------
    ErrorNorms
    """
    f = solution.source
    path = solution.path
    eps = solution.eps
    c_star = f.c_star
    pts, wts = composite_rule(solution.cuts, solution.order)
    x = np.clip(eps * path.phi(pts), 0.0, 1.0)
    dx = wts * eps * path.phi_prime(pts)
    coeff = solution.a_per(pts)
    inv, force = solution.running_integrals(pts)
    residual = solution.c_eps * inv - force - solve_homogenized(h, f, x)
    p_x = inv - x * h.inv_a_star
    q_x = force - f.double_primitive(x) * h.inv_a_star
    _, weighted, rho = _global_terms(solution, h)
    leading = (c_star * p_x - q_x) + x * weighted
    du_star = homogenized_derivative(h, f, x)
    corrector = residual - h.a_star * p_x * du_star
    corrector_der = ((solution.c_eps - f.primitive(x)) / coeff - du_star * h.a_star / coeff
                     + f.f(x) * p_x)
    return ErrorNorms(
        residual_l2=float(np.sum(dx * residual ** 2)),
        remainder_l2=float(np.sum(dx * (residual - leading) ** 2)),
        corrector_l2=float(np.sum(dx * corrector ** 2)),
        corrector_derivative_l2=float(np.sum(dx * corrector_der ** 2)),
    )


def h1_corrector_error(path, a_per, f, h, eps):
    """||u_eps - u_star - eps w(./eps) u_star'||^2 in H1(0, 1) for one realization."""
    return error_norms(solve_oscillatory(path, a_per, f, eps), h).corrector_h1
