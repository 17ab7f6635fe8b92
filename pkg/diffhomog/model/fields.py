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

Periodic coefficient fields and source terms.
"""

__all__ = ['PeriodicScalarField', 'PeriodicMatrixField', 'SourceTerm']

import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional

import numpy as np

from diffhomog.util.config import CONFIG

LOGGER = logging.getLogger(__name__)


def _check_breakpoints(breakpoints):
    breakpoints = np.asarray(breakpoints, dtype=float).ravel()
    if breakpoints.size == 0 or breakpoints[0] != 0.0:
        breakpoints = np.concatenate([[0.0], breakpoints])
    if np.any(np.diff(breakpoints) <= 0) or breakpoints[-1] >= 1.0:
        raise ValueError("breakpoints must be strictly increasing and lie in [0, 1), "
                         f"got {breakpoints.tolist()}")
    return breakpoints


def _piecewise_constant(breakpoints, values, x):
    x = np.asarray(x, dtype=float)
    idx = np.searchsorted(breakpoints, np.mod(x, 1.0), side='right') - 1
    return values[np.clip(idx, 0, values.size - 1)]


def _constant(value, x):
    return np.full(np.shape(x), value, dtype=float)


def _sine(mean, amplitude, x):
    return mean + amplitude * np.sin(2 * np.pi * np.asarray(x, dtype=float))


@dataclass(frozen=True)
class PeriodicScalarField:
    """1-periodic scalar coefficient a_per with coercivity bounds.

    Attributes
    ----------
    func : callable
        Vectorized evaluator of the field, already periodic in its argument.
    breakpoints : np.ndarray
        Sorted abscissae of discontinuities or kinks in [0, 1). Always contains 0.
    a_minus : float
        Lower bound, must be positive.
    a_plus : float
        Upper bound.
    name : str
        Label used in logs and summaries.
    """
    func: Callable
    breakpoints: np.ndarray
    a_minus: float
    a_plus: float
    name: str = 'custom'

    def __post_init__(self):
        object.__setattr__(self, 'breakpoints', _check_breakpoints(self.breakpoints))
        if not 0 < self.a_minus <= self.a_plus < np.inf:
            raise ValueError("bounds must satisfy 0 < a_minus <= a_plus < inf, "
                             f"got a_minus={self.a_minus}, a_plus={self.a_plus}")

    def __call__(self, x):
        return self.func(x)

    @classmethod
    def constant(cls, value):
        """Spatially constant coefficient."""
        return cls(partial(_constant, float(value)), [0.0], float(value), float(value),
                   name=f'constant({value})')

    @classmethod
    def piecewise_constant(cls, breakpoints, values):
        """Coefficient equal to values[i] on [breakpoints[i], breakpoints[i+1]).

        Parameters
        ----------
        breakpoints : array_like
            Left ends of the phases within [0, 1), starting at 0.
        values : array_like
            Phase values, same length as breakpoints.
        """
        breakpoints = np.asarray(breakpoints, dtype=float)
        values = np.asarray(values, dtype=float)
        if breakpoints.shape != values.shape or breakpoints.size == 0 or breakpoints[0] != 0:
            raise ValueError("piecewise constant field needs one value per breakpoint "
                             "and a first breakpoint at 0")
        return cls(partial(_piecewise_constant, breakpoints, values), breakpoints,
                   float(values.min()), float(values.max()),
                   name=f'piecewise_constant({values.tolist()})')

    @classmethod
    def two_phase(cls, low=1.0, high=4.0, split=0.5):
        """Coefficient low on [0, split) and high on [split, 1)."""
        return cls.piecewise_constant([0.0, split], [low, high])

    @classmethod
    def sine(cls, mean, amplitude):
        """Smooth coefficient mean + amplitude * sin(2 pi x)."""
        return cls(partial(_sine, float(mean), float(amplitude)), [0.0],
                   float(mean - abs(amplitude)), float(mean + abs(amplitude)),
                   name=f'sine({mean}, {amplitude})')

    def sample_points(self, n_points=4096):
        """Uniform sample of [0, 1) refined next to every breakpoint."""
        x = np.arange(n_points) / n_points
        eps = 1e-9
        near = np.concatenate([self.breakpoints, np.mod(self.breakpoints - eps, 1.0)])
        return np.sort(np.concatenate([x, near]))


def _identity_matrix(dim, y):
    y = np.asarray(y, dtype=float)
    return np.broadcast_to(np.eye(dim), y.shape[:-1] + (dim, dim)).copy()


def _laminate(a_per, dim, axis, y):
    y = np.asarray(y, dtype=float)
    return a_per(y[..., axis])[..., None, None] * np.eye(dim)


def _checkerboard(low, high, dim, y):
    y = np.mod(np.asarray(y, dtype=float), 1.0)
    parity = np.sum(y >= 0.5, axis=-1) % 2
    return np.where(parity == 0, low, high)[..., None, None] * np.eye(dim)


def _scalar_as_matrix(a_per, y):
    y = np.asarray(y, dtype=float)
    return a_per(y[..., 0])[..., None, None]


@dataclass(frozen=True)
class PeriodicMatrixField:
    """Z^d-periodic matrix coefficient A_per with coercivity bounds.

    Attributes
    ----------
    func : callable
        Maps points of shape (..., d) to matrices of shape (..., d, d).
    dim : int
        Space dimension d.
    a_minus : float
        Coercivity constant, xi^T A xi >= a_minus |xi|^2.
    a_plus : float
        Entrywise bound.
    symmetric : bool
        Whether A_per(y) is symmetric at every point.
    breakpoints : np.ndarray
        Abscissae in [0, 1) of discontinuities along each axis.
    scalar : PeriodicScalarField, optional
        One-dimensional reduction, set for laminates and d = 1 fields.
    """
    func: Callable
    dim: int
    a_minus: float
    a_plus: float
    symmetric: bool = True
    breakpoints: np.ndarray = field(default_factory=lambda: np.zeros(1))
    scalar: Optional[PeriodicScalarField] = None
    name: str = 'custom'

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dimension must be in {{1, 2}}, got {self.dim}")
        object.__setattr__(self, 'breakpoints', _check_breakpoints(self.breakpoints))
        if not 0 < self.a_minus <= self.a_plus < np.inf:
            raise ValueError("bounds must satisfy 0 < a_minus <= a_plus < inf, "
                             f"got a_minus={self.a_minus}, a_plus={self.a_plus}")

    def __call__(self, y):
        return self.func(y)

    @classmethod
    def identity(cls, dim):
        """Identity matrix everywhere."""
        return cls(partial(_identity_matrix, dim), dim, 1.0, 1.0, name='identity')

    @classmethod
    def laminate(cls, a_per, dim=2, axis=0):
        """Layered coefficient a_per(y[axis]) * Identity."""
        return cls(partial(_laminate, a_per, dim, axis), dim, a_per.a_minus, a_per.a_plus,
                   breakpoints=a_per.breakpoints, scalar=a_per,
                   name=f'laminate({a_per.name})')

    @classmethod
    def checkerboard(cls, low=1.0, high=4.0, dim=2):
        """Coefficient alternating between low and high on the half-cells of [0, 1)^d."""
        return cls(partial(_checkerboard, float(low), float(high), dim), dim,
                   float(min(low, high)), float(max(low, high)), breakpoints=[0.0, 0.5],
                   name=f'checkerboard({low}, {high})')

    @classmethod
    def from_scalar(cls, a_per):
        """The d = 1 matrix field [[a_per(y)]]."""
        return cls(partial(_scalar_as_matrix, a_per), 1, a_per.a_minus, a_per.a_plus,
                   breakpoints=a_per.breakpoints, scalar=a_per, name=a_per.name)

    def sample_points(self, n_points=64):
        """Tensor grid of sample points in [0, 1)^d."""
        axis = np.arange(n_points) / n_points
        grids = np.meshgrid(*([axis] * self.dim), indexing='ij')
        return np.stack([g.ravel() for g in grids], axis=-1)


def _quad_from_zero(func, breakpoints, t, order):
    """Composite Gauss-Legendre integral of func over [0, t], split at breakpoints."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    cuts = np.concatenate([[0.0], breakpoints[(breakpoints > 0) & (breakpoints < t)], [t]])
    lo, hi = cuts[:-1, None], cuts[1:, None]
    pts = 0.5 * (hi + lo) + 0.5 * (hi - lo) * nodes
    return float(np.sum(0.5 * (hi - lo) * weights * func(pts)))


def _vectorized_quad(kernel, f, breakpoints, order, t):
    t = np.asarray(t, dtype=float)
    out = np.array([_quad_from_zero(partial(kernel, f, t_i), breakpoints, t_i, order)
                    for t_i in t.ravel()])
    return out.reshape(t.shape)


def _primitive_kernel(f, t_i, s):
    return f(s)


def _double_primitive_kernel(f, t_i, s):
    return (t_i - s) * f(s)


def _pc_source(breakpoints, values, t):
    return _piecewise_constant(breakpoints, values, np.clip(t, 0.0, np.nextafter(1.0, 0.0)))


def _pc_primitive(breakpoints, values, f_at, t):
    t = np.asarray(t, dtype=float)
    idx = np.clip(np.searchsorted(breakpoints, t, side='right') - 1, 0, values.size - 1)
    return f_at[idx] + values[idx] * (t - breakpoints[idx])


def _pc_double_primitive(breakpoints, values, f_at, ff_at, t):
    t = np.asarray(t, dtype=float)
    idx = np.clip(np.searchsorted(breakpoints, t, side='right') - 1, 0, values.size - 1)
    dt = t - breakpoints[idx]
    return ff_at[idx] + f_at[idx] * dt + 0.5 * values[idx] * dt ** 2


def _sine_source(t):
    return np.sin(2 * np.pi * np.asarray(t, dtype=float))


def _sine_primitive(t):
    return (1.0 - np.cos(2 * np.pi * np.asarray(t, dtype=float))) / (2 * np.pi)


def _sine_double_primitive(t):
    t = np.asarray(t, dtype=float)
    return t / (2 * np.pi) - np.sin(2 * np.pi * t) / (4 * np.pi ** 2)


@dataclass(frozen=True)
class SourceTerm:
    """Right-hand side f on (0, 1) with its primitives.

    Attributes
    ----------
    f : callable
        Vectorized source evaluator.
    primitive : callable
        F(t) = int_0^t f.
    double_primitive : callable
        int_0^t F, so that c_star = double_primitive(1).
    breakpoints : np.ndarray
        Discontinuities of f in [0, 1), always containing 0.
    name : str
        Label used in logs and summaries.
    """
    f: Callable
    primitive: Callable
    double_primitive: Callable
    breakpoints: np.ndarray
    name: str = 'custom'

    def __post_init__(self):
        object.__setattr__(self, 'breakpoints', _check_breakpoints(self.breakpoints))

    @property
    def c_star(self):
        """c_star = int_0^1 F."""
        return float(self.double_primitive(np.array([1.0]))[0])

    @classmethod
    def constant(cls, value=1.0):
        """f identically equal to value."""
        values = np.array([float(value)])
        bps = np.zeros(1)
        return cls(partial(_pc_source, bps, values),
                   partial(_pc_primitive, bps, values, np.zeros(1)),
                   partial(_pc_double_primitive, bps, values, np.zeros(1), np.zeros(1)),
                   bps, name=f'constant({value})')

    @classmethod
    def sine(cls):
        """f(x) = sin(2 pi x)."""
        return cls(_sine_source, _sine_primitive, _sine_double_primitive, [0.0], name='sine')

    @classmethod
    def piecewise_constant(cls, breakpoints, values):
        """f equal to values[i] on [breakpoints[i], breakpoints[i+1])."""
        bps = _check_breakpoints(breakpoints)
        values = np.asarray(values, dtype=float)
        if values.shape != bps.shape:
            raise ValueError("piecewise constant source needs one value per breakpoint")
        widths = np.diff(np.concatenate([bps, [1.0]]))
        f_at = np.concatenate([[0.0], np.cumsum(values * widths)[:-1]])
        ff_at = np.concatenate([[0.0], np.cumsum(f_at * widths + 0.5 * values * widths ** 2)[:-1]])
        return cls(partial(_pc_source, bps, values),
                   partial(_pc_primitive, bps, values, f_at),
                   partial(_pc_double_primitive, bps, values, f_at, ff_at),
                   bps, name=f'piecewise_constant({values.tolist()})')

    @classmethod
    def from_function(cls, func, breakpoints=(0.0,), order=None):
        """General source, primitives integrated numerically between its breakpoints.

        Parameters
        ----------
        func : callable
            Vectorized f on [0, 1].
        breakpoints : array_like, optional
            Discontinuities of f in [0, 1).
        order : int, optional
            Gauss-Legendre order per piece. Default from CONFIG.
        """
        if order is None:
            order = CONFIG.diffhomog.quadrature.gauss_order.int()
        bps = _check_breakpoints(breakpoints)
        return cls(func,
                   partial(_vectorized_quad, _primitive_kernel, func, bps, order),
                   partial(_vectorized_quad, _double_primitive_kernel, func, bps, order),
                   bps, name=getattr(func, '__name__', 'custom'))
