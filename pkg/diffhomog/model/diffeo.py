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

Random diffeomorphisms with i.i.d. cell amplitudes.

The derivative of a path is phi'(y) = 1 + X_k G_per(y) on [k, k+1), with
|X_k| <= m < 1 and |G_per| <= m, so that 1 - m^2 <= phi' <= 1 + m^2.
"""

__all__ = ['XDistribution', 'GShape', 'DiffeoLaw', 'DiffeoPath', 'TensorDiffeoField',
           'AssumptionReport', 'sample_path', 'verify_assumptions']

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from diffhomog.model.fields import PeriodicMatrixField, PeriodicScalarField
from diffhomog.model.seeding import stream_seed, uniforms, validate_seed
from diffhomog.util.config import CONFIG

LOGGER = logging.getLogger(__name__)

RANGE_MARGIN = 16
"""Extra cells realized on each side whenever a path range has to grow"""


class XDistribution(Enum):
    """Distribution of the cell amplitudes X_k, all supported on [-m, m].

    Attributes
    ----------
    uniform : str
        Uniform(-m, m), centered.
    uniform_positive : str
        Uniform(0, m), not centered.
    two_point : str
        Symmetric two-point law on {-m, +m}.
    """
    uniform = 'uniform'
    uniform_positive = 'uniform_positive'
    two_point = 'two_point'

    def draw(self, u, m):
        """Map uniforms u in [0, 1) to amplitudes."""
        if self is XDistribution.uniform:
            return m * (2.0 * u - 1.0)
        if self is XDistribution.uniform_positive:
            return m * u
        return np.where(u < 0.5, -m, m)

    def mean(self, m):
        return m / 2 if self is XDistribution.uniform_positive else 0.0

    def var(self, m):
        if self is XDistribution.uniform:
            return m ** 2 / 3
        if self is XDistribution.uniform_positive:
            return m ** 2 / 12
        return m ** 2


class GShape(Enum):
    """Shape function G_per on [0, 1), scaled so that sup |G_per| = m.

    Attributes
    ----------
    sine : str
        m sin(2 pi y), zero mean.
    haar : str
        m on [0, 1/2), -m on [1/2, 1), zero mean; phi is then piecewise affine.
    ramp : str
        m y, mean m/2, so that the cell increments D_k are random.
    """
    sine = 'sine'
    haar = 'haar'
    ramp = 'ramp'

    @property
    def breakpoints(self):
        return np.array([0.0, 0.5]) if self is GShape.haar else np.array([0.0])

    def value(self, s, m):
        """G_per at s in [0, 1)."""
        if self is GShape.sine:
            return m * np.sin(2 * np.pi * s)
        if self is GShape.haar:
            return np.where(s < 0.5, m, -m)
        return m * s

    def antiderivative(self, s, m):
        """int_0^s G_per for s in [0, 1]."""
        if self is GShape.sine:
            return m * (1.0 - np.cos(2 * np.pi * s)) / (2 * np.pi)
        if self is GShape.haar:
            return np.where(s < 0.5, m * s, m * (1.0 - s))
        return 0.5 * m * s ** 2

    def integral(self, m):
        """int_0^1 G_per."""
        return 0.5 * m if self is GShape.ramp else 0.0


@dataclass(frozen=True)
class DiffeoLaw:
    """Law of the random diffeomorphism.

    Attributes
    ----------
    m : float
        Amplitude, 0 <= m < 1. m = 0 is the deterministic identity law.
    x_dist : XDistribution
        Distribution of the i.i.d. cell amplitudes X_k.
    g_per : GShape
        Periodic shape function.
    """
    m: float = 0.0
    x_dist: XDistribution = XDistribution.uniform
    g_per: GShape = GShape.sine

    def __post_init__(self):
        object.__setattr__(self, 'x_dist', XDistribution(self.x_dist))
        object.__setattr__(self, 'g_per', GShape(self.g_per))
        if not (isinstance(self.m, (int, float)) and 0 <= self.m < 1):
            raise ValueError("amplitude m must satisfy 0 <= m < 1 so that "
                             f"1 - m^2 <= phi' <= 1 + m^2, got m={self.m}")
        object.__setattr__(self, 'm', float(self.m))

    @property
    def nu(self):
        """Lower bound 1 - m^2 of phi'."""
        return 1.0 - self.m ** 2

    @property
    def m_bound(self):
        """Upper bound 1 + m^2 of phi'."""
        return 1.0 + self.m ** 2

    @property
    def mean_x(self):
        return self.x_dist.mean(self.m)

    @property
    def var_x(self):
        return self.x_dist.var(self.m)

    @property
    def g_mean(self):
        """int_0^1 G_per."""
        return self.g_per.integral(self.m)

    @property
    def mean_d(self):
        """E(D_0) = E(int_0^1 phi') = 1 + E(X_0) int_0^1 G_per."""
        return 1.0 + self.mean_x * self.g_mean

    @property
    def is_deterministic(self):
        return self.m == 0.0

    def g_value(self, y):
        """G_per extended periodically."""
        return self.g_per.value(np.mod(y, 1.0), self.m)

    def draw_cells(self, seed, indices):
        """Amplitudes X_k for the given cell indices, pure function of (seed, k)."""
        if self.is_deterministic:
            return np.zeros(np.shape(indices))
        return self.x_dist.draw(uniforms(seed, indices), self.m)

    def describe(self):
        return {'m': self.m, 'x_dist': self.x_dist.value, 'g_per': self.g_per.value}


def _as_output(values, like):
    if np.ndim(like) == 0:
        return float(values.reshape(-1)[0])
    return values.reshape(np.shape(like))


class DiffeoPath:
    """One realization of the random diffeomorphism, anchored at phi(0) = 0.

    Cell amplitudes are realized lazily over an integer range that grows on
    demand. Growing recomputes the range from the stateless hash, so values
    already seen never change. A path is safe to share read-only between
    workers once its range covers every query; growth itself is not
    synchronized.

    Attributes
    ----------
    law : DiffeoLaw
        The law the cells are drawn from.
    seed : int or None
        Master seed, None for a path built from prescribed cells.
    """

    def __init__(self, law, seed=None, cell_range=(0, 1), cells=None):
        self.law = law
        self.seed = None if seed is None else validate_seed(seed)
        self._fixed = cells is not None
        self._lo = self._hi = 0
        self._x = np.zeros(0)
        self._phi_int = np.zeros(1)
        if self._fixed:
            cells = np.asarray(cells, dtype=float)
            if np.any(np.abs(cells) > law.m * (1 + 1e-12)):
                raise ValueError(f"prescribed cell amplitudes must lie in [-m, m], m={law.m}")
            lo = int(cell_range[0])
            hi = lo + cells.size
            if not lo <= 0 <= hi:
                raise ValueError("prescribed cells must cover the anchor y = 0")
            self._build(lo, hi, cells)
        else:
            if self.seed is None:
                raise ValueError("a sampled path needs a seed")
            self.ensure_range(*cell_range)

    @classmethod
    def from_cells(cls, law, cells, start=0):
        """Path with prescribed amplitudes X_start, X_start+1, ...; cannot grow."""
        return cls(law, cell_range=(start, start + len(cells)), cells=cells)

    @property
    def cell_range(self) -> Tuple[int, int]:
        """Currently realized cells [lo, hi)."""
        return self._lo, self._hi

    def _build(self, lo, hi, cells=None):
        if cells is None:
            cells = self.law.draw_cells(self.seed, np.arange(lo, hi))
        incr = 1.0 + cells * self.law.g_mean
        forward = np.cumsum(incr[-lo:])
        backward = -np.cumsum(incr[:-lo][::-1])[::-1] if lo < 0 else np.zeros(0)
        self._lo, self._hi = lo, hi
        self._x = cells
        self._phi_int = np.concatenate([backward, [0.0], forward])

    def ensure_range(self, lo, hi):
        """Realize at least the cells [lo, hi)."""
        lo, hi = int(lo), int(hi)
        if hi <= lo:
            raise ValueError(f"cell range must be nonempty, got [{lo}, {hi})")
        if lo >= self._lo and hi <= self._hi:
            return
        if self._fixed:
            raise ValueError(f"cells [{lo}, {hi}) lie outside the prescribed cells "
                             f"[{self._lo}, {self._hi})")
        new_lo = min(lo, self._lo, 0)
        new_hi = max(hi, self._hi, 1)
        if self._hi > self._lo:
            new_lo = new_lo - RANGE_MARGIN if new_lo < self._lo else new_lo
            new_hi = new_hi + RANGE_MARGIN if new_hi > self._hi else new_hi
        self._build(new_lo, new_hi)

    def cells(self, k_lo, k_hi):
        """Amplitudes X_k for k in [k_lo, k_hi)."""
        self.ensure_range(k_lo, k_hi)
        return self._x[k_lo - self._lo:k_hi - self._lo].copy()

    def increments(self, k_lo, k_hi):
        """D_k = phi(k+1) - phi(k) for k in [k_lo, k_hi)."""
        return 1.0 + self.cells(k_lo, k_hi) * self.law.g_mean

    def _locate(self, y):
        y = np.asarray(y, dtype=float).ravel()
        k = np.floor(y).astype(np.int64)
        if self._fixed:
            k = np.where(y == self._hi, k - 1, k)
        if k.size:
            self.ensure_range(int(k.min()), int(k.max()) + 1)
        return k - self._lo, y - k

    def phi(self, y):
        """phi(y): whole-cell increments plus the partial-cell integral."""
        idx, s = self._locate(y)
        values = (self._phi_int[idx] + s
                  + self._x[idx] * self.law.g_per.antiderivative(s, self.law.m))
        return _as_output(values, y)

    def phi_prime(self, y):
        """phi'(y) = 1 + X_floor(y) G_per(y), within [nu, m_bound]."""
        idx, s = self._locate(y)
        values = 1.0 + self._x[idx] * self.law.g_per.value(s, self.law.m)
        return _as_output(values, y)

    def phi_inverse(self, z, tol=None):
        """Solve phi(y) = z.

        The cell holding the root is found from the integer values phi(k). Inside
        the cell the root is bracketed by [0, 1], narrowed by bisection and
        polished by Newton steps that fall back to bisection when they leave the
        bracket.

        Parameters
        ----------
        z : float or array_like
            Target values.
        tol : float, optional
            Accept y once |phi(y) - z| <= tol * max(1, |z|). Default from CONFIG.

        Returns
        -------
        float or np.ndarray
        """
        if tol is None:
            tol = CONFIG.diffhomog.quadrature.inverse_tol.float()
        if tol <= 0:
            raise ValueError(f"tolerance must be positive, got {tol}")
        zf = np.asarray(z, dtype=float).ravel()
        if zf.size == 0:
            return _as_output(zf, z)
        law = self.law
        y_lo = min(np.min(zf / law.nu), np.min(zf / law.m_bound))
        y_hi = max(np.max(zf / law.nu), np.max(zf / law.m_bound))
        if self._fixed:
            if np.any(zf < self._phi_int[0]) or np.any(zf > self._phi_int[-1]):
                raise ValueError("values lie outside the image of the prescribed cells")
            zf = np.minimum(zf, np.nextafter(self._phi_int[-1], -np.inf))
        else:
            self.ensure_range(math.floor(y_lo) - 1, math.ceil(y_hi) + 2)

        j = np.searchsorted(self._phi_int, zf, side='right') - 1
        if np.any(j < 0) or np.any(j >= self._phi_int.size - 1):
            raise RuntimeError("could not bracket phi^{-1}: phi is not monotone on the "
                               "realized cells, the path violates 1 - m^2 <= phi'")
        target = zf - self._phi_int[j]
        amp = self._x[j]
        gshape, m = law.g_per, law.m

        def residual(s):
            return s + amp * gshape.antiderivative(s, m) - target

        lower, upper = np.zeros_like(zf), np.ones_like(zf)
        width = CONFIG.diffhomog.quadrature.bisection_width.float()
        for _ in range(max(1, math.ceil(-math.log2(width)))):
            mid = 0.5 * (lower + upper)
            right = residual(mid) > 0
            upper = np.where(right, mid, upper)
            lower = np.where(right, lower, mid)
        s = 0.5 * (lower + upper)
        # margin for the rounding of phi re-evaluated at the returned point
        accept = 0.1 * tol * np.maximum(1.0, np.abs(zf))
        for _ in range(64):
            res = residual(s)
            done = np.abs(res) <= accept
            if np.all(done):
                break
            lower = np.where(res < 0, s, lower)
            upper = np.where(res > 0, s, upper)
            newton = s - res / (1.0 + amp * gshape.value(s, m))
            outside = (newton < lower) | (newton > upper)
            s = np.where(done, s, np.where(outside, 0.5 * (lower + upper), newton))
        else:
            raise RuntimeError("phi^{-1} did not reach tolerance "
                               f"{tol}, worst residual {np.max(np.abs(residual(s)))}")
        return _as_output(j + self._lo + s, z)


class TensorDiffeoField:
    """Tensorized diffeomorphism phi(x)_i = phi_i(x_i) of independent paths.

    Attributes
    ----------
    components : list of DiffeoPath
        One path per axis.
    seed : int or None
        Seed the components were derived from.
    """

    def __init__(self, components: List[DiffeoPath], seed: Optional[int] = None):
        if not components:
            raise ValueError("a tensorized field needs at least one component")
        self.components = list(components)
        self.seed = seed

    @property
    def dim(self):
        return len(self.components)

    @property
    def law(self):
        return self.components[0].law

    @property
    def nu(self):
        return min(comp.law.nu for comp in self.components)

    @property
    def m_bound(self):
        return max(comp.law.m_bound for comp in self.components)

    @classmethod
    def identity(cls, dim):
        """phi(x) = x."""
        law = DiffeoLaw()
        return cls([sample_path(law, (0, 1), 0) for _ in range(dim)], seed=0)

    @classmethod
    def sample(cls, law, dim, seed, n_cells=1):
        """Independent components with per-axis seeds derived from seed."""
        return cls([sample_path(law, (0, max(1, n_cells)), stream_seed(seed, axis))
                    for axis in range(dim)], seed=seed)

    def ensure_range(self, lo, hi):
        for comp in self.components:
            comp.ensure_range(lo, hi)

    def gradient(self, y):
        """Diagonal entries of grad phi at points y of shape (..., d)."""
        y = np.asarray(y, dtype=float)
        return np.stack([comp.phi_prime(y[..., i]) for i, comp in enumerate(self.components)],
                        axis=-1)

    def jacobian_det(self, y):
        return np.prod(self.gradient(y), axis=-1)

    def phi(self, y):
        y = np.asarray(y, dtype=float)
        return np.stack([comp.phi(y[..., i]) for i, comp in enumerate(self.components)],
                        axis=-1)


def sample_path(law, cell_range, seed):
    """Sample a path of law with cells [cell_range[0], cell_range[1]) realized.

    Parameters
    ----------
    law : DiffeoLaw
    cell_range : tuple of int
        Nonempty half-open range of cells to realize up front.
    seed : int
        Master seed in [0, 2**64).

    Returns
    -------
    DiffeoPath
    """
    lo, hi = int(cell_range[0]), int(cell_range[1])
    if hi <= lo:
        raise ValueError(f"cell range must be nonempty, got [{lo}, {hi})")
    return DiffeoPath(law, seed=seed, cell_range=(lo, hi))


@dataclass
class AssumptionReport:
    """Outcome of verify_assumptions.

    Attributes
    ----------
    nu, m_bound : float
        Bounds of phi'.
    a_minus, a_plus : float
        Declared bounds of the coefficient.
    checks : dict
        Name of each assumption mapped to whether it holds.
    """
    nu: float
    m_bound: float
    a_minus: float
    a_plus: float
    checks: Dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())

    @property
    def failures(self):
        return [name for name, ok in self.checks.items() if not ok]


def verify_assumptions(law, coeff):
    """Check the law and a coefficient field against the standing assumptions.

    Failures are reported, never raised.

    Parameters
    ----------
    law : DiffeoLaw
    coeff : PeriodicScalarField or PeriodicMatrixField

    Returns
    -------
    AssumptionReport
    """
    rtol = 1e-12
    report = AssumptionReport(law.nu, law.m_bound, coeff.a_minus, coeff.a_plus)
    report.checks['nu_positive'] = law.nu > 0
    report.checks['m_bound_finite'] = bool(np.isfinite(law.m_bound))
    g_samples = law.g_value(np.linspace(0, 1, 1025))
    report.checks['g_per_bounded'] = bool(np.max(np.abs(g_samples)) <= law.m * (1 + rtol))
    report.checks['a_minus_positive'] = coeff.a_minus > 0
    report.checks['breakpoints_sorted'] = bool(
        np.all(np.diff(coeff.breakpoints) > 0) and 0 <= coeff.breakpoints[0]
        and coeff.breakpoints[-1] < 1)

    if isinstance(coeff, PeriodicScalarField):
        pts = coeff.sample_points()
        vals = coeff(pts)
        report.checks['field_bounds'] = bool(np.all(vals >= coeff.a_minus * (1 - rtol))
                                             and np.all(vals <= coeff.a_plus * (1 + rtol)))
        report.checks['field_periodic'] = bool(np.allclose(coeff(pts + 1.0), vals, rtol=rtol))
    elif isinstance(coeff, PeriodicMatrixField):
        pts = coeff.sample_points()
        mats = coeff(pts)
        sym = 0.5 * (mats + np.swapaxes(mats, -1, -2))
        report.checks['field_coercive'] = bool(
            np.min(np.linalg.eigvalsh(sym)) >= coeff.a_minus * (1 - rtol))
        report.checks['field_bounds'] = bool(np.max(np.abs(mats)) <= coeff.a_plus * (1 + rtol))
        report.checks['field_periodic'] = bool(np.allclose(coeff(pts + 1.0), mats, rtol=rtol))
        if coeff.symmetric:
            report.checks['field_symmetric'] = bool(np.allclose(mats, np.swapaxes(mats, -1, -2)))
    else:
        raise TypeError(f"unsupported coefficient type {type(coeff).__name__}")

    if not report.passed:
        LOGGER.warning("Assumptions violated for %s: %s", getattr(coeff, 'name', coeff),
                       ', '.join(report.failures))
    return report
