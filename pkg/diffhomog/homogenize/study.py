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

Convergence of A_star_N as the truncation size N grows.
"""

__all__ = ['ConvergenceTable', 'convergence_study', 'CrossValidationReport',
           'cross_validate_1d', 'realization_seed']

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
import pandas as pd

from diffhomog.corrector_fem.mesh import build_mesh
from diffhomog.exact1d.homog import a_star
from diffhomog.homogenize.estimate import estimate_A_star
from diffhomog.mcstats.ensemble import sample_mean
from diffhomog.model.diffeo import TensorDiffeoField
from diffhomog.model.fields import PeriodicMatrixField
from diffhomog.model.problem import Problem1D, ProblemND
from diffhomog.model.seeding import stream_seed, validate_seed
from diffhomog.util.config import CONFIG, int_list

LOGGER = logging.getLogger(__name__)


def realization_seed(seed, n_cells, index):
    """Seed of realization index at truncation size n_cells."""
    return stream_seed(stream_seed(seed, n_cells), index)


def _sample_std(values):
    """Unbiased standard deviation per column, exactly 0 for identical rows."""
    dev = values - values[0]
    dev = dev - sample_mean(dev)
    return np.sqrt(np.array([math.fsum(col) for col in (dev ** 2).T]) / (values.shape[0] - 1))


def _entry_labels(prefix, dim):
    return [f'{prefix}_{i + 1}{j + 1}' for i in range(dim) for j in range(dim)]


@dataclass
class ConvergenceTable:
    """Per-N statistics of A_star_N over independent realizations.

    Attributes
    ----------
    dim : int
    table : pd.DataFrame
        Columns N, M, A_mean_ij, A_std_ij and cauchy_diff, rows ordered by N.
        cauchy_diff is the largest entry of |mean(N) - mean(previous N)|.
    min_eigs : dict
        N mapped to the smallest eigenvalue of sym(A_star_N) of every realization.
    asymmetries : dict
        N mapped to max |A_star_N - A_star_N^T| of every realization.
    """
    dim: int
    table: pd.DataFrame
    min_eigs: Dict[int, List[float]] = field(default_factory=dict)
    asymmetries: Dict[int, List[float]] = field(default_factory=dict)

    def _matrix(self, n_cells, prefix):
        row = self.table.loc[self.table.N == n_cells].iloc[0]
        return row[_entry_labels(prefix, self.dim)].to_numpy(dtype=float).reshape(self.dim,
                                                                                 self.dim)

    def mean(self, n_cells):
        """Entrywise mean of A_star_N."""
        return self._matrix(n_cells, 'A_mean')

    def std(self, n_cells):
        """Entrywise standard deviation of A_star_N."""
        return self._matrix(n_cells, 'A_std')


def _estimate(problem, n_cells, r, tol, seed, index):
    """A_star_N of one realization; module level for pickling."""
    try:
        sub_seed = realization_seed(seed, n_cells, index)
        diffeo = TensorDiffeoField.sample(problem.law, problem.dim, sub_seed, n_cells)
        est = estimate_A_star(build_mesh(problem.dim, n_cells, r), diffeo, problem.a_per, tol)
    except Exception as exc:
        raise RuntimeError(f"realization {index} at N={n_cells} of problem {problem.name} "
                           f"failed: {exc}") from exc
    return est.a_star, est.min_eig, est.asymmetry


def _estimates(problem, n_cells, n_samples, r, tol, seed, pool):
    if pool:
        chunksize = max(min(n_samples // pool.ncpus, 1000), 1)
        return pool.map(_estimate,
                        itertools.repeat(problem, n_samples),
                        itertools.repeat(n_cells, n_samples),
                        itertools.repeat(r, n_samples),
                        itertools.repeat(tol, n_samples),
                        itertools.repeat(seed, n_samples),
                        range(n_samples),
                        chunksize=chunksize)
    return [_estimate(problem, n_cells, r, tol, seed, idx) for idx in range(n_samples)]


def convergence_study(problem, n_list=None, n_samples=None, seed=0, r=None, tol=None,
                      pool=None):
    """Statistics of A_star_N for increasing N.

    Realization i at size N uses the seed realization_seed(seed, N, i), so the
    table does not depend on the pool.

    Parameters
    ----------
    problem : ProblemND
    n_list : list of int, optional
        Strictly increasing sizes N. Default from CONFIG.
    n_samples : int, optional
        Realizations M >= 2 per size. Default from CONFIG.
    seed : int, optional
        Base seed. Default: 0.
    r : int, optional
        Elements per unit cell and side. Default from CONFIG.
    tol : float, optional
        Solver tolerance. Default from CONFIG.
    pool : pathos.pools, optional
        Pool that will be used for parallel computation of the realizations.
        Default: None

    Returns
    -------
    ConvergenceTable
    """
    if n_list is None:
        n_list = int_list('study', 'n_list')
    if n_samples is None:
        n_samples = CONFIG.diffhomog.study.n_samples.int()
    n_list = [int(n_cells) for n_cells in n_list]
    if not n_list or n_list[0] < 1 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError(f"N list must be positive and strictly increasing, got {n_list}")
    n_samples = int(n_samples)
    if n_samples < 2:
        raise ValueError(f"a study needs n_samples >= 2, got {n_samples}")
    seed = validate_seed(seed)
    dim = problem.dim
    if pool:
        LOGGER.info('Using %d CPUs.', pool.ncpus)

    rows, min_eigs, asymmetries = [], {}, {}
    previous = None
    for n_cells in n_list:
        results = _estimates(problem, n_cells, n_samples, r, tol, seed, pool)
        mats = np.array([res[0].ravel() for res in results])
        mean = sample_mean(mats)
        std = _sample_std(mats)
        cauchy = np.nan if previous is None else float(np.max(np.abs(mean - previous)))
        previous = mean
        row = {'N': n_cells, 'M': n_samples}
        row.update(zip(_entry_labels('A_mean', dim), mean))
        row.update(zip(_entry_labels('A_std', dim), std))
        row['cauchy_diff'] = cauchy
        rows.append(row)
        min_eigs[n_cells] = [res[1] for res in results]
        asymmetries[n_cells] = [res[2] for res in results]
        LOGGER.info('N=%d: mean A_star_N %s, std %s, cauchy difference %.3g',
                    n_cells, np.round(mean, 6), np.round(std, 6), cauchy)
    return ConvergenceTable(dim, pd.DataFrame(rows), min_eigs, asymmetries)


@dataclass
class CrossValidationReport:
    """FEM mean of A_star_N in d = 1 against the exact 1D homogenized coefficient.

    Attributes
    ----------
    a_star_exact : float
    fem_mean, fem_std : float
        Mean and standard deviation of A_star_N over the realizations.
    rel_gap : float
        |fem_mean - a_star_exact| / a_star_exact.
    n_cells, n_samples, r : int
    """
    a_star_exact: float
    fem_mean: float
    fem_std: float
    rel_gap: float
    n_cells: int
    n_samples: int
    r: int


def _reduce_1d(problem):
    if isinstance(problem, Problem1D):
        return problem.law, problem.a_per, problem.name
    if isinstance(problem, ProblemND) and problem.scalar_reduction is not None:
        return problem.law, problem.scalar_reduction, problem.name
    raise ValueError(f"problem {problem.name} has no one-dimensional reduction")


def cross_validate_1d(problem, n_cells=None, n_samples=None, seed=0, r=None, tol=None,
                      pool=None):
    """Compare the d = 1 FEM estimate of A_star_N with the exact homogenized coefficient.

    Parameters
    ----------
    problem : Problem1D or ProblemND
        A ProblemND must have a scalar reduction (laminate or d = 1 field).
    n_cells : int, optional
        Default from CONFIG study.cross_n_cells.
    n_samples : int, optional
        Default from CONFIG study.cross_n_samples.
    seed : int, optional
    r : int, optional
    tol : float, optional
    pool : pathos.pools, optional

    Returns
    -------
    CrossValidationReport
    """
    law, scalar, name = _reduce_1d(problem)
    if n_cells is None:
        n_cells = CONFIG.diffhomog.study.cross_n_cells.int()
    if n_samples is None:
        n_samples = CONFIG.diffhomog.study.cross_n_samples.int()
    if r is None:
        r = CONFIG.diffhomog.fem.r.int()
    exact = a_star(law, scalar).a_star
    reduced = ProblemND(law, PeriodicMatrixField.from_scalar(scalar), f'{name}_1d')
    table = convergence_study(reduced, [n_cells], n_samples, seed, r, tol, pool)
    fem_mean = float(table.mean(n_cells)[0, 0])
    report = CrossValidationReport(
        a_star_exact=exact,
        fem_mean=fem_mean,
        fem_std=float(table.std(n_cells)[0, 0]),
        rel_gap=abs(fem_mean - exact) / exact,
        n_cells=int(n_cells),
        n_samples=int(n_samples),
        r=int(r),
    )
    LOGGER.info('1D cross-validation of %s: FEM %.6g vs exact %.6g, gap %.3g%%',
                name, fem_mean, exact, 100 * report.rel_gap)
    return report
