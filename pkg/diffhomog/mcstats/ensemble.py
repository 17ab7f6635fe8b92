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

Monte Carlo ensembles of the scaled residual process (u_eps - u_star) / sqrt(eps).
"""

__all__ = ['Ensemble', 'run_ensemble', 'sample_mean']

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from diffhomog.exact1d.homog import a_star
from diffhomog.exact1d.solution import (default_grid, error_norms, residual_decompose,
                                        solve_oscillatory)
from diffhomog.model.diffeo import sample_path
from diffhomog.model.seeding import stream_seed, validate_seed

LOGGER = logging.getLogger(__name__)

NORM_COLUMNS = ['residual_l2', 'remainder_l2', 'corrector_l2', 'corrector_h1']
"""Columns of Ensemble.norms"""


@dataclass
class Ensemble:
    """M realizations of the residual decomposition at one eps.

    Row i of every array belongs to the path seeded with stream_seed(seed, i).

    Attributes
    ----------
    problem : Problem1D
    eps : float
    seed : int
        Master seed.
    grid : np.ndarray
        Evaluation points, shape (G,).
    residuals : np.ndarray
        (u_eps - u_star) / sqrt(eps) on the grid, shape (M, G).
    leading : np.ndarray
        The K_0 term divided by sqrt(eps), shape (M, G).
    z_bar : np.ndarray
        eps^{-1/2} int_0^1 K_0(1/2, t) psi(phi^{-1}(t/eps)) dt, shape (M,).
    mismatch : np.ndarray
        Remainder consistency gap of each realization, shape (M,).
    norms : pd.DataFrame or None
        Squared error norms per realization, see NORM_COLUMNS.
    """
    problem: object
    eps: float
    seed: int
    grid: np.ndarray
    residuals: np.ndarray
    leading: np.ndarray
    z_bar: np.ndarray
    mismatch: np.ndarray
    norms: Optional[pd.DataFrame] = None

    @property
    def n_samples(self):
        return self.residuals.shape[0]

    def grid_index(self, x):
        """Index of the grid point closest to x."""
        return int(np.argmin(np.abs(self.grid - x)))


def sample_mean(values):
    """Column means in index order with exactly rounded sums."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        return math.fsum(values) / values.size
    return np.array([math.fsum(col) for col in values.T]) / values.shape[0]


def _realize(problem, h, eps, grid, seed, norms, index):
    """Residual decomposition of realization index; module level for pickling."""
    try:
        path = sample_path(problem.law, (0, int(math.ceil(1.0 / eps)) + 1),
                           stream_seed(seed, index))
        solution = solve_oscillatory(path, problem.a_per, problem.source, eps)
        decomp = residual_decompose(path, problem.a_per, problem.source, h, eps, grid=grid,
                                    solution=solution)
        err = error_norms(solution, h) if norms else None
    except Exception as exc:
        raise RuntimeError(f"realization {index} of problem {problem.name} at eps={eps} "
                           f"failed: {exc}") from exc
    row = None
    if err is not None:
        row = [err.residual_l2, err.remainder_l2, err.corrector_l2, err.corrector_h1]
    return decomp.residual, decomp.leading, decomp.mismatch, row


def run_ensemble(problem, eps, n_samples, grid=None, seed=0, pool=None, norms=False):
    """Sample n_samples paths and decompose the residual of each one.

    Realization i only depends on (seed, i), so the result is the same for any
    pool and any number of workers.

    Parameters
    ----------
    problem : Problem1D
    eps : float
        Scale of the oscillations, eps > 0.
    n_samples : int
        Number of realizations M >= 2.
    grid : array_like, optional
        Points of [0, 1]. Default: uniform grid of CONFIG size. The midpoint
        1/2 is always evaluated for z_bar.
    seed : int, optional
        Master seed. Default: 0.
    pool : pathos.pools, optional
        Pool that will be used for parallel computation of the realizations.
        Default: None
    norms : bool, optional
        Also compute the squared error norms of every realization. Default: False.

    Returns
    -------
    Ensemble
    """
    if not eps > 0:
        raise ValueError(f"eps must satisfy eps > 0, got {eps}")
    n_samples = int(n_samples)
    if n_samples < 2:
        raise ValueError(f"an ensemble needs n_samples >= 2, got {n_samples}")
    seed = validate_seed(seed)
    grid = default_grid(grid)
    eval_grid = np.append(grid, 0.5)
    h = a_star(problem.law, problem.a_per)

    LOGGER.info('Sampling %d realizations of %s at eps=%g.', n_samples, problem.name, eps)
    if pool:
        LOGGER.info('Using %d CPUs.', pool.ncpus)
        chunksize = max(min(n_samples // pool.ncpus, 1000), 1)
        results = pool.map(_realize,
                           itertools.repeat(problem, n_samples),
                           itertools.repeat(h, n_samples),
                           itertools.repeat(eps, n_samples),
                           itertools.repeat(eval_grid, n_samples),
                           itertools.repeat(seed, n_samples),
                           itertools.repeat(norms, n_samples),
                           range(n_samples),
                           chunksize=chunksize)
    else:
        last_perc = 0
        results = []
        for idx in range(n_samples):
            perc = 100 * idx // n_samples
            if perc - last_perc >= 10:
                LOGGER.info("Progress: %d%%", perc)
                last_perc = perc
            results.append(_realize(problem, h, eps, eval_grid, seed, norms, idx))

    scale = 1.0 / math.sqrt(eps)
    residuals = np.array([res[0] for res in results]) * scale
    leading = np.array([res[1] for res in results]) * scale
    table = None
    if norms:
        table = pd.DataFrame([res[3] for res in results], columns=NORM_COLUMNS,
                             index=pd.RangeIndex(n_samples, name='sample'))
    return Ensemble(
        problem=problem,
        eps=float(eps),
        seed=seed,
        grid=grid,
        residuals=residuals[:, :-1],
        leading=leading[:, :-1],
        z_bar=leading[:, -1].copy(),
        mismatch=np.array([res[2] for res in results]),
        norms=table,
    )
