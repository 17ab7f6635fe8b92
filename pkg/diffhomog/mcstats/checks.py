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

Statistical checks of Monte Carlo ensembles against the Gaussian limit.
"""

__all__ = ['batch_standard_error', 'empirical_cov', 'CLTReport', 'clt_check',
           'MomentReport', 'moment_bound_check', 'increment_scaling', 'RateFit', 'rate_fit',
           'default_eps_list']

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
import statsmodels.api as sm
from scipy import stats

from diffhomog.exact1d.homog import a_star
from diffhomog.exact1d.solution import psi_integral, solve_oscillatory
from diffhomog.mcstats.ensemble import sample_mean
from diffhomog.model.diffeo import sample_path
from diffhomog.model.seeding import stream_seed, validate_seed
from diffhomog.util.config import CONFIG, int_list

LOGGER = logging.getLogger(__name__)

MIN_CLT_SAMPLES = 1000
"""Sample size below which the CLT report is flagged as unreliable"""

MIN_COV_SAMPLES = 30
"""Sample size below which covariance standard errors are flagged as unreliable"""


def default_eps_list():
    """The eps ladder 1 / d for d in CONFIG mcstats.eps_denominators."""
    return [1.0 / denom for denom in int_list('mcstats', 'eps_denominators')]


def batch_standard_error(values, n_batches=None):
    """Standard error of the mean of values by batch means.

    Parameters
    ----------
    values : array_like
        Samples in index order.
    n_batches : int, optional
        Upper bound on the number of batches, the effective number is at most
        len(values) // 2. Default from CONFIG.

    Returns
    -------
    float
        nan when fewer than two batches fit.
    """
    values = np.asarray(values, dtype=float).ravel()
    if n_batches is None:
        n_batches = CONFIG.diffhomog.mcstats.n_batches.int()
    n_batches = min(int(n_batches), values.size // 2)
    if n_batches < 2:
        return float('nan')
    means = np.array([sample_mean(batch) for batch in np.array_split(values, n_batches)])
    return float(np.std(means, ddof=1) / math.sqrt(n_batches))


def _sample_matrix(samples):
    values = samples.residuals if hasattr(samples, 'residuals') else samples
    values = np.asarray(values, dtype=float)
    return values[:, None] if values.ndim == 1 else values


def empirical_cov(ensemble, x_idx, y_idx, n_batches=None):
    """Unbiased sample covariance of two grid columns and its standard error.

    Parameters
    ----------
    ensemble : Ensemble or array_like
        An Ensemble (its scaled residuals are used) or a sample matrix (M, G).
    x_idx, y_idx : int
        Column indices.
    n_batches : int, optional
        See batch_standard_error.

    Returns
    -------
    estimate, standard_error : float
    """
    values = _sample_matrix(ensemble)
    n_samples = values.shape[0]
    if n_samples < 2:
        raise ValueError(f"a covariance needs at least 2 samples, got {n_samples}")
    if n_samples < MIN_COV_SAMPLES:
        LOGGER.warning("Covariance from %d < %d samples, the standard error is unreliable.",
                       n_samples, MIN_COV_SAMPLES)
    # shifted by the first sample so that identical samples give exactly 0
    dev_x = values[:, x_idx] - values[0, x_idx]
    dev_y = values[:, y_idx] - values[0, y_idx]
    dev_x = dev_x - sample_mean(dev_x)
    dev_y = dev_y - sample_mean(dev_y)
    products = dev_x * dev_y * (n_samples / (n_samples - 1))
    return sample_mean(products), batch_standard_error(products, n_batches)


@dataclass
class CLTReport:
    """z-scores of a scalar sample against Normal(0, target_var).

    Attributes
    ----------
    n : int
    mean, variance : float
        Sample mean and unbiased variance.
    target_var : float
    z_mean, z_var, z_skew, z_kurt : float
        Standardized mean, variance gap, skewness and excess kurtosis.
    ks_distance, ks_critical : float
        One-sample Kolmogorov-Smirnov distance and its asymptotic critical value.
    z_threshold : float
    """
    n: int
    mean: float
    variance: float
    target_var: float
    z_mean: float
    z_var: float
    z_skew: float
    z_kurt: float
    ks_distance: float
    ks_critical: float
    z_threshold: float

    def checks(self, prefix='clt'):
        """Check records {name, statistic, threshold, pass}."""
        records = [{'name': f'{prefix}.{name}', 'statistic': abs(value),
                    'threshold': self.z_threshold, 'pass': bool(abs(value) < self.z_threshold)}
                   for name, value in [('z_mean', self.z_mean), ('z_var', self.z_var),
                                       ('z_skew', self.z_skew), ('z_kurt', self.z_kurt)]]
        records.append({'name': f'{prefix}.ks', 'statistic': self.ks_distance,
                        'threshold': self.ks_critical,
                        'pass': bool(self.ks_distance < self.ks_critical)})
        return records

    @property
    def passed(self):
        return all(rec['pass'] for rec in self.checks())


def clt_check(samples, target_var, z_threshold=None, ks_level=None):
    """Compare scalar samples with Normal(0, target_var).

    Parameters
    ----------
    samples : array_like
        At least 1000 values for meaningful scores.
    target_var : float
        Variance of the limit law, positive.
    z_threshold : float, optional
        Pass bound on |z|. Default from CONFIG.
    ks_level : float, optional
        Level of the KS critical value. Default from CONFIG.

    Returns
    -------
    CLTReport
    """
    samples = np.asarray(samples, dtype=float).ravel()
    n = samples.size
    if n < 2:
        raise ValueError(f"clt_check needs at least 2 samples, got {n}")
    if not target_var > 0:
        raise ValueError(f"target_var must be positive, got {target_var}")
    if n < MIN_CLT_SAMPLES:
        LOGGER.warning("CLT check on %d < %d samples.", n, MIN_CLT_SAMPLES)
    if z_threshold is None:
        z_threshold = CONFIG.diffhomog.mcstats.z_threshold.float()
    if ks_level is None:
        ks_level = CONFIG.diffhomog.mcstats.ks_level.float()

    mean = sample_mean(samples)
    dev = samples - mean
    variance = math.fsum(dev ** 2) / (n - 1)
    if variance > 0:
        skew = float(stats.skew(samples))
        kurt = float(stats.kurtosis(samples))
    else:
        skew = kurt = 0.0
    ks_distance = float(stats.kstest(samples, 'norm', args=(0.0, math.sqrt(target_var)))[0])
    report = CLTReport(
        n=n,
        mean=mean,
        variance=variance,
        target_var=float(target_var),
        z_mean=mean / math.sqrt(target_var / n),
        z_var=(variance - target_var) / (target_var * math.sqrt(2.0 / (n - 1))),
        z_skew=skew / math.sqrt(6.0 / n),
        z_kurt=kurt / math.sqrt(24.0 / n),
        ks_distance=ks_distance,
        ks_critical=float(stats.kstwobign.isf(ks_level) / math.sqrt(n)),
        z_threshold=float(z_threshold),
    )
    LOGGER.debug("CLT check: %s", report)
    return report


@dataclass
class MomentReport:
    """Empirical moments E[Z_eps^{2p}] against (beta - alpha)^p + eps^{(p-1)/2}.

    Attributes
    ----------
    alpha, beta : float
    table : pd.DataFrame
        Columns eps, p, moment, std_err, denominator, ratio, one row per (eps, p).
    """
    alpha: float
    beta: float
    table: pd.DataFrame

    def spread(self, p):
        """Largest ratio over the median ratio across eps for exponent p."""
        ratios = self.table.loc[self.table.p == p, 'ratio'].to_numpy()
        median = np.median(ratios)
        return float(np.max(ratios) / median) if median > 0 else 0.0

    def checks(self, factor=10.0):
        return [{'name': f'moment_bound.p{p}', 'statistic': self.spread(p),
                 'threshold': factor, 'pass': bool(self.spread(p) <= factor)}
                for p in sorted(self.table.p.unique())]

    def passed(self, factor=10.0):
        return all(rec['pass'] for rec in self.checks(factor))


def _z_sample(problem, h, eps, alpha, beta, seed, index):
    """Z_eps(alpha, beta) of realization index."""
    try:
        path = sample_path(problem.law, (0, int(math.ceil(1.0 / eps)) + 1),
                           stream_seed(seed, index))
        solution = solve_oscillatory(path, problem.a_per, problem.source, eps)
        p_ends = psi_integral(solution, h, np.array([alpha, beta]))
    except Exception as exc:
        raise RuntimeError(f"realization {index} of problem {problem.name} at eps={eps} "
                           f"failed: {exc}") from exc
    return float((p_ends[1] - p_ends[0]) / math.sqrt(eps))


def _z_samples(problem, h, eps, alpha, beta, n_samples, seed, pool):
    if pool:
        chunksize = max(min(n_samples // pool.ncpus, 1000), 1)
        return np.array(pool.map(_z_sample,
                                 itertools.repeat(problem, n_samples),
                                 itertools.repeat(h, n_samples),
                                 itertools.repeat(eps, n_samples),
                                 itertools.repeat(alpha, n_samples),
                                 itertools.repeat(beta, n_samples),
                                 itertools.repeat(seed, n_samples),
                                 range(n_samples),
                                 chunksize=chunksize))
    return np.array([_z_sample(problem, h, eps, alpha, beta, seed, idx)
                     for idx in range(n_samples)])


def moment_bound_check(problem, p, eps_list=None, alpha=0.0, beta=1.0, n_samples=1000,
                       seed=0, pool=None, n_batches=None):
    """Empirical moments of Z_eps(alpha, beta) = eps^{-1/2} int_alpha^beta psi(phi^{-1}(t/eps)).

    Every eps uses the same realization seeds stream_seed(seed, i).

    Parameters
    ----------
    problem : Problem1D
    p : int or list of int
        Exponents, 1 <= p <= 4.
    eps_list : list of float, optional
        Default: the CONFIG eps ladder.
    alpha, beta : float
        0 <= alpha < beta <= 1.
    n_samples : int
    seed : int
    pool : pathos.pools, optional
    n_batches : int, optional
        See batch_standard_error.

    Returns
    -------
    MomentReport
    """
    p_values = [int(val) for val in np.atleast_1d(p)]
    if any(not 1 <= val <= 4 for val in p_values):
        raise ValueError(f"moment exponents must satisfy 1 <= p <= 4, got {p_values}")
    if not 0.0 <= alpha < beta <= 1.0:
        raise ValueError(f"need 0 <= alpha < beta <= 1, got alpha={alpha}, beta={beta}")
    n_samples = int(n_samples)
    if n_samples < 2:
        raise ValueError(f"moment estimates need n_samples >= 2, got {n_samples}")
    seed = validate_seed(seed)
    eps_list = default_eps_list() if eps_list is None else [float(eps) for eps in eps_list]
    h = a_star(problem.law, problem.a_per)

    rows = []
    for eps in eps_list:
        LOGGER.info('Moments of Z_eps of %s at eps=%g from %d realizations.',
                    problem.name, eps, n_samples)
        z_vals = _z_samples(problem, h, eps, float(alpha), float(beta), n_samples, seed, pool)
        for p_val in p_values:
            powers = z_vals ** (2 * p_val)
            moment = sample_mean(powers)
            denom = (beta - alpha) ** p_val + eps ** ((p_val - 1) / 2.0)
            rows.append({'eps': eps, 'p': p_val, 'moment': moment,
                         'std_err': batch_standard_error(powers, n_batches),
                         'denominator': denom, 'ratio': moment / denom})
    return MomentReport(float(alpha), float(beta), pd.DataFrame(rows))


def increment_scaling(ensemble, p, lags, tol=1e-9):
    """Moments E|G_eps(x) - G_eps(y)|^{2p} over grid pairs at each lag |x - y|.

    Parameters
    ----------
    ensemble : Ensemble
        Its scaled leading terms are the samples of G_eps.
    p : int
    lags : list of float
        Pairs of grid points whose distance is within tol of a lag are pooled.
    tol : float, optional

    Returns
    -------
    pd.DataFrame
        Indexed by lag, columns n_pairs, moment, denominator, ratio and
        lag_ratio. The denominator is |x - y|^p + eps^{(p-1)/2}, lag_ratio is
        the moment over |x - y|^{(p-1)/2} at fixed eps.
    """
    grid = ensemble.grid
    dist = np.abs(grid[:, None] - grid[None, :])
    rows = []
    for lag in lags:
        i_idx, j_idx = np.nonzero(np.triu(np.abs(dist - lag) <= tol, k=1))
        if i_idx.size == 0:
            raise ValueError(f"no pair of grid points at distance {lag}")
        incr = ensemble.leading[:, i_idx] - ensemble.leading[:, j_idx]
        moment = sample_mean(np.abs(incr.ravel()) ** (2 * p))
        denom = lag ** p + ensemble.eps ** ((p - 1) / 2.0)
        rows.append({'lag': lag, 'n_pairs': int(i_idx.size), 'moment': moment,
                     'denominator': denom, 'ratio': moment / denom,
                     'lag_ratio': moment / lag ** ((p - 1) / 2.0)})
    return pd.DataFrame(rows).set_index('lag')


@dataclass
class RateFit:
    """Least-squares fit log(value) = intercept + slope * log(eps).

    Attributes
    ----------
    eps, values : np.ndarray
    slope, intercept : float
    residual : float
        Root mean square of the fit residuals in log space.
    """
    eps: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    residual: float


def rate_fit(pairs):
    """Fit the convergence rate of (eps, value) pairs on a log-log scale.

    Parameters
    ----------
    pairs : list of (float, float)
        At least two pairs with positive eps and value.

    Returns
    -------
    RateFit
    """
    data = np.asarray(pairs, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 2:
        raise ValueError("rate_fit needs at least two (eps, value) pairs")
    if np.any(data <= 0) or not np.all(np.isfinite(data)):
        raise ValueError("rate_fit needs finite positive eps and values")
    if np.unique(data[:, 0]).size < 2:
        raise ValueError("rate_fit needs at least two distinct eps")
    d_explanatory = pd.DataFrame({'log_eps': np.log(data[:, 0]), 'const': 1.0})
    res = sm.OLS(np.log(data[:, 1]), d_explanatory).fit()
    return RateFit(
        eps=data[:, 0],
        values=data[:, 1],
        slope=float(res.params['log_eps']),
        intercept=float(res.params['const']),
        residual=float(math.sqrt(res.ssr / data.shape[0])),
    )
