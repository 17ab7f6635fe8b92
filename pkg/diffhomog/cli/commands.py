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

Experiment drivers of the command line and their CSV and JSON output.
"""

__all__ = ['CommandResult', 'COMMANDS', 'run_command', 'write_outputs', 'CSV_FLOAT_FORMAT']

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List

import numpy as np
import pandas as pd

from diffhomog._version import __version__
from diffhomog.corrector_fem.coefficients import sample_coefficients
from diffhomog.corrector_fem.mesh import build_mesh
from diffhomog.corrector_fem.solver import solve_corrector
from diffhomog.exact1d.homog import a_star
from diffhomog.exact1d.solution import default_grid
from diffhomog.homogenize.study import convergence_study, cross_validate_1d
from diffhomog.mcstats.checks import (clt_check, empirical_cov, moment_bound_check,
                                      rate_fit)
from diffhomog.mcstats.ensemble import NORM_COLUMNS, run_ensemble, sample_mean
from diffhomog.mcstats.limit import GaussianLimitModel, covariance_matrix, sigma_bar
from diffhomog.model.diffeo import TensorDiffeoField, verify_assumptions

LOGGER = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = '%.17g'
"""Decimal output with 17 significant digits, enough to round-trip doubles"""

VARIANCE_SE_FACTOR = 3.0
RESIDUAL_RATE_BAND = (0.85, 1.15)
CORRECTOR_RATE_BAND = (0.8, 1.2)
REMAINDER_BAND_FACTOR = 5.0
SYMMETRY_TOL = 1e-8
STD_DECAY_FACTOR = 0.5
CROSS_GAP_TOL = 0.02


@dataclass
class CommandResult:
    """Outcome of one command.

    Attributes
    ----------
    results : dict
        JSON-ready numbers of the run.
    checks : list of dict
        Acceptance records {name, statistic, threshold, pass}.
    tables : dict
        File suffix mapped to a DataFrame written as CSV. The empty suffix is
        the main table.
    """
    results: Dict = field(default_factory=dict)
    checks: List[Dict] = field(default_factory=list)
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)

    @property
    def passed(self):
        return all(rec['pass'] for rec in self.checks)


def _record(name, statistic, threshold, passed):
    return {'name': name, 'statistic': statistic, 'threshold': threshold, 'pass': bool(passed)}


def _band_record(name, value, band):
    return _record(name, value, list(band), band[0] <= value <= band[1])


def cmd_astar1d(run_config, pool=None):
    """Homogenized constants of a 1D problem."""
    problem = run_config.problem
    order = run_config.experiment['order']
    h = a_star(problem.law, problem.a_per, order)
    glm = GaussianLimitModel.from_problem(problem, order)
    report = verify_assumptions(problem.law, problem.a_per)
    results = {
        'a_star': h.a_star,
        'inv_a_star': h.inv_a_star,
        'mean_D': h.mean_d,
        'var_Y0': h.var_y0,
        'c_sq': h.c_sq,
        'int_psi_g': h.int_psi_g,
        'c_star': problem.source.c_star,
        'limit_var_half': sigma_bar(glm, 0.5, order),
        'assumptions': dict(report.checks),
    }
    checks = [_record(f'assumption.{name}', float(ok), 1.0, ok)
              for name, ok in report.checks.items()]
    table = pd.DataFrame([{key: val for key, val in results.items() if key != 'assumptions'}])
    return CommandResult(results, checks, {'': table})


def _rate_record(name, fit, band):
    if fit is None:
        return None
    return _band_record(name, fit.slope, band)


def _try_rate_fit(eps_list, values, label):
    if not all(val > 0 and math.isfinite(val) for val in values) or len(eps_list) < 2:
        LOGGER.warning("No rate fit for %s: need two eps with positive values.", label)
        return None
    return rate_fit(list(zip(eps_list, values)))


def cmd_residual_mc(run_config, pool=None):
    """Empirical variance of the scaled residual against the Gaussian limit, per eps."""
    problem = run_config.problem
    exp = run_config.experiment
    grid = default_grid(np.linspace(0.0, 1.0, exp['grid_points']))
    glm = GaussianLimitModel.from_problem(problem)
    limit_var = np.diag(covariance_matrix(glm, grid))
    eps_list = sorted(exp['eps_list'], reverse=True)

    rows, rate_rows = [], []
    finest = None
    for eps in eps_list:
        ens = run_ensemble(problem, eps, exp['n_samples'], grid, run_config.seed, pool,
                           norms=exp['norms'])
        for idx, x_val in enumerate(grid):
            emp_var, emp_se = empirical_cov(ens, idx, idx, exp['n_batches'])
            rows.append({'eps': eps, 'x': x_val, 'emp_var': emp_var, 'emp_se': emp_se,
                         'limit_var': limit_var[idx]})
        if ens.norms is not None:
            rate_row = {'eps': eps}
            rate_row.update({col: sample_mean(ens.norms[col].to_numpy())
                             for col in NORM_COLUMNS})
            rate_row['max_mismatch'] = float(np.max(np.abs(ens.mismatch)))
            rate_rows.append(rate_row)
        finest = ens
    table = pd.DataFrame(rows, columns=['eps', 'x', 'emp_var', 'emp_se', 'limit_var'])

    checks = []
    idx = finest.grid_index(exp['x'])
    emp_var, emp_se = empirical_cov(finest, idx, idx, exp['n_batches'])
    results = {'eps_list': eps_list, 'x': float(grid[idx]), 'finest_eps': finest.eps,
               'emp_var': emp_var, 'emp_se': emp_se, 'limit_var': float(limit_var[idx]),
               'max_mismatch': float(np.max(np.abs(finest.mismatch)))}
    if limit_var[idx] > 0:
        checks.append(_record('variance', abs(emp_var - limit_var[idx]),
                              VARIANCE_SE_FACTOR * emp_se,
                              abs(emp_var - limit_var[idx]) <= VARIANCE_SE_FACTOR * emp_se))
        clt = clt_check(finest.residuals[:, idx], limit_var[idx], exp['z_threshold'],
                        exp['ks_level'])
        results['clt'] = asdict(clt)
        checks.extend(clt.checks())
    else:
        LOGGER.info('Limit variance vanishes at x=%g, no CLT check.', grid[idx])

    tables = {'': table}
    if rate_rows:
        rates = pd.DataFrame(rate_rows)
        tables['rates'] = rates
        fits = {
            'residual_l2': _try_rate_fit(eps_list, rates.residual_l2.tolist(), 'residual_l2'),
            'corrector_h1': _try_rate_fit(eps_list, rates.corrector_h1.tolist(),
                                          'corrector_h1'),
            'remainder_l2': _try_rate_fit(eps_list, rates.remainder_l2.tolist(),
                                          'remainder_l2'),
        }
        results['rates'] = {name: None if fit is None else
                            {'slope': fit.slope, 'intercept': fit.intercept,
                             'residual': fit.residual}
                            for name, fit in fits.items()}
        for rec in (_rate_record('rate.residual_l2', fits['residual_l2'], RESIDUAL_RATE_BAND),
                    _rate_record('rate.corrector_h1', fits['corrector_h1'],
                                 CORRECTOR_RATE_BAND)):
            if rec is not None:
                checks.append(rec)
        scaled = rates.remainder_l2.to_numpy() / rates.eps.to_numpy() ** 2
        if np.all(scaled > 0):
            spread = float(np.max(scaled) / np.min(scaled))
            results['remainder_band'] = spread
            checks.append(_record('remainder_band', spread, REMAINDER_BAND_FACTOR,
                                  spread <= REMAINDER_BAND_FACTOR))
    return CommandResult(results, checks, tables)


def cmd_limit_check(run_config, pool=None):
    """Gaussian shape of the scaled leading term at one point and one eps."""
    problem = run_config.problem
    exp = run_config.experiment
    glm = GaussianLimitModel.from_problem(problem)
    target = sigma_bar(glm, exp['x'])
    if not target > 0:
        raise ValueError(f"the limit variance at x={exp['x']} vanishes, "
                         "a CLT check needs a random problem")
    ens = run_ensemble(problem, exp['eps'], exp['n_samples'], [exp['x']], run_config.seed,
                       pool)
    leading = ens.leading[:, 0]
    table = pd.DataFrame({'index': np.arange(ens.n_samples), 'leading': leading,
                          'residual': ens.residuals[:, 0]})
    results = {'eps': exp['eps'], 'x': exp['x'], 'target_var': target,
               'n_samples': ens.n_samples}
    clt = clt_check(leading, target, exp['z_threshold'], exp['ks_level'])
    results['clt'] = asdict(clt)
    return CommandResult(results, clt.checks(), {'': table})


def cmd_moment_check(run_config, pool=None):
    """Moment bounds of eps^{-1/2} int_alpha^beta psi(phi^{-1}(t/eps)) dt."""
    exp = run_config.experiment
    report = moment_bound_check(run_config.problem, exp['p_list'], exp['eps_list'],
                                exp['alpha'], exp['beta'], exp['n_samples'], run_config.seed,
                                pool, exp['n_batches'])
    results = {'alpha': report.alpha, 'beta': report.beta,
               'spread': {f'p{p}': report.spread(p) for p in exp['p_list']}}
    return CommandResult(results, report.checks(exp['factor']), {'': report.table})


def cmd_corrector_nd(run_config, pool=None):
    """One corrector solve on Q_N, the nodal values are dumped as CSV."""
    problem = run_config.problem
    exp = run_config.experiment
    mesh = build_mesh(problem.dim, exp['n_cells'], exp['r'])
    diffeo = TensorDiffeoField.sample(problem.law, problem.dim, run_config.seed,
                                      exp['n_cells'])
    coeff = sample_coefficients(mesh, diffeo, problem.a_per)
    sol = solve_corrector(mesh, coeff, exp['direction'], tol=exp['tol'])
    results = {'n_cells': mesh.n_cells, 'r': mesh.r, 'n_dofs': mesh.n_dofs,
               'direction': sol.direction, 'iterations': sol.iterations,
               'residual': sol.residual, 'mean': sol.mean,
               'max_abs': float(np.max(np.abs(sol.values)))}
    checks = [_record('solver.residual', sol.residual, exp['tol'], sol.residual <= exp['tol'])]
    return CommandResult(results, checks, {'': sol.to_dataframe()})


def _std_decay(study, n_first, n_last):
    first, last = study.std(n_first).ravel(), study.std(n_last).ravel()
    random = first > 0
    if not np.any(random):
        return 0.0
    return float(np.max(last[random] / first[random]))


def cmd_astar_convergence(run_config, pool=None):
    """Convergence study of A_star_N, with the 1D cross-validation when it applies."""
    problem = run_config.problem
    exp = run_config.experiment
    study = convergence_study(problem, exp['n_list'], exp['n_samples'], run_config.seed,
                              exp['r'], exp['tol'], pool)
    n_list = exp['n_list']
    asym = max(max(vals) for vals in study.asymmetries.values())
    min_eig = min(min(vals) for vals in study.min_eigs.values())
    results = {'n_list': n_list, 'max_asymmetry': asym, 'min_eig': min_eig,
               'table': study.table.to_dict(orient='records')}
    checks = [_record('symmetry', asym, SYMMETRY_TOL, asym <= SYMMETRY_TOL),
              _record('coercivity', min_eig, 0.0, min_eig > 0)]
    if len(n_list) >= 2:
        decay = _std_decay(study, n_list[0], n_list[-1])
        results['std_decay'] = decay
        checks.append(_record('std_decay', decay, STD_DECAY_FACTOR, decay <= STD_DECAY_FACTOR))
    if len(n_list) >= 3:
        cauchy = study.table.cauchy_diff.to_numpy()
        checks.append(_record('cauchy_nonincreasing', cauchy[-1], cauchy[-2],
                              cauchy[-1] <= cauchy[-2]))

    cross = exp['cross_validate']
    if cross is None:
        cross = getattr(problem, 'scalar_reduction', None) is not None
    if cross:
        report = cross_validate_1d(problem, exp['cross_n_cells'], exp['cross_n_samples'],
                                   run_config.seed, exp['cross_r'], exp['tol'], pool)
        results['cross_validation'] = asdict(report)
        checks.append(_record('cross_validation', report.rel_gap, CROSS_GAP_TOL,
                              report.rel_gap <= CROSS_GAP_TOL))
    return CommandResult(results, checks, {'': study.table})


COMMANDS = {
    'astar1d': cmd_astar1d,
    'residual-mc': cmd_residual_mc,
    'limit-check': cmd_limit_check,
    'moment-check': cmd_moment_check,
    'corrector-nd': cmd_corrector_nd,
    'astar-convergence': cmd_astar_convergence,
}
"""Command drivers by name, each taking (run_config, pool)"""


def _jsonable(obj):
    """Plain JSON types, with nan and inf as null."""
    if isinstance(obj, dict):
        return {str(key): _jsonable(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(val) for val in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_outputs(run_config, result, duration):
    """Write the CSV tables and the JSON summary into the output directory.

    Returns
    -------
    summary : dict
    paths : list of Path
    """
    out = Path(run_config.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for suffix, table in result.tables.items():
        path = out / (f'{run_config.command}_{suffix}.csv' if suffix
                      else f'{run_config.command}.csv')
        table.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        paths.append(path)
    summary = _jsonable({
        'command': run_config.command,
        'version': __version__,
        'seed': run_config.seed,
        'config': run_config.effective(),
        'duration_s': duration,
        'results': result.results,
        'checks': result.checks,
        'passed': result.passed,
    })
    path = out / f'{run_config.command}.json'
    with open(path, 'w', encoding='utf-8') as file:
        json.dump(summary, file, indent=2)
        file.write('\n')
    paths.append(path)
    for path in paths:
        LOGGER.info('Wrote %s', path)
    return summary, paths


def run_command(run_config, pool=None):
    """Run the configured command and write its output files.

    Parameters
    ----------
    run_config : RunConfig
    pool : pathos.pools, optional
        Pool that will be used for parallel computation. Default: None

    Returns
    -------
    summary : dict
        The JSON summary.
    """
    start = time.perf_counter()
    result = COMMANDS[run_config.command](run_config, pool=pool)
    summary, _ = write_outputs(run_config, result, time.perf_counter() - start)
    failed = [rec['name'] for rec in result.checks if not rec['pass']]
    if failed:
        LOGGER.warning('Failed checks: %s', ', '.join(failed))
    return summary
