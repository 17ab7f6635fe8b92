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

Run configuration of the command line: JSON schema, defaults and model building.

A configuration file is a JSON object with the optional keys

    {
        "model": {"problem": "C2", "diffeo": {...}, "a_per": {...},
                  "source": {...}, "matrix": {...}},
        "experiment": {...},
        "seed": 0,
        "out": "out"
    }

"problem" names a preset. A model block given next to it replaces the preset's
block of the same name, and missing keys of a block take the defaults of its
"kind". "f" is accepted as an alias of "source". "experiment" keys depend on
the command, see EXPERIMENT_DEFAULTS. Unknown keys anywhere are errors.
"""

__all__ = ['ConfigError', 'RunConfig', 'load_config', 'COMMANDS_1D', 'COMMANDS_ND',
           'EXPERIMENT_DEFAULTS', 'MODEL_PRESETS']

import copy
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict

from diffhomog.mcstats.checks import default_eps_list
from diffhomog.model.diffeo import DiffeoLaw
from diffhomog.model.fields import PeriodicMatrixField, PeriodicScalarField, SourceTerm
from diffhomog.model.problem import Problem1D, ProblemND
from diffhomog.model.seeding import validate_seed
from diffhomog.util.config import CONFIG, int_list

LOGGER = logging.getLogger(__name__)

COMMANDS_1D = ('astar1d', 'residual-mc', 'limit-check', 'moment-check')
"""Commands working on a one-dimensional problem"""

COMMANDS_ND = ('corrector-nd', 'astar-convergence')
"""Commands working on a corrector problem in d = 1 or 2"""

TOP_KEYS = ('model', 'experiment', 'seed', 'out')

_TWO_PHASE = {'kind': 'two_phase', 'low': 1.0, 'high': 4.0, 'split': 0.5}
_UNIT_SOURCE = {'kind': 'constant', 'value': 1.0}

MODEL_PRESETS = {
    'C1': {'diffeo': {'m': 0.0, 'x_dist': 'uniform', 'g_per': 'sine'},
           'a_per': _TWO_PHASE, 'source': _UNIT_SOURCE},
    'C2': {'diffeo': {'m': 0.7, 'x_dist': 'uniform', 'g_per': 'sine'},
           'a_per': _TWO_PHASE, 'source': _UNIT_SOURCE},
    'C2prime': {'diffeo': {'m': 0.7, 'x_dist': 'uniform_positive', 'g_per': 'sine'},
                'a_per': _TWO_PHASE, 'source': _UNIT_SOURCE},
    'C3': {'diffeo': {'m': 0.7, 'x_dist': 'uniform', 'g_per': 'sine'},
           'a_per': _TWO_PHASE, 'matrix': {'kind': 'laminate', 'dim': 2, 'axis': 0}},
    'laminate_identity': {'diffeo': {'m': 0.0, 'x_dist': 'uniform', 'g_per': 'sine'},
                          'a_per': _TWO_PHASE,
                          'matrix': {'kind': 'laminate', 'dim': 2, 'axis': 0}},
    'checkerboard_identity': {'diffeo': {'m': 0.0, 'x_dist': 'uniform', 'g_per': 'sine'},
                              'a_per': _TWO_PHASE,
                              'matrix': {'kind': 'checkerboard', 'low': 1.0, 'high': 4.0,
                                         'dim': 2}},
}
"""Model blocks of the reference configurations, by name"""

_REQUIRED = object()

_BLOCK_KINDS = {
    'a_per': {
        'two_phase': {'low': 1.0, 'high': 4.0, 'split': 0.5},
        'constant': {'value': 1.0},
        'piecewise_constant': {'breakpoints': _REQUIRED, 'values': _REQUIRED},
        'sine': {'mean': 2.0, 'amplitude': 1.0},
    },
    'source': {
        'constant': {'value': 1.0},
        'sine': {},
        'piecewise_constant': {'breakpoints': _REQUIRED, 'values': _REQUIRED},
    },
    'matrix': {
        'identity': {'dim': 2},
        'laminate': {'dim': 2, 'axis': 0},
        'checkerboard': {'low': 1.0, 'high': 4.0, 'dim': 2},
        'scalar': {},
    },
}

_DIFFEO_DEFAULTS = {'m': 0.0, 'x_dist': 'uniform', 'g_per': 'sine'}


EXPERIMENT_DEFAULTS = {
    'astar1d': {
        'order': lambda: CONFIG.diffhomog.quadrature.gauss_order.int(),
    },
    'residual-mc': {
        'eps_list': default_eps_list,
        'n_samples': lambda: 2000,
        'grid_points': lambda: CONFIG.diffhomog.exact1d.grid_points.int(),
        'x': lambda: 0.5,
        'n_batches': lambda: CONFIG.diffhomog.mcstats.n_batches.int(),
        'z_threshold': lambda: CONFIG.diffhomog.mcstats.z_threshold.float(),
        'ks_level': lambda: CONFIG.diffhomog.mcstats.ks_level.float(),
        'norms': lambda: True,
    },
    'limit-check': {
        'eps': lambda: 1.0 / 400,
        'n_samples': lambda: 20000,
        'x': lambda: 0.5,
        'z_threshold': lambda: CONFIG.diffhomog.mcstats.z_threshold.float(),
        'ks_level': lambda: CONFIG.diffhomog.mcstats.ks_level.float(),
    },
    'moment-check': {
        'p_list': lambda: [1, 2],
        'eps_list': default_eps_list,
        'alpha': lambda: 0.0,
        'beta': lambda: 1.0,
        'n_samples': lambda: 1000,
        'n_batches': lambda: CONFIG.diffhomog.mcstats.n_batches.int(),
        'factor': lambda: 10.0,
    },
    'corrector-nd': {
        'n_cells': lambda: 2,
        'r': lambda: CONFIG.diffhomog.fem.r.int(),
        'tol': lambda: CONFIG.diffhomog.fem.tol.float(),
        'direction': lambda: 0,
    },
    'astar-convergence': {
        'n_list': lambda: int_list('study', 'n_list'),
        'n_samples': lambda: CONFIG.diffhomog.study.n_samples.int(),
        'r': lambda: CONFIG.diffhomog.fem.r.int(),
        'tol': lambda: CONFIG.diffhomog.fem.tol.float(),
        'cross_validate': lambda: None,
        'cross_n_cells': lambda: CONFIG.diffhomog.study.cross_n_cells.int(),
        'cross_n_samples': lambda: CONFIG.diffhomog.study.cross_n_samples.int(),
        'cross_r': lambda: CONFIG.diffhomog.fem.r.int(),
    },
}
"""Default factories of the experiment keys of every command, resolved at load time"""


class ConfigError(ValueError):
    """Malformed or out-of-range run configuration."""


def _check_keys(block, allowed, where):
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be a JSON object, got {type(block).__name__}")
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}, allowed: {sorted(allowed)}")


def _number(value, where, low=None, high=None, integer=False, low_open=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    if integer and (not float(value).is_integer()):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    value = int(value) if integer else float(value)
    if low is not None and (value <= low if low_open else value < low):
        raise ConfigError(f"{where} must be {'>' if low_open else '>='} {low}, got {value}")
    if high is not None and value > high:
        raise ConfigError(f"{where} must be <= {high}, got {value}")
    return value


def _number_list(values, where, **kwargs):
    if not isinstance(values, list) or not values:
        raise ConfigError(f"{where} must be a nonempty list, got {values!r}")
    return [_number(val, f"{where}[{i}]", **kwargs) for i, val in enumerate(values)]


def _resolve_block(name, block):
    """Fill a kind block with the defaults of its kind."""
    kinds = _BLOCK_KINDS[name]
    where = f"model.{name}"
    if not isinstance(block, dict) or 'kind' not in block:
        raise ConfigError(f"{where} must be an object with a 'kind' in {sorted(kinds)}")
    kind = block['kind']
    if kind not in kinds:
        raise ConfigError(f"{where}.kind must be one of {sorted(kinds)}, got {kind!r}")
    _check_keys(block, ['kind', *kinds[kind]], where)
    resolved = {'kind': kind}
    for key, default in kinds[kind].items():
        if key in block:
            resolved[key] = block[key]
        elif default is _REQUIRED:
            raise ConfigError(f"{where} of kind {kind!r} needs the key {key!r}")
        else:
            resolved[key] = default
    for key, value in resolved.items():
        if key in ('breakpoints', 'values'):
            resolved[key] = _number_list(value, f"{where}.{key}")
        elif key in ('dim', 'axis'):
            resolved[key] = _number(value, f"{where}.{key}", low=0, integer=True)
        elif key != 'kind':
            resolved[key] = _number(value, f"{where}.{key}")
    if kind == 'laminate' and resolved['axis'] >= resolved['dim']:
        raise ConfigError(f"{where}.axis must be < dim, got axis={resolved['axis']}")
    return resolved


def _resolve_model(block, command):
    _check_keys(block, ['problem', 'diffeo', 'a_per', 'source', 'f', 'matrix'], 'model')
    if 'f' in block:
        if 'source' in block:
            raise ConfigError("model.f and model.source name the same block, give one of them")
        block = {**block, 'source': block['f']}
        del block['f']
    default_preset = 'C2' if command in COMMANDS_1D else 'C3'
    preset = block.get('problem', default_preset)
    if preset not in MODEL_PRESETS:
        raise ConfigError(f"model.problem must be one of {sorted(MODEL_PRESETS)}, "
                          f"got {preset!r}")
    model = copy.deepcopy(MODEL_PRESETS[preset])
    model.setdefault('source', dict(_UNIT_SOURCE))
    model.setdefault('matrix', {'kind': 'scalar'})
    for key in ('diffeo', 'a_per', 'source', 'matrix'):
        if key in block:
            model[key] = copy.deepcopy(block[key])

    diffeo = model['diffeo']
    _check_keys(diffeo, _DIFFEO_DEFAULTS, 'model.diffeo')
    diffeo = {**_DIFFEO_DEFAULTS, **diffeo}
    diffeo['m'] = _number(diffeo['m'], 'model.diffeo.m')
    resolved = {'problem': preset, 'diffeo': diffeo}
    for key in ('a_per', 'source', 'matrix'):
        resolved[key] = _resolve_block(key, model[key])
    return resolved


def _resolve_experiment(block, command):
    defaults = EXPERIMENT_DEFAULTS[command]
    _check_keys(block, defaults, f"experiment of command {command!r}")
    exp = {key: block[key] if key in block else factory() for key, factory in defaults.items()}
    where = 'experiment.'
    for key in ('n_samples', 'n_cells', 'r', 'grid_points', 'n_batches', 'order',
                'cross_n_cells', 'cross_n_samples', 'cross_r'):
        if key in exp:
            exp[key] = _number(exp[key], where + key, low=1, integer=True)
    if 'n_samples' in exp and exp['n_samples'] < 2:
        raise ConfigError(f"{where}n_samples must be >= 2, got {exp['n_samples']}")
    if 'grid_points' in exp and exp['grid_points'] < 2:
        raise ConfigError(f"{where}grid_points must be >= 2, got {exp['grid_points']}")
    for key in ('tol', 'eps'):
        if key in exp:
            exp[key] = _number(exp[key], where + key, low=0, low_open=True)
    for key in ('x', 'alpha', 'beta'):
        if key in exp:
            exp[key] = _number(exp[key], where + key, low=0, high=1)
    if 'alpha' in exp and not exp['alpha'] < exp['beta']:
        raise ConfigError(f"{where}alpha must be < beta, got {exp['alpha']} >= {exp['beta']}")
    for key in ('z_threshold', 'ks_level', 'factor'):
        if key in exp:
            exp[key] = _number(exp[key], where + key, low=0, low_open=True)
    if 'eps_list' in exp:
        exp['eps_list'] = _number_list(exp['eps_list'], where + 'eps_list', low=0,
                                       high=1, low_open=True)
    if 'p_list' in exp:
        exp['p_list'] = _number_list(exp['p_list'], where + 'p_list', low=1, high=4,
                                     integer=True)
    if 'n_list' in exp:
        n_list = _number_list(exp['n_list'], where + 'n_list', low=1, integer=True)
        if any(b <= a for a, b in zip(n_list, n_list[1:])):
            raise ConfigError(f"{where}n_list must be strictly increasing, got {n_list}")
        exp['n_list'] = n_list
    for key in ('norms',):
        if key in exp and not isinstance(exp[key], bool):
            raise ConfigError(f"{where}{key} must be true or false, got {exp[key]!r}")
    if 'cross_validate' in exp and exp['cross_validate'] is not None \
            and not isinstance(exp['cross_validate'], bool):
        raise ConfigError(f"{where}cross_validate must be true, false or null, "
                          f"got {exp['cross_validate']!r}")
    if 'direction' in exp:
        direction = exp['direction']
        if isinstance(direction, list):
            exp['direction'] = _number_list(direction, where + 'direction')
        else:
            exp['direction'] = _number(direction, where + 'direction', low=0, integer=True)
    return exp


def _scalar_field(block):
    kind = block['kind']
    if kind == 'two_phase':
        return PeriodicScalarField.two_phase(block['low'], block['high'], block['split'])
    if kind == 'constant':
        return PeriodicScalarField.constant(block['value'])
    if kind == 'piecewise_constant':
        return PeriodicScalarField.piecewise_constant(block['breakpoints'], block['values'])
    return PeriodicScalarField.sine(block['mean'], block['amplitude'])


def _source(block):
    kind = block['kind']
    if kind == 'constant':
        return SourceTerm.constant(block['value'])
    if kind == 'piecewise_constant':
        return SourceTerm.piecewise_constant(block['breakpoints'], block['values'])
    return SourceTerm.sine()


def _matrix_field(block, a_per):
    kind = block['kind']
    if kind == 'identity':
        return PeriodicMatrixField.identity(block['dim'])
    if kind == 'laminate':
        return PeriodicMatrixField.laminate(a_per, block['dim'], block['axis'])
    if kind == 'checkerboard':
        return PeriodicMatrixField.checkerboard(block['low'], block['high'], block['dim'])
    return PeriodicMatrixField.from_scalar(a_per)


@dataclass
class RunConfig:
    """Validated configuration of one command run.

    Attributes
    ----------
    command : str
    model : dict
        Resolved model blocks, every default filled in.
    experiment : dict
        Resolved experiment keys of the command.
    seed : int
    out : Path
        Output directory.
    problem : Problem1D or ProblemND
        Model built from the blocks.
    """
    command: str
    model: Dict[str, Any]
    experiment: Dict[str, Any]
    seed: int
    out: Path
    problem: Any = None

    def effective(self):
        """Fully populated configuration, as echoed into the JSON summary."""
        return {'command': self.command, 'model': copy.deepcopy(self.model),
                'experiment': copy.deepcopy(self.experiment), 'seed': self.seed,
                'out': str(self.out)}

    def build_problem(self):
        """Problem1D for the 1D commands, ProblemND otherwise."""
        law = DiffeoLaw(self.model['diffeo']['m'], self.model['diffeo']['x_dist'],
                        self.model['diffeo']['g_per'])
        a_per = _scalar_field(self.model['a_per'])
        name = self.model['problem']
        if self.command in COMMANDS_1D:
            return Problem1D(law, a_per, _source(self.model['source']), name)
        return ProblemND(law, _matrix_field(self.model['matrix'], a_per), name)


def load_config(path, command, seed=None, out=None):
    """Read, validate and resolve a run configuration.

    Parameters
    ----------
    path : str or Path or dict or None
        JSON file, an already parsed object, or None for all defaults.
    command : str
        One of COMMANDS_1D or COMMANDS_ND.
    seed : int, optional
        Overrides the configured seed.
    out : str or Path, optional
        Overrides the configured output directory.

    Returns
    -------
    RunConfig

    Raises
    ------
    ConfigError
        On a malformed configuration.
    ValueError
        When a model object rejects its parameters.
    """
    if command not in COMMANDS_1D + COMMANDS_ND:
        raise ConfigError(f"unknown command {command!r}")
    if path is None:
        raw = {}
    elif isinstance(path, dict):
        raw = copy.deepcopy(path)
    else:
        try:
            with open(path, encoding='utf-8') as file:
                raw = json.load(file)
        except OSError as err:
            raise ConfigError(f"cannot read configuration {path}: {err}") from err
        except json.JSONDecodeError as err:
            raise ConfigError(f"configuration {path} is not valid JSON: {err}") from err
    _check_keys(raw, TOP_KEYS, 'configuration')

    if seed is None:
        seed = raw.get('seed', 0)
    try:
        seed = validate_seed(seed)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    if out is None:
        out = raw.get('out', 'out')
    if not isinstance(out, (str, Path)):
        raise ConfigError(f"out must be a path, got {out!r}")

    run_config = RunConfig(
        command=command,
        model=_resolve_model(raw.get('model', {}), command),
        experiment=_resolve_experiment(raw.get('experiment', {}), command),
        seed=seed,
        out=Path(out),
    )
    run_config.problem = run_config.build_problem()
    LOGGER.info('Resolved %s run of problem %s with seed %d.', command,
                run_config.model['problem'], seed)
    return run_config
