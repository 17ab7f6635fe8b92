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

Problem definitions bundling a law, a coefficient and a source.
"""

__all__ = ['Problem1D', 'ProblemND', 'canonical_problem', 'CANONICAL_PROBLEMS']

from dataclasses import dataclass
from typing import Optional

from diffhomog.model.diffeo import DiffeoLaw
from diffhomog.model.fields import PeriodicMatrixField, PeriodicScalarField, SourceTerm


@dataclass(frozen=True)
class Problem1D:
    """One-dimensional Dirichlet problem -(a_per(phi^{-1}(x/eps)) u')' = f on (0, 1)."""
    law: DiffeoLaw
    a_per: PeriodicScalarField
    source: SourceTerm
    name: str = 'custom'

    @property
    def is_deterministic(self):
        return self.law.is_deterministic


@dataclass(frozen=True)
class ProblemND:
    """Corrector problem on the torus Q_N with a tensorized diffeomorphism.

    Attributes
    ----------
    law : DiffeoLaw
        Law of every axis component.
    a_per : PeriodicMatrixField
        Matrix coefficient, its dimension sets d.
    name : str
        Label used in logs and summaries.
    """
    law: DiffeoLaw
    a_per: PeriodicMatrixField
    name: str = 'custom'

    @property
    def dim(self):
        return self.a_per.dim

    @property
    def scalar_reduction(self) -> Optional[PeriodicScalarField]:
        """Scalar coefficient of the equivalent 1D problem along the first axis, if any."""
        return self.a_per.scalar

    @property
    def is_deterministic(self):
        return self.law.is_deterministic


def _c1():
    return Problem1D(DiffeoLaw(), PeriodicScalarField.two_phase(), SourceTerm.constant(1.0), 'C1')


def _c2():
    return Problem1D(DiffeoLaw(0.7, 'uniform', 'sine'), PeriodicScalarField.two_phase(),
                     SourceTerm.constant(1.0), 'C2')


def _c2_prime():
    return Problem1D(DiffeoLaw(0.7, 'uniform_positive', 'sine'), PeriodicScalarField.two_phase(),
                     SourceTerm.constant(1.0), 'C2prime')


def _c3():
    return ProblemND(DiffeoLaw(0.7, 'uniform', 'sine'),
                     PeriodicMatrixField.laminate(PeriodicScalarField.two_phase()), 'C3')


def _laminate_identity():
    return ProblemND(DiffeoLaw(), PeriodicMatrixField.laminate(PeriodicScalarField.two_phase()),
                     'laminate_identity')


def _checkerboard_identity():
    return ProblemND(DiffeoLaw(), PeriodicMatrixField.checkerboard(1.0, 4.0),
                     'checkerboard_identity')


CANONICAL_PROBLEMS = {
    'C1': _c1,
    'C2': _c2,
    'C2prime': _c2_prime,
    'C3': _c3,
    'laminate_identity': _laminate_identity,
    'checkerboard_identity': _checkerboard_identity,
}
"""Factories of the reference configurations, by name"""


def canonical_problem(name):
    """Build a reference configuration by name, see CANONICAL_PROBLEMS."""
    try:
        return CANONICAL_PROBLEMS[name]()
    except KeyError as err:
        raise ValueError(f"unknown problem {name!r}, "
                         f"choose from {sorted(CANONICAL_PROBLEMS)}") from err
