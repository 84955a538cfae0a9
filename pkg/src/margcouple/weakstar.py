"""One-sided weak-star neighborhoods of a reference measure.

A neighborhood is determined by a center, finitely many open sets and a
positive tolerance.  A candidate belongs to it when on every listed set its
mass falls short of the center's by strictly less than the tolerance.  Only
shortfalls count: exceeding the center on a set never hurts membership.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ParameterError
from .measure import Measure, _check_geometry
from .space import as_rational


@dataclass(frozen=True)
class Neighborhood:
    center: Measure
    sets: tuple
    epsilon: Fraction

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(self.sets))
        object.__setattr__(self, "epsilon", as_rational(self.epsilon))
        if self.epsilon <= 0:
            raise ParameterError("neighborhood tolerance must be positive")
        if not self.sets:
            raise ParameterError("neighborhood needs at least one set")
        for s in self.sets:
            _check_geometry(self.center.space, s)

    def gap(self, candidate: Measure) -> Fraction:
        """Worst shortfall of the candidate against the center over the sets."""
        return min(candidate.eval(s) - self.center.eval(s) for s in self.sets)

    def is_member(self, candidate: Measure) -> bool:
        return self.gap(candidate) > -self.epsilon
