"""Comparability backends.

Every oracle exposes ``compare(a, b)`` returning a :class:`Comparability`
for two compound states, a ``backend`` name and a ``tolerance``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

from .states import Comparability, CompoundState, StateRef, as_compound

P, N, U = Comparability.PRECEDES, Comparability.NOT_PRECEDES, Comparability.UNKNOWN

ANALYTIC_TOL = 1e-12


def _same_composition(a: CompoundState, b: CompoundState, tol: float) -> bool:
    ma, mb = a.masses(), b.masses()
    for key in set(ma) | set(mb):
        if abs(float(ma.get(key, 0)) - float(mb.get(key, 0))) > tol:
            return False
    return True


@dataclass(frozen=True)
class AnalyticEntropy:
    """Answers ``a < b`` by comparing additive, extensive entropy sums.

    ``entropies`` maps a space label to a function of the state's coords.
    Compounds with different mass per space are not comparable, which is
    reported as ``NOT_PRECEDES`` both ways.
    """

    entropies: Mapping[str, Callable]
    tolerance: float = ANALYTIC_TOL
    backend: str = field(default="AnalyticEntropy", init=False)

    def entropy(self, x: Union[StateRef, CompoundState]) -> float:
        total = 0.0
        for t, s in as_compound(x):
            total += float(t) * float(self.entropies[s.space](*s.coords))
        return total

    def compare(self, a, b) -> Comparability:
        a, b = as_compound(a), as_compound(b)
        if not _same_composition(a, b, 1e-12):
            return N
        sa, sb = self.entropy(a), self.entropy(b)
        if not (math.isfinite(sa) and math.isfinite(sb)):
            raise ValueError(f"entropy not finite on {a} or {b}")
        return P if sa <= sb + self.tolerance else N


def equivalent(oracle, a, b) -> Comparability:
    """``a ~ b``: PRECEDES if both directions hold, UNKNOWN if undecided."""
    ab, ba = oracle.compare(a, b), oracle.compare(b, a)
    if ab is P and ba is P:
        return P
    if N in (ab, ba):
        return N
    return U


def strictly_precedes(oracle, a, b) -> Comparability:
    """``a << b``: a precedes b and b does not precede a."""
    ab, ba = oracle.compare(a, b), oracle.compare(b, a)
    if ab is N or ba is P:
        return N
    if ab is P and ba is N:
        return P
    return U
