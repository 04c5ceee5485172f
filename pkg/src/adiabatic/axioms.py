"""Executable checks of the order axioms on a sample of compound states."""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np

from .oracles import strictly_precedes
from .report import Report, Tally, Verdict
from .states import Comparability, CompoundState, StateRef, as_compound

P, N, U = Comparability.PRECEDES, Comparability.NOT_PRECEDES, Comparability.UNKNOWN

ANALYTIC_SCALES = (0.25, 0.5, 2.0, 3.0)
ANALYTIC_SPLITS = (0.25, 0.5, 0.75)
STABILITY_DEPTH = 8


def _in_scope(rel, c: CompoundState) -> bool:
    uni = getattr(rel, "universe", None)
    return uni is None or uni.vector(c) is not None


def _scales(rel) -> List:
    grid = getattr(rel, "scale_grid", None)
    return list(grid) if grid is not None else list(ANALYTIC_SCALES)


def _splits(rel) -> List:
    grid = getattr(rel, "scale_grid", None)
    if grid is None:
        return list(ANALYTIC_SPLITS)
    return [t for t in grid if 0 < t < 1]


def _epsilons(rel, depth: int = STABILITY_DEPTH) -> List:
    eps = [Fraction(1, 2 ** k) for k in range(1, depth + 1)]
    if getattr(rel, "universe", None) is None:
        return [float(e) for e in eps]
    q = rel.universe.denominator
    return [e for e in eps if (e * q).denominator == 1]


def _combos(pools: Sequence[Sequence], limit: Optional[int], seed: int):
    """Cartesian product of ``pools``, or ``limit`` seeded random draws from it."""
    total = 1
    for p in pools:
        total *= len(p)
    if total == 0:
        return []
    if limit is None or total <= limit:
        return itertools.product(*pools)
    rng = np.random.default_rng(seed)
    picks = [rng.integers(0, len(p), size=limit) for p in pools]
    return (tuple(p[i[k]] for p, i in zip(pools, picks)) for k in range(limit))


class _Matrix:
    """Memoized pairwise comparisons over a fixed sample."""

    def __init__(self, rel, sample: Sequence[CompoundState]):
        self.rel = rel
        self.sample = list(sample)
        n = len(self.sample)
        self.m = [[rel.compare(self.sample[i], self.sample[j]) for j in range(n)] for i in range(n)]

    def pairs(self):
        n = len(self.sample)
        return [(i, j) for i in range(n) for j in range(n) if self.m[i][j] is P]


def _w(*items) -> str:
    return " ; ".join(str(as_compound(x)) for x in items)


def check_axioms(rel, sample: Iterable, *, limit: Optional[int] = 20000, seed: int = 0) -> Report:
    """Verdicts for A1-A6 on ``sample`` (states or compounds).

    Instances answered ``Unknown`` make the verdict INCONCLUSIVE unless a
    definite counterexample exists. Stability is checked for
    ``eps = 1/2 ... 1/2**8`` restricted to the relation's scale grid.
    """
    sample = [as_compound(x) for x in sample]
    if not sample:
        raise ValueError("sample must be nonempty")
    mat = _Matrix(rel, sample)
    m = mat.m
    n = len(sample)
    report = Report()

    a1 = Tally("A1")
    for i in range(n):
        if m[i][i] is P:
            a1.ok()
        elif m[i][i] is N:
            a1.fail(_w(sample[i]))
        else:
            a1.unknown_case()
    a1.into(report)

    a2 = Tally("A2")
    for j in range(n):
        preds = [i for i in range(n) if m[i][j] is P]
        succs = [k for k in range(n) if m[j][k] is P]
        for i in preds:
            for k in succs:
                v = m[i][k]
                if v is P:
                    a2.ok()
                elif v is N:
                    a2.fail(_w(sample[i], sample[j], sample[k]))
                else:
                    a2.unknown_case()
    a2.into(report)

    pairs = mat.pairs()
    a3 = Tally("A3")
    for (i, j), (k, l) in _combos([pairs, pairs], limit, seed):
        lhs, rhs = sample[i] + sample[k], sample[j] + sample[l]
        if not (_in_scope(rel, lhs) and _in_scope(rel, rhs)):
            continue
        v = rel.compare(lhs, rhs)
        if v is P:
            a3.ok()
        elif v is N:
            a3.fail(_w(sample[i], sample[j], sample[k], sample[l]))
        else:
            a3.unknown_case()
    a3.into(report)

    a4 = Tally("A4")
    for (i, j), t in _combos([pairs, _scales(rel)], limit, seed + 1):
        lhs, rhs = t * sample[i], t * sample[j]
        if not (_in_scope(rel, lhs) and _in_scope(rel, rhs)):
            continue
        v = rel.compare(lhs, rhs)
        if v is P:
            a4.ok()
        elif v is N:
            a4.fail(f"t={t} ; " + _w(sample[i], sample[j]))
        else:
            a4.unknown_case()
    a4.into(report, "" if a4.checked or a4.unknown else "vacuous on grid")

    a5 = Tally("A5")
    for i, t in _combos([range(n), _splits(rel)], limit, seed + 2):
        x = sample[i]
        split = (1 - t) * x + t * x
        if not _in_scope(rel, split):
            continue
        ab, ba = rel.compare(x, split), rel.compare(split, x)
        if ab is P and ba is P:
            a5.ok()
        elif N in (ab, ba):
            a5.fail(f"t={t} ; " + _w(x))
        else:
            a5.unknown_case()
    a5.into(report, "" if a5.checked or a5.unknown else "vacuous on grid")

    a6 = Tally("A6")
    eps = _epsilons(rel)
    singles = sorted({CompoundState.of(s) for c in sample for _, s in c}, key=str)
    for i, j, z0, z1 in _combos([range(n), range(n), singles, singles], limit, seed + 3):
        if i == j or not eps:
            continue
        x, y = sample[i], sample[j]
        premise = True
        for e in eps:
            lhs, rhs = x + e * z0, y + e * z1
            if not (_in_scope(rel, lhs) and _in_scope(rel, rhs)) or rel.compare(lhs, rhs) is not P:
                premise = False
                break
        if not premise:
            continue
        v = m[i][j]
        if v is P:
            a6.ok()
        elif v is N:
            a6.fail(_w(x, y, z0, z1))
        else:
            a6.unknown_case()
    a6.into(report, f"stable to grid depth {len(eps)}")
    return report


def check_cancellation(rel, sample: Iterable, *, limit: Optional[int] = 20000, seed: int = 0) -> Report:
    """(X,Z) < (Y,Z) implies X < Y on sampled triples."""
    sample = [as_compound(x) for x in sample]
    t = Tally("cancellation")
    n = len(sample)
    for i, j, k in _combos([range(n), range(n), range(n)], limit, seed):
        x, y, z = sample[i], sample[j], sample[k]
        lhs, rhs = x + z, y + z
        if not (_in_scope(rel, lhs) and _in_scope(rel, rhs)):
            continue
        if rel.compare(lhs, rhs) is not P:
            continue
        v = rel.compare(x, y)
        if v is P:
            t.ok()
        elif v is N:
            t.fail(_w(x, y, z))
        else:
            t.unknown_case()
    report = Report()
    t.into(report)
    return report


def _in_space(c: CompoundState, space: Optional[str]) -> bool:
    return space is None or all(s.space == space for _, s in c)


def _mass_key(c: CompoundState):
    return sorted((k, round(float(v), 12)) for k, v in c.masses().items())


def check_CH(rel, space: Optional[str], sample: Iterable) -> Report:
    """Every pair of sampled states with equal mass is comparable."""
    sample = [as_compound(x) for x in sample if _in_space(as_compound(x), space)]
    t = Tally("CH")
    for a, b in itertools.combinations(sample, 2):
        if _mass_key(a) != _mass_key(b):
            continue
        ab, ba = rel.compare(a, b), rel.compare(b, a)
        if P in (ab, ba):
            t.ok()
        elif ab is N and ba is N:
            t.fail(_w(a, b))
        else:
            t.unknown_case()
    report = Report()
    t.into(report)
    return report


def check_lemma1(rel, states: Iterable, neighborhood: Callable[[CompoundState], Iterable]) -> Report:
    """If every X has some Y with X << Y, every neighbourhood of X holds a Z with X not< Z.

    ``neighborhood(X)`` yields the sampled states near X; for finite models
    pass a function returning all states.
    """
    states = [as_compound(x) for x in states]
    a_fail = b_fail = None
    b_unknown = False
    for x in states:
        near = [as_compound(z) for z in neighborhood(x)]
        if a_fail is None and not any(strictly_precedes(rel, x, y) is P for y in states + near):
            a_fail = x
        answers = [rel.compare(x, z) for z in near]
        if N not in answers:
            if U in answers:
                b_unknown = True
            elif b_fail is None:
                b_fail = x
    report = Report()
    report.add("lemma1.a", Verdict.FAIL if a_fail else Verdict.PASS, _w(a_fail) if a_fail else "")
    if b_fail is not None:
        report.add("lemma1.b", Verdict.FAIL, _w(b_fail))
    else:
        report.add("lemma1.b", Verdict.INCONCLUSIVE if b_unknown else Verdict.PASS)
    if a_fail is None and b_fail is not None:
        report.add("lemma1.implication", Verdict.FAIL, _w(b_fail))
    elif a_fail is None and b_unknown:
        report.add("lemma1.implication", Verdict.INCONCLUSIVE)
    else:
        report.add("lemma1.implication", Verdict.PASS, detail="vacuous" if a_fail else "")
    return report
