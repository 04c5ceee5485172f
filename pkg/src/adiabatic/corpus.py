"""Small enumerated relations used for brute-force axiom and entropy checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from .axioms import check_axioms, check_cancellation, check_CH
from .entropy import construct_entropy, verify_entropy_principle
from .finite import ClosedRelation, EditedRelation, FiniteRelation
from .oracles import strictly_precedes
from .states import Comparability, CompoundState, StateRef

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    relation: FiniteRelation
    sample: Tuple[CompoundState, ...]
    levels: Optional[Dict[StateRef, Fraction]] = None  # planted entropy, if any


def default_states(n: int = 4) -> List[StateRef]:
    return [StateRef.label(c) for c in "ABCDEFGH"[:n]]


def _transitive_closure(n: int, edges) -> FrozenSet[Tuple[int, int]]:
    r = {(i, i) for i in range(n)} | set(edges)
    changed = True
    while changed:
        changed = False
        for a, b in list(r):
            for c, d in list(r):
                if b == c and (a, d) not in r:
                    r.add((a, d))
                    changed = True
    return frozenset(r)


def _mixes(states: Sequence[StateRef]) -> List[CompoundState]:
    return [CompoundState.of((HALF, a), (HALF, b)) for a, b in itertools.combinations(states, 2)]


def single_fact_relations(n: int = 4, max_facts: int = 6, denominator: int = 4,
                          max_mass: int = 2) -> Iterator[CorpusEntry]:
    """Relations generated by at most ``max_facts`` facts X -> Y between single states.

    Generating sets with the same state-level preorder give the same
    closure, so one representative per preorder is kept.
    """
    states = default_states(n)
    edges = [(a, b) for a in range(n) for b in range(n) if a != b]
    seen = set()
    for k in range(max_facts + 1):
        for chosen in itertools.combinations(edges, k):
            key = _transitive_closure(n, chosen)
            if key in seen:
                continue
            seen.add(key)
            facts = tuple((states[a], states[b]) for a, b in chosen)
            rel = FiniteRelation(tuple(states), facts, denominator, max_mass, open_world=False)
            name = "facts:" + ",".join(f"{states[a].coords[0]}{states[b].coords[0]}" for a, b in chosen)
            yield CorpusEntry(name, rel, tuple(CompoundState.of(s) for s in states) + tuple(_mixes(states)))


def affine_relations(levels: Sequence[Fraction], scale_denominator: int, denominator: int = 8,
                     max_mass: int = 2, with_mixes: bool = True) -> Iterator[CorpusEntry]:
    """X0 < X1 plus X ~ ((1-s) X0, s X1) for the other two states, s from ``levels``.

    These relations have a known entropy (s itself) and satisfy the
    comparison hypothesis on strips, so the constructed entropy is exact.
    """
    states = default_states(4)
    x0, x1 = states[0], states[1]
    for s2, s3 in itertools.product(levels, repeat=2):
        facts = [(CompoundState.of(x0), CompoundState.of(x1))]
        for x, s in ((states[2], s2), (states[3], s3)):
            strip = CompoundState(tuple((w, st) for w, st in ((1 - s, x0), (s, x1)) if w))
            facts += [(CompoundState.of(x), strip), (strip, CompoundState.of(x))]
        rel = FiniteRelation(tuple(states), tuple(facts), denominator, max_mass, open_world=False,
                             scale_denominator=scale_denominator)
        sample = tuple(CompoundState.of(s) for s in states) + (tuple(_mixes(states)) if with_mixes else ())
        yield CorpusEntry(f"affine:{s2},{s3}/grid{scale_denominator}", rel, sample,
                          {x0: Fraction(0), x1: Fraction(1), states[2]: Fraction(s2), states[3]: Fraction(s3)})


def full_corpus() -> List[CorpusEntry]:
    quarters = [Fraction(k, 4) for k in range(5)]
    halves = [Fraction(k, 2) for k in range(3)]
    out = list(single_fact_relations())
    # quarter levels with half-step scalings, and half levels with quarter-step scalings,
    # both on the 1/8 lattice so every scaled fact stays representable
    out += list(affine_relations(quarters, scale_denominator=2, with_mixes=False))
    out += list(affine_relations(halves, scale_denominator=4, with_mixes=False))
    return out


def strip_sample(entry: CorpusEntry, x0: StateRef, x1: StateRef) -> List[CompoundState]:
    """Single states plus the unit-mass strips ((1-l) x0, l x1) on the scale grid."""
    singles = [c for c in entry.sample if c.is_single() and list(c)[0][0] == 1]
    grid = [t for t in entry.relation.scale_grid if 0 < t < 1]
    return singles + [CompoundState.of((1 - t, x0), (t, x1)) for t in grid]


@dataclass(frozen=True)
class Plant:
    kind: str
    relation: EditedRelation
    description: str


def plant_violations(closed: ClosedRelation, states: Sequence[StateRef]) -> List[Plant]:
    """Edits of a closed relation that break an axiom in a way the sample can see."""
    singles = [CompoundState.of(s) for s in states]
    rel = {(i, j): closed.compare(a, b).value == "Precedes"
           for i, a in enumerate(singles) for j, b in enumerate(singles)}
    n = len(singles)
    out = [Plant("A1", EditedRelation(closed, remove=[(singles[0], singles[0])]), f"drop {singles[0]} < itself")]
    for i, j, k in itertools.permutations(range(n), 3):
        if rel[i, j] and rel[j, k]:
            out.append(Plant("A2", EditedRelation(closed, remove=[(singles[i], singles[k])]),
                             f"drop {singles[i]} < {singles[k]} behind {singles[j]}"))
            break
    grid = closed.scale_grid
    t = next((g for g in grid if g != 1), None)
    for i, j in itertools.permutations(range(n), 2):
        if rel[i, j] and t is not None:
            out.append(Plant("A4", EditedRelation(closed, remove=[(t * singles[i], t * singles[j])]),
                             f"drop {t}*{singles[i]} < {t}*{singles[j]}"))
            break
    for i, j in itertools.permutations(range(n), 2):
        if not rel[i, j]:
            out.append(Plant("extra", EditedRelation(closed, add=[(singles[i], singles[j])]),
                             f"add {singles[i]} < {singles[j]} without its consequences"))
            break
    return out


@dataclass
class CorpusStats:
    entries: int = 0
    clean_failures: List[str] = field(default_factory=list)
    cancellation_failures: List[str] = field(default_factory=list)
    plants: int = 0
    missed: List[str] = field(default_factory=list)
    entropies_built: int = 0
    principle_failures: List[str] = field(default_factory=list)
    cancellation_instances: int = 0


def reference_pair(rel, states: Sequence[StateRef]):
    """A bottom and top single state with bottom << top, or None."""
    lo = [x for x in states if all(rel.compare(x, y) is Comparability.PRECEDES for y in states)]
    hi = [x for x in states if all(rel.compare(y, x) is Comparability.PRECEDES for y in states)]
    if not lo or not hi or strictly_precedes(rel, lo[0], hi[0]) is not Comparability.PRECEDES:
        return None
    return lo[0], hi[0]


def audit_entry(entry: CorpusEntry, stats: CorpusStats) -> None:
    rel = entry.relation.closure()
    states = list(entry.relation.states)
    stats.entries += 1
    if not check_axioms(rel, entry.sample).passed:
        stats.clean_failures.append(entry.name)
    canc = check_cancellation(rel, entry.sample, limit=None)
    stats.cancellation_instances += sum(int(r.detail.split()[0]) for r in canc.results
                                        if r.detail.split() and r.detail.split()[0].isdigit())
    if not canc.passed:
        stats.cancellation_failures.append(entry.name)
    for plant in plant_violations(rel, states):
        stats.plants += 1
        if not check_axioms(plant.relation, entry.sample).failed:
            stats.missed.append(f"{entry.name}: {plant.description}")
    ref = reference_pair(rel, states)
    if ref is None or not check_CH(rel, None, strip_sample(entry, *ref)).passed:
        return
    values = {x: construct_entropy(rel, ref[0], ref[1], x) for x in states}
    stats.entropies_built += 1
    rep = verify_entropy_principle(values, rel, entry.sample)
    exact = not entry.levels or all(values[k] == v for k, v in entry.levels.items())
    if not rep.passed or not exact:
        stats.principle_failures.append(entry.name)


def audit_corpus(entries: Optional[Sequence[CorpusEntry]] = None) -> CorpusStats:
    """Clean axiom checks, exhaustive cancellation, planted violations and entropy per entry."""
    stats = CorpusStats()
    for entry in (full_corpus() if entries is None else entries):
        audit_entry(entry, stats)
    return stats
