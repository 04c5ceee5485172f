"""Finite preorders on scaled compounds of finitely many states.

A compound is identified with its vector of masses per state (splitting and
recombination make every arrangement of the same masses equivalent). Masses
live on the lattice ``(1/q)Z`` and the universe is capped at a total mass of
``max_mass``. Closure under reflexivity, transitivity, consistency and
scaling is then reachability in the graph whose edges apply a scaled base
fact to part of a compound.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .states import Comparability, CompoundState, StateRef, as_compound

P, N, U = Comparability.PRECEDES, Comparability.NOT_PRECEDES, Comparability.UNKNOWN

Vec = Tuple[int, ...]

VECTOR_CACHE = 1 << 18
MAX_UNIVERSE = 200_000


class RelationParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _compositions(total: int, n: int):
    """All n-tuples of nonnegative ints summing to ``total``."""
    if n == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, n - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class FiniteRelation:
    """Base facts over a finite set of states plus the scaling lattice."""

    states: Tuple[StateRef, ...]
    base_facts: Tuple[Tuple[CompoundState, CompoundState], ...]
    denominator: int = 16
    max_mass: int = 2
    open_world: bool = True
    mode: str = "closure"
    scale_denominator: Optional[int] = None

    def __post_init__(self) -> None:
        if self.mode not in ("closure", "literal"):
            raise ValueError("mode must be 'closure' or 'literal'")
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "base_facts", tuple((as_compound(a), as_compound(b)) for a, b in self.base_facts))
        if self.denominator < 1 or self.max_mass < 1:
            raise ValueError("denominator and max_mass must be positive")
        if self.scale_denominator is not None and self.denominator % self.scale_denominator:
            raise ValueError("scale_denominator must divide denominator")
        known = set(self.states)
        for a, b in self.base_facts:
            for _, s in itertools.chain(a, b):
                if s not in known:
                    raise ValueError(f"fact mentions unregistered state {s}")

    @property
    def scale_grid(self) -> List[Fraction]:
        return self.universe().scale_grid

    def universe(self) -> "Universe":
        return Universe(self.states, self.denominator, self.max_mass, self.scale_denominator)

    def closure(self, open_world: Optional[bool] = None) -> "ClosedRelation":
        ow = self.open_world if open_world is None else open_world
        return ClosedRelation.build(self, open_world=ow)

    def relation(self):
        """The relation this file describes: its closure, or the facts verbatim."""
        return self.closure() if self.mode == "closure" else self.literal()

    def literal(self) -> "PairRelation":
        """The base facts taken as the complete relation, without closure."""
        uni = self.universe()
        pairs = set()
        for a, b in self.base_facts:
            va, vb = uni.vector(a), uni.vector(b)
            if va is None or vb is None:
                raise ValueError(f"fact {a} -> {b} is off the mass lattice")
            pairs.add((va, vb))
        return PairRelation(uni, frozenset(pairs))


@dataclass(frozen=True)
class Universe:
    states: Tuple[StateRef, ...]
    denominator: int
    max_mass: int
    scale_denominator: Optional[int] = None
    _index: Dict[StateRef, int] = field(default=None, init=False, repr=False, compare=False)
    _vcache: Dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})
        object.__setattr__(self, "_vcache", {})

    @property
    def max_units(self) -> int:
        return self.max_mass * self.denominator

    def vector(self, c) -> Optional[Vec]:
        """Mass vector of a compound in lattice units, or None when off-lattice."""
        try:
            return self._vcache[c]
        except KeyError:
            pass
        v = self._vector(c)
        if len(self._vcache) < VECTOR_CACHE:
            self._vcache[c] = v
        return v

    def _vector(self, c) -> Optional[Vec]:
        v = [0] * len(self.states)
        for t, s in as_compound(c):
            i = self._index.get(s)
            if i is None:
                return None
            units = Fraction(t) * self.denominator
            if units.denominator != 1:
                return None
            v[i] += int(units)
        if sum(v) > self.max_units:
            return None
        return tuple(v)

    def compound(self, v: Vec) -> CompoundState:
        q = self.denominator
        return CompoundState(tuple((Fraction(k, q), s) for k, s in zip(v, self.states) if k))

    def vectors(self, mass: Optional[Fraction] = None) -> List[Vec]:
        n = len(self.states)
        if mass is None:
            totals = range(1, self.max_units + 1)
        else:
            units = Fraction(mass) * self.denominator
            if units.denominator != 1 or units > self.max_units:
                return []
            totals = [int(units)]
        return [v for tot in totals for v in _compositions(tot, n)]

    @property
    def scale_grid(self) -> List[Fraction]:
        """Scales the axiom checks use; defaults to every lattice scale."""
        q = self.scale_denominator or self.denominator
        return [Fraction(k, q) for k in range(1, self.max_mass * q + 1)]

    @property
    def lattice_scales(self) -> List[Fraction]:
        q = self.denominator
        return [Fraction(k, q) for k in range(1, self.max_units + 1)]


class _RelationBase:
    universe: Universe
    closed_world: bool
    backend = "FiniteClosure"
    tolerance = 0.0

    @property
    def scale_grid(self) -> List[Fraction]:
        return self.universe.scale_grid

    @property
    def grid(self) -> int:
        return self.universe.denominator

    def _holds(self, va: Vec, vb: Vec) -> bool:
        raise NotImplementedError

    def compare(self, a, b) -> Comparability:
        va, vb = self.universe.vector(a), self.universe.vector(b)
        if va is None or vb is None:
            return U
        if self._holds(va, vb):
            return P
        return N if self.closed_world else U


class ClosedRelation(_RelationBase):
    """Reachability closure of a :class:`FiniteRelation` over its universe."""

    def __init__(self, universe: Universe, vectors: List[Vec], comp: np.ndarray, reach: List[int],
                 closed_world: bool):
        self.universe = universe
        self.closed_world = closed_world
        self._pos = {v: i for i, v in enumerate(vectors)}
        self._vectors = vectors
        self._comp = comp
        self._reach = reach

    @classmethod
    def build(cls, rel: FiniteRelation, open_world: bool = True) -> "ClosedRelation":
        uni = rel.universe()
        vectors = uni.vectors()
        if len(vectors) > MAX_UNIVERSE:
            raise ValueError(f"universe of {len(vectors)} compounds is too large; lower denominator or max_mass")
        pos = {v: i for i, v in enumerate(vectors)}
        moves = _fact_moves(rel, uni)
        if moves:
            arr = np.array(vectors, dtype=np.int64).reshape(len(vectors), len(uni.states))
            src_all, dst_all = [], []
            for need, delta in moves:
                ok = np.all(arr >= need, axis=1)
                idx = np.nonzero(ok)[0]
                for i in idx:
                    tgt = tuple(int(x) for x in arr[i] + delta)
                    j = pos.get(tgt)
                    if j is not None and j != i:
                        src_all.append(i)
                        dst_all.append(j)
        else:
            src_all, dst_all = [], []
        n = len(vectors)
        graph = coo_matrix((np.ones(len(src_all), dtype=np.int8), (src_all, dst_all)), shape=(n, n)).tocsr()
        ncomp, comp = connected_components(graph, directed=True, connection="strong")
        reach = _dag_reach(ncomp, comp, src_all, dst_all)
        return cls(uni, vectors, comp, reach, closed_world=not open_world)

    def _holds(self, va: Vec, vb: Vec) -> bool:
        if va == vb:
            return True
        ia, ib = self._pos.get(va), self._pos.get(vb)
        if ia is None or ib is None:
            return False
        return bool(self._reach[self._comp[ia]] >> int(self._comp[ib]) & 1)

    def pairs(self, vectors: Optional[Iterable[Vec]] = None) -> set:
        """All related pairs among ``vectors`` (default: whole universe)."""
        vs = list(self._vectors if vectors is None else vectors)
        return {(a, b) for a in vs for b in vs if self._holds(a, b)}

    def reclose(self) -> "ClosedRelation":
        """Closure of this relation's own pairs; equals ``self`` when idempotent."""
        facts = [(self.universe.compound(a), self.universe.compound(b))
                 for a, b in self.pairs() if a != b]
        rel = FiniteRelation(self.universe.states, tuple(facts), self.universe.denominator,
                             self.universe.max_mass, scale_denominator=self.universe.scale_denominator)
        return ClosedRelation.build(rel, open_world=not self.closed_world)


class EditedRelation(_RelationBase):
    """A relation with some pairs forced in or out, for planting violations."""

    def __init__(self, base: _RelationBase, add=(), remove=()):
        self.base = base
        self.universe = base.universe
        self.closed_world = base.closed_world
        self.add = {self._vec(a, b) for a, b in add}
        self.remove = {self._vec(a, b) for a, b in remove}

    def _vec(self, a, b):
        va, vb = self.universe.vector(a), self.universe.vector(b)
        if va is None or vb is None:
            raise ValueError(f"edited pair {a} -> {b} is off the mass lattice")
        return va, vb

    def _holds(self, va: Vec, vb: Vec) -> bool:
        if (va, vb) in self.remove:
            return False
        if (va, vb) in self.add:
            return True
        return self.base._holds(va, vb)


class PairRelation(_RelationBase):
    """A relation given literally by its pairs; absence means not related."""

    def __init__(self, universe: Universe, pairs: frozenset, closed_world: bool = True):
        self.universe = universe
        self.pairs_ = pairs
        self.closed_world = closed_world

    def _holds(self, va: Vec, vb: Vec) -> bool:
        return (va, vb) in self.pairs_

    def pairs(self) -> set:
        return set(self.pairs_)


def _fact_moves(rel: FiniteRelation, uni: Universe):
    """(need, delta) integer vectors for every on-lattice scaling of every fact."""
    moves = set()
    for a, b in rel.base_facts:
        fa = [Fraction(0)] * len(uni.states)
        fb = [Fraction(0)] * len(uni.states)
        for t, s in a:
            fa[uni._index[s]] += Fraction(t)
        for t, s in b:
            fb[uni._index[s]] += Fraction(t)
        for t in uni.lattice_scales:
            need = [x * t * uni.denominator for x in fa]
            gain = [x * t * uni.denominator for x in fb]
            if any(x.denominator != 1 for x in need + gain):
                continue
            if sum(need) > uni.max_units:
                break
            need_i = np.array([int(x) for x in need], dtype=np.int64)
            delta = np.array([int(g - x) for g, x in zip(gain, need)], dtype=np.int64)
            if delta.any():
                moves.add((tuple(need_i), tuple(delta)))
    return [(np.array(n), np.array(d)) for n, d in sorted(moves)]


def _dag_reach(ncomp: int, comp: np.ndarray, src: Sequence[int], dst: Sequence[int]) -> List[int]:
    """Bitset of reachable components for each strongly connected component."""
    succ: List[set] = [set() for _ in range(ncomp)]
    indeg = [0] * ncomp
    for i, j in zip(src, dst):
        ci, cj = int(comp[i]), int(comp[j])
        if ci != cj and cj not in succ[ci]:
            succ[ci].add(cj)
            indeg[cj] += 1
    order = [c for c in range(ncomp) if indeg[c] == 0]
    k = 0
    while k < len(order):
        c = order[k]
        k += 1
        for d in succ[c]:
            indeg[d] -= 1
            if indeg[d] == 0:
                order.append(d)
    reach = [0] * ncomp
    for c in reversed(order):
        bits = 1 << c
        for d in succ[c]:
            bits |= reach[d]
        reach[c] = bits
    return reach


# ---------------------------------------------------------------- file format

_TERM = re.compile(r"\s*(?:(?P<scale>[0-9]+(?:\.[0-9]+)?(?:/[0-9]+)?)\s*\*\s*)?(?P<state>[A-Za-z_][\w.]*(?::[\w.]+)?)\s*$")


def _parse_side(text: str, line_no: int, col0: int) -> CompoundState:
    parts = []
    col = col0
    for chunk in text.split("+"):
        m = _TERM.match(chunk)
        if not m or not chunk.strip():
            raise RelationParseError(f"cannot parse term {chunk.strip()!r}", line_no, col + 1)
        scale = Fraction(m.group("scale")) if m.group("scale") else Fraction(1)
        if scale <= 0:
            raise RelationParseError("scale must be positive", line_no, col + 1)
        name = m.group("state")
        space, _, label = name.rpartition(":")
        parts.append((scale, StateRef(space or "G", (label,))))
        col += len(chunk) + 1
    return CompoundState(tuple(parts))


def parse_relation(text: str, denominator: int = 16, max_mass: int = 2, open_world: bool = True) -> FiniteRelation:
    """Parse the line-oriented fact format.

    Each line is ``<scale>*<state> [+ ...] -> <scale>*<state> [+ ...]``;
    ``<->`` states both directions. ``#`` starts a comment. Comment lines
    of the form ``#! key = value`` set ``denominator``, ``max_mass``,
    ``world`` (open/closed), ``mode`` (closure/literal) or ``states``
    (space-separated, fixing order).
    """
    facts = []
    order: List[StateRef] = []
    seen = set()
    opts = {"denominator": denominator, "max_mass": max_mass, "world": "open" if open_world else "closed",
            "mode": "closure"}
    declared: List[StateRef] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if raw.lstrip().startswith("#!"):
            key, _, value = raw.lstrip()[2:].partition("=")
            key, value = key.strip(), value.strip()
            if key in ("denominator", "max_mass"):
                try:
                    opts[key] = int(value)
                except ValueError:
                    raise RelationParseError(f"{key} must be an integer", line_no, raw.index(value) + 1)
            elif key == "world":
                if value not in ("open", "closed"):
                    raise RelationParseError("world must be open or closed", line_no, raw.index(value) + 1)
                opts["world"] = value
            elif key == "mode":
                if value not in ("closure", "literal"):
                    raise RelationParseError("mode must be closure or literal", line_no, raw.index(value) + 1)
                opts["mode"] = value
            elif key == "states":
                for tok in value.split():
                    space, _, label = tok.rpartition(":")
                    declared.append(StateRef(space or "G", (label,)))
            else:
                raise RelationParseError(f"unknown directive {key!r}", line_no, 3)
            continue
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        both = "<->" in body
        arrow = "<->" if both else "->"
        if body.count(arrow) != 1 or (not both and "<-" in body):
            col = body.find("-") + 1 if "-" in body else len(body) + 1
            raise RelationParseError("expected exactly one '->' or '<->'", line_no, max(col, 1))
        left, right = body.split(arrow)
        a = _parse_side(left, line_no, 0)
        b = _parse_side(right, line_no, len(left) + len(arrow))
        for _, s in itertools.chain(a, b):
            if s not in seen:
                seen.add(s)
                order.append(s)
        facts.append((a, b))
        if both:
            facts.append((b, a))
    states = declared + [s for s in order if s not in set(declared)]
    return FiniteRelation(tuple(states), tuple(facts), opts["denominator"], opts["max_mass"],
                          open_world=opts["world"] == "open", mode=opts["mode"])


def format_relation(rel: FiniteRelation) -> str:
    lines = [f"#! denominator = {rel.denominator}", f"#! max_mass = {rel.max_mass}",
             "#! world = " + ("open" if rel.open_world else "closed"),
             f"#! mode = {rel.mode}",
             "#! states = " + " ".join(_tok(s) for s in rel.states)]
    for a, b in rel.base_facts:
        lines.append(f"{_side(a)} -> {_side(b)}")
    return "\n".join(lines) + "\n"


def _tok(s: StateRef) -> str:
    return s.coords[0] if s.space == "G" else f"{s.space}:{s.coords[0]}"


def _side(c: CompoundState) -> str:
    return " + ".join(f"{Fraction(t)}*{_tok(s)}" for t, s in c)
