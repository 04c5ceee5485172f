"""States, compound states and the three-valued comparability answer."""

from __future__ import annotations

import enum
from functools import lru_cache
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Iterable, Iterator, Tuple, Union

Scale = Union[int, float, Fraction]


class DomainError(ValueError):
    """A state or scale lies outside its admissible domain."""


class Comparability(enum.Enum):
    PRECEDES = "Precedes"
    NOT_PRECEDES = "NotPrecedes"
    UNKNOWN = "Unknown"

    def __bool__(self) -> bool:  # pragma: no cover - guard against misuse
        raise TypeError("compare answers are three-valued; test against a member")


@dataclass(frozen=True, order=True)
class StateRef:
    """A point of a named state space.

    ``coords`` is a tuple of reals for continuous models, or a one-element
    tuple holding a label for finite models.
    """

    space: str
    coords: tuple

    def __post_init__(self) -> None:
        if not self.space:
            raise DomainError("space label must be nonempty")
        if not isinstance(self.coords, tuple):
            object.__setattr__(self, "coords", tuple(self.coords))

    @classmethod
    def label(cls, name: str, space: str = "G") -> "StateRef":
        return cls(space, (name,))

    def __str__(self) -> str:
        if len(self.coords) == 1 and isinstance(self.coords[0], str):
            inner = self.coords[0]
        else:
            inner = "(" + ",".join(f"{c:.6g}" for c in self.coords) + ")"
        return inner if self.space == "G" else f"{self.space}:{inner}"


def _part_key(part: Tuple[Scale, StateRef]):
    t, s = part
    return (s.space, repr(s.coords), float(t))


@dataclass(frozen=True, eq=False)
class CompoundState:
    """A multiset of scaled copies ``(t, X)``.

    Parts are stored sorted, so equality ignores order and grouping. A
    single part ``(1, X)`` is the state ``X`` itself.
    """

    parts: tuple = ()

    def __post_init__(self) -> None:
        cleaned = []
        for t, s in self.parts:
            if not isinstance(t, Real) or t <= 0:
                raise DomainError(f"scale must be positive, got {t!r}")
            if not isinstance(s, StateRef):
                raise TypeError(f"expected StateRef, got {type(s).__name__}")
            cleaned.append((t, s))
        object.__setattr__(self, "parts", tuple(sorted(cleaned, key=_part_key)))
        # hashing Fraction scales is slow and compounds are hashed constantly
        object.__setattr__(self, "_hash", hash(self.parts))

    def __eq__(self, other) -> bool:
        if not isinstance(other, CompoundState):
            return NotImplemented
        return self._hash == other._hash and self.parts == other.parts

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def of(cls, *items: Union[StateRef, Tuple[Scale, StateRef]]) -> "CompoundState":
        parts = [(1, it) if isinstance(it, StateRef) else tuple(it) for it in items]
        return cls(tuple(parts))

    def __iter__(self) -> Iterator[Tuple[Scale, StateRef]]:
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __add__(self, other: "CompoundState") -> "CompoundState":
        return compose(self, other)

    def __rmul__(self, t: Scale) -> "CompoundState":
        return scale(t, self)

    def masses(self) -> dict:
        """Total scale carried by each space."""
        out: dict = {}
        for t, s in self.parts:
            out[s.space] = out.get(s.space, 0) + t
        return out

    def is_single(self) -> bool:
        return len(self.parts) == 1 and self.parts[0][0] == 1

    def __str__(self) -> str:
        if not self.parts:
            return "()"
        return " + ".join(f"{t}*{s}" for t, s in self.parts)


def as_compound(x: Union[StateRef, CompoundState]) -> CompoundState:
    return x if isinstance(x, CompoundState) else CompoundState.of(x)


# Axiom checks build the same sums and scalings over and over; both
# operations are pure, so they are memoized.
@lru_cache(maxsize=1 << 16)
def compose(a: CompoundState, b: CompoundState) -> CompoundState:
    return CompoundState(a.parts + b.parts)


@lru_cache(maxsize=1 << 16, typed=True)
def scale(t: Scale, a: CompoundState) -> CompoundState:
    if t <= 0:
        raise DomainError(f"scale factor must be positive, got {t!r}")
    return CompoundState(tuple((t * u, s) for u, s in a.parts))


def strip_query(lam: Scale, x0: StateRef, x1: StateRef, x: Union[StateRef, CompoundState]):
    """Left and right sides of ``((1-lam) x0, lam x1) < x`` with all scales positive.

    Negative coefficients move to the other side, ``(X, -Y) < Z`` meaning
    ``X < (Y, Z)``, and zero coefficients are dropped.
    """
    lhs: list = []
    rhs: list = list(as_compound(x).parts)
    for coef, state in ((1 - lam, x0), (lam, x1)):
        if coef > 0:
            lhs.append((coef, state))
        elif coef < 0:
            rhs.append((-coef, state))
    return CompoundState(tuple(lhs)), CompoundState(tuple(rhs))


def iter_states(compounds: Iterable[CompoundState]) -> Iterator[StateRef]:
    seen = set()
    for c in compounds:
        for _, s in c:
            if s not in seen:
                seen.add(s)
                yield s
