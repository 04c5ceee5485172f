from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from adiabatic.states import (Comparability, CompoundState, DomainError, StateRef, as_compound,
                              iter_states, strip_query)

A, B, C = (StateRef.label(n) for n in "ABC")
fracs = st.fractions(min_value=Fraction(1, 8), max_value=4, max_denominator=8)
refs = st.sampled_from([A, B, C])
compounds = st.lists(st.tuples(fracs, refs), min_size=1, max_size=4).map(lambda p: CompoundState(tuple(p)))


def test_parts_are_order_independent():
    assert CompoundState.of(A, B) == CompoundState.of(B, A)
    assert hash(CompoundState.of(A, B)) == hash(CompoundState.of(B, A))


def test_scale_rejects_nonpositive():
    with pytest.raises(DomainError):
        0 * CompoundState.of(A)
    with pytest.raises(DomainError):
        CompoundState(((Fraction(-1), A),))


def test_empty_space_label_rejected():
    with pytest.raises(DomainError):
        StateRef("", ("x",))


def test_comparability_is_not_a_bool():
    with pytest.raises(TypeError):
        bool(Comparability.PRECEDES)


def test_strip_query_moves_negative_coefficients():
    lhs, rhs = strip_query(Fraction(3, 2), A, B, C)
    assert lhs == CompoundState.of((Fraction(3, 2), B))
    assert rhs == CompoundState.of(C, (Fraction(1, 2), A))
    lhs, rhs = strip_query(Fraction(0), A, B, C)
    assert lhs == CompoundState.of(A) and rhs == CompoundState.of(C)


def test_iter_states_dedups_in_order():
    assert list(iter_states([CompoundState.of(B, A), CompoundState.of(A, C)])) == [A, B, C]


@given(compounds, compounds)
def test_composition_commutes(x, y):
    assert x + y == y + x


@given(compounds, compounds, compounds)
def test_composition_associates(x, y, z):
    assert (x + y) + z == x + (y + z)


@given(fracs, fracs, compounds)
def test_scaling_composes(s, t, x):
    assert s * (t * x) == (s * t) * x


@given(fracs, compounds, compounds)
def test_scaling_distributes(t, x, y):
    assert (t * (x + y)).masses() == (t * x + t * y).masses()


@given(compounds)
def test_masses_add(x):
    assert sum(x.masses().values()) == sum(t for t, _ in x)


def test_as_compound_wraps_single_state():
    c = as_compound(A)
    assert c.is_single() and list(c) == [(1, A)]
