import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adiabatic.corpus import affine_relations
from adiabatic.entropy import (FitError, LambdaRangeError, ReferencePairError, affine_fit, build_chart,
                               construct_calibrated_entropy, construct_entropy, construct_entropy_inf,
                               rebase, verify_entropy_principle)
from adiabatic.oracles import AnalyticEntropy
from adiabatic.report import Verdict
from adiabatic.simple import ModelOracle, StatePoint, ideal_gas
from adiabatic.states import StateRef


def analytic(u, v):
    return 1.5 * math.log(u) + math.log(v)


@pytest.fixture(scope="module")
def oracle():
    return AnalyticEntropy({"gas": lambda u, v: analytic(u, v)})


X0 = StateRef("gas", (1.0, 1.0))
X1 = StateRef("gas", (4.0, 4.0))


def expected_lambda(u, v):
    return (analytic(u, v) - analytic(1, 1)) / (analytic(4, 4) - analytic(1, 1))


@pytest.mark.parametrize("u,v", [(1.0, 1.0), (4.0, 4.0), (2.0, 3.0), (0.5, 0.5), (30.0, 30.0)])
def test_strip_formula_matches_analytic(oracle, u, v):
    lam = construct_entropy(oracle, X0, X1, StateRef("gas", (u, v)), tol=1e-11)
    assert lam == pytest.approx(expected_lambda(u, v), abs=1e-9)


def test_sup_and_inf_agree(oracle):
    x = StateRef("gas", (2.5, 1.5))
    assert construct_entropy(oracle, X0, X1, x) == pytest.approx(construct_entropy_inf(oracle, X0, X1, x), abs=1e-8)


def test_reference_pair_must_be_strict(oracle):
    with pytest.raises(ReferencePairError):
        construct_entropy(oracle, X1, X0, X0)
    with pytest.raises(ReferencePairError):
        construct_entropy(oracle, X0, X0, X1)


def test_out_of_range_lambda(oracle):
    with pytest.raises(LambdaRangeError):
        construct_entropy(oracle, X0, X1, StateRef("gas", (1e6, 1e6)))


def test_geometric_oracle_reproduces_entropy():
    gas = ideal_gas("gas")
    orc = ModelOracle(gas)
    x0, x1 = gas.state_ref(StatePoint(1, (1,))), gas.state_ref(StatePoint(4, (4,)))
    pts = [gas.state_ref(StatePoint(u, (v,))) for u in (1.5, 3.0) for v in (1.2, 3.5)]
    chart = build_chart(orc, x0, x1, pts)
    fit = affine_fit(chart.values, lambda r: gas.entropy(gas.point(r)), pts + [x0, x1])
    assert fit.residual <= 1e-6
    assert fit.a > 0


def test_calibrated_entropy_uses_other_space():
    s = AnalyticEntropy({"gas": lambda u, v: analytic(u, v), "ref": lambda t: 2.0 * t})
    z0, z1 = StateRef("ref", (0.0,)), StateRef("ref", (1.0,))
    xref = StateRef("gas", (1.0, 1.0))
    x = StateRef("gas", (3.0, 2.0))
    lam = construct_calibrated_entropy(s, {"gas": xref}, z0, z1, x, tol=1e-11)
    assert lam == pytest.approx((analytic(3, 2) - analytic(1, 1)) / 2.0, abs=1e-9)


def test_rebase_exact_fractions():
    # X0' sits at 1/4 in (X0, X1); X1 sits at 1/2 in (X0', X1')
    lam0, lam1 = Fraction(1, 4), Fraction(1, 2)
    mu, mu_p = rebase(Fraction(1), lam0, lam1)
    assert (mu, mu_p) == (Fraction(4, 7), Fraction(1))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 0.9), st.floats(0.1, 0.9), st.floats(-1, 2))
def test_rebase_is_affine_in_lambda(lam0, lam1, lam):
    m_a, mp_a = rebase(lam, lam0, lam1)
    m_b, mp_b = rebase(lam + 1, lam0, lam1)
    m_c, mp_c = rebase(lam + 2, lam0, lam1)
    assert (m_c - m_b) == pytest.approx(m_b - m_a, abs=1e-9)
    assert (mp_c - mp_b) == pytest.approx(mp_b - mp_a, abs=1e-9)


def test_affine_fit_detects_nonaffine():
    pts = list(np.linspace(0.5, 3.0, 12))
    fit = affine_fit(lambda x: x, lambda x: x * x, pts)
    assert fit.residual > 0.1


def test_affine_fit_needs_spread():
    with pytest.raises(FitError):
        affine_fit(lambda x: 1.0, lambda x: x, [1.0, 2.0])
    with pytest.raises(FitError):
        affine_fit(lambda x: x, lambda x: -x, [1.0, 2.0, 3.0])


def test_finite_entropy_is_exact_and_satisfies_principle():
    entry = next(e for e in affine_relations([Fraction(k, 4) for k in range(5)], scale_denominator=2,
                                             with_mixes=False) if e.name.startswith("affine:1/4,3/4"))
    rel = entry.relation.closure()
    states = entry.relation.states
    vals = {x: construct_entropy(rel, states[0], states[1], x) for x in states}
    assert vals == entry.levels
    assert all(isinstance(v, Fraction) for v in vals.values())
    assert verify_entropy_principle(vals, rel, entry.sample).passed


def test_principle_flags_nonadditive_function(oracle):
    pts = [StateRef("gas", (u, v)) for u in (1.0, 2.0) for v in (1.0, 2.0)]
    rep = verify_entropy_principle(lambda c: sum(float(t) * analytic(*s.coords) for t, s in c) ** 2, oracle, pts)
    assert rep["additivity"].verdict is Verdict.FAIL
