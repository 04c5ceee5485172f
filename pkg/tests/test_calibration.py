import math

import numpy as np
import pytest

from adiabatic.calibration import (DataError, InducedOracle, NegativeCycleError, ProcessWitness,
                                   ReactionNetwork, bellman_ford, check_F_properties, check_theorem6,
                                   compute_D, compute_E, compute_F, find_calibrators, lambda_formula,
                                   solve_constants)
from adiabatic.simple import ideal_gas, van_der_waals
from adiabatic.states import StateRef

from netutil import PLANTED_B, induced_network, random_state


def two_element_net(d_cl=3.0, d_lc=-3.0):
    net = ReactionNetwork()
    net.add_node("E1", [1, 0])
    net.add_node("E2", [0, 1])
    net.add_node("C", [1, 1])
    net.add_product("L", [(1, "E1"), (1, "E2")])
    net.add_edge("C", "L", D=d_cl)
    net.add_edge("L", "C", D=d_lc)
    return net


def test_saturated_constant_is_unique():
    sol = solve_constants(two_element_net())
    assert sol.status == "Feasible"
    assert sol.B["C"] == pytest.approx(3.0)
    assert sol.intervals["C"] == pytest.approx((3.0, 3.0))
    assert lambda_formula(two_element_net(), "C") == pytest.approx(3.0)


def test_gap_gives_interval_and_midpoint():
    sol = solve_constants(two_element_net(3.0, -2.0))
    assert sol.intervals["C"] == pytest.approx((2.0, 3.0))
    assert sol.B["C"] == pytest.approx(2.5)
    assert sol.gaps[("C", "L")] == pytest.approx((2.0, 3.0))


def test_disconnected_space_is_free():
    net = two_element_net()
    net.add_node("X", [1, 1])
    sol = solve_constants(net)
    assert sol.status == "Unbounded-degrees-of-freedom"
    assert sol.free == ["X"]


def line_net():
    net = ReactionNetwork(1)
    for x in "ABC":
        net.add_node(x, [1])
    net.add_edge("A", "B", D=1.0)
    net.add_edge("B", "C", D=-2.0)
    net.add_edge("A", "C", D=5.0)
    return net


def test_E_is_shortest_path():
    net = line_net()
    assert compute_E(net, "A", "C") == -1.0
    assert compute_E(net, "C", "A") == math.inf


def test_negative_cycle_certified():
    net = line_net()
    net.add_edge("C", "A", D=0.5)
    with pytest.raises(NegativeCycleError) as info:
        compute_E(net, "A", "C")
    cert = info.value.certificate
    assert cert.total == pytest.approx(-0.5)
    assert set(cert.nodes) == {"A", "B", "C"}
    sol = solve_constants(net)
    assert sol.status == "Infeasible" and sol.certificate.total < 0


def test_bellman_ford_plain():
    dist, cycle = bellman_ford(["s", "a", "b"], [("s", "a", 2.0), ("a", "b", -1.0), ("s", "b", 4.0)], "s")
    assert cycle is None and dist["b"] == 1.0


def test_D_from_witnesses_and_self():
    net = ReactionNetwork(1)
    net.add_node("A", [1], lambda c: c[0])
    net.add_node("B", [1], lambda c: 2 * c[0])
    a, b = StateRef("A", (1.0,)), StateRef("B", (3.0,))
    net.add_edge("A", "B", witnesses=[ProcessWitness(a, b), ProcessWitness(StateRef("A", (2.0,)), b)])
    assert compute_D(net, "A", "B") == pytest.approx(4.0)
    assert compute_D(net, "A", "A") == 0.0
    assert compute_D(net, "B", "A") == math.inf


def test_edge_validates_membership():
    net = ReactionNetwork(1)
    net.add_node("A", [1], lambda c: c[0])
    net.add_node("B", [1], lambda c: c[0])
    with pytest.raises(DataError):
        net.add_edge("A", "B", witnesses=[ProcessWitness(StateRef("B", (1.0,)), StateRef("B", (1.0,)))])


@pytest.fixture(scope="module")
def induced():
    return induced_network()


def test_induced_network_recovers_constants(induced):
    sol = solve_constants(induced)
    for k, v in PLANTED_B.items():
        assert sol.B[k] == pytest.approx(v, abs=1e-10)
        assert lambda_formula(induced, k) == pytest.approx(v, abs=1e-10)


def test_F_properties_hold(induced):
    rep = check_F_properties(induced, [("C1", "L1"), ("C2", "L2"), ("C1E1", "C2")])
    assert not rep.failed, rep.rows()


def test_planted_inconsistent_F_flagged(induced):
    rep = check_F_properties(induced, [("C1", "L1")], table={("C1", "L1"): 1.0, ("L1", "C1"): -2.0})
    assert rep["F29"].verdict.value == "FAIL"


def test_theorem6(induced):
    rng = np.random.default_rng(1)
    pairs = [(random_state(induced, "C1E1", rng), random_state(induced, "C2", rng)) for _ in range(40)]
    rep = check_theorem6(induced, "C1E1", "C2", pairs, InducedOracle(induced, PLANTED_B))
    assert rep.passed, rep.rows()


def test_theorem6_catches_wrong_constants(induced):
    rng = np.random.default_rng(2)
    pairs = [(random_state(induced, "C1E1", rng), random_state(induced, "C2", rng)) for _ in range(200)]
    wrong = InducedOracle(induced, {"C1": 0.0, "C2": 0.0})
    assert check_theorem6(induced, "C1E1", "C2", pairs, wrong).failed


def test_product_lookup_is_order_free(induced):
    assert induced.find_product([(1.0, "E2"), (1.0, "E1")]) == "L1"
    assert compute_F(induced, "C1", "C1") == 0.0


def test_calibrators_equal_deltas():
    g, v = ideal_gas("a"), van_der_waals("v")
    c = find_calibrators(g, v, 0.5)
    assert not c.degenerate
    assert g.entropy(c.x1) - g.entropy(c.x0) == pytest.approx(0.5, abs=1e-10)
    assert v.entropy(c.y1) - v.entropy(c.y0) == pytest.approx(0.5, abs=1e-10)
    assert find_calibrators(g, v, 0.0).degenerate
