"""End-to-end acceptance checks, one test per criterion.

Each test records a ``criterion N: PASS|FAIL ...`` line; the lines are
printed as they happen and again in the pytest terminal summary. The file
also runs as a script: ``python tests/test_acceptance.py``.
"""

import itertools
import math
import time

import numpy as np
import pytest

from adiabatic.axioms import check_axioms
from adiabatic.calibration import (InducedOracle, NegativeCycleError, check_F_properties, check_theorem6,
                                   compute_E, lambda_formula, solve_constants)
from adiabatic.corpus import audit_corpus
from adiabatic.entropy import affine_fit, construct_entropy
from adiabatic.oracles import AnalyticEntropy
from adiabatic.simple import (Sector, StatePoint, check_pressure_entropy_identity, forward_sector_contains,
                              ideal_gas, integrate_adiabat, integrate_adiabat_path, temperature,
                              van_der_waals)
from adiabatic.states import Comparability, CompoundState, StateRef
from adiabatic.thermal import (ThermalJoinPoint, carnot_check, check_energy_flow, check_transversality,
                               check_zeroth_law, thermal_split)

from netutil import PLANTED_B, induced_network, random_state

RESULTS = {}


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def gas_entropy(u, v):
    return 1.5 * math.log(u) + math.log(v)


def test_criterion_1_entropy_reconstruction():
    oracle = AnalyticEntropy({"gas": gas_entropy})
    x0, x1 = StateRef("gas", (1.0, 1.0)), StateRef("gas", (4.0, 4.0))
    grid = [StateRef("gas", (float(u), float(v))) for u in np.linspace(1, 4, 10) for v in np.linspace(1, 4, 10)]
    t = time.perf_counter()
    lam = {p: construct_entropy(oracle, x0, x1, p, tol=1e-11) for p in grid}
    elapsed = time.perf_counter() - t
    fit = affine_fit(lambda p: gas_entropy(*p.coords), lam, grid)
    record(1, fit.residual <= 1e-6 and elapsed < 5.0,
           f"100 points, fit residual {fit.residual:.2e} (<= 1e-6), {elapsed:.2f} s (< 5 s)")


def test_criterion_2_adiabat():
    gas = ideal_gas("gas")
    x = StatePoint(1.0, (1.0,))
    direct = integrate_adiabat(gas, x, 8.0).final_u
    rel = abs(direct - 8.0 ** (-2 / 3)) / 8.0 ** (-2 / 3)
    via = integrate_adiabat_path(gas, x, [0.3, 2.5, 8.0]).final_u
    paths = abs(via - direct) / direct
    record(2, rel <= 1e-6 and paths <= 1e-6,
           f"u(8) = {direct:.12g}, rel error {rel:.2e}; two paths differ by {paths:.2e}")


def test_criterion_3_sector_nesting():
    gas = ideal_gas("gas")
    rng = np.random.default_rng(3)
    pool = [StatePoint(rng.uniform(1, 4), (rng.uniform(1, 4),)) for _ in range(16)]
    # plant near-equivalent states so the tolerance branch is exercised
    for k in range(2):
        v = float(rng.uniform(1, 4))
        pool.append(StatePoint(integrate_adiabat(gas, pool[k], v).final_u, (v,)))
    n = len(pool)
    verdict = {(i, j): forward_sector_contains(gas, pool[i], pool[j]) for i in range(n) for j in range(n)}
    pairs = [tuple(rng.choice(n, 2, replace=False)) for _ in range(50)]
    total = all(verdict[i, j] in Sector for i, j in pairs)
    mirror = {Sector.PRECEDES: Sector.SUCCEEDS, Sector.SUCCEEDS: Sector.PRECEDES,
              Sector.EQUIVALENT: Sector.EQUIVALENT}
    antisym = sum(verdict[j, i] is not mirror[verdict[i, j]] for i, j in pairs)

    def le(i, j):  # x_i < x_j
        return verdict[i, j] is not Sector.SUCCEEDS

    trans = sum(1 for i, j, k in itertools.product(range(n), repeat=3) if le(i, j) and le(j, k) and not le(i, k))
    record(3, total and antisym == 0 and trans == 0,
           f"50 pairs total, {antisym} antisymmetry and {trans} transitivity violations over {n ** 3} triples")


def test_criterion_4_temperature():
    gas = ideal_gas("gas")
    rng = np.random.default_rng(4)
    pts = [StatePoint(rng.uniform(0.1, 50), (rng.uniform(0.1, 50),)) for _ in range(100)]
    worst, positive = 0.0, True
    for p in pts:
        T, _ = temperature(gas, None, p)
        positive &= T > 0
        worst = max(worst, abs(T - 2 * p.U / 3) / (2 * p.U / 3))
    ident = check_pressure_entropy_identity(gas, None, pts, rtol=1e-4)
    record(4, worst <= 1e-4 and positive and ident.passed,
           f"max rel |T - 2U/3| {worst:.2e} on 100 points, T > 0, dS/dV = P/T {ident.results[0].detail}")


def test_criterion_5_split_and_energy_flow():
    a, b = ideal_gas("a", 2.0), ideal_gas("b", 1.0)
    r = thermal_split(ThermalJoinPoint(3.0, (1.0,), (1.0,)), a, b)
    ta, _ = temperature(a, None, r.x)
    tb, _ = temperature(b, None, r.y)
    split_ok = abs(r.maximizer_energy - 2.0) <= 1e-6 and abs(ta - tb) <= 1e-4 * max(ta, tb)
    rng = np.random.default_rng(5)
    gas, vdw = ideal_gas("gas"), van_der_waals("vdw")
    flow_fail = 0
    for k in range(20):
        mx = gas if k % 2 else vdw
        x = StatePoint(rng.uniform(1, 10), (rng.uniform(1, 5),))
        y = StatePoint(rng.uniform(1, 10), (rng.uniform(1, 5),))
        tx, _ = temperature(mx, None, x)
        ty, _ = temperature(gas, None, y)
        if abs(tx - ty) < 0.05 * max(tx, ty):
            y = StatePoint(y.U * 2, y.V)
        flow_fail += check_energy_flow(x, mx, y, gas).failed
    record(5, split_ok and flow_fail == 0,
           f"W = {r.maximizer_energy:.10g}, T = ({ta:.8g}, {tb:.8g}); energy flow failures {flow_fail}/20")


def test_criterion_6_zeroth_law_and_transversality():
    rng = np.random.default_rng(6)
    gas, vdw = ideal_gas("gas"), van_der_waals("vdw")
    big = ideal_gas("big", 3.0)

    def at(model, T):
        v = float(rng.uniform(1, 5)) * model.amount
        if model is vdw:
            return StatePoint(4.0 * T - 3.0 / v, (v,)), vdw
        return StatePoint(1.5 * T * model.amount, (v,)), model

    triples = []
    for k in range(200):
        Ts = [float(rng.uniform(0.5, 3))] * 3 if k % 2 == 0 else list(rng.uniform(0.5, 3, 3))
        if k % 4 == 1:
            Ts[2] = Ts[0]  # x ~ z only
        models = [gas, vdw, big]
        rng.shuffle(models)
        triples.append(tuple(at(m, T) for m, T in zip(models, Ts)))
    rep = check_zeroth_law(triples)
    trans = rep["zeroth_law.transitivity"]
    found = 0
    for _ in range(20):
        x = StatePoint(rng.uniform(0.5, 3), (rng.uniform(0.5, 3),))
        found += check_transversality(gas, x, ((0.02, 20.0), (0.05, 30.0))).passed
    record(6, rep.passed and found == 20,
           f"transitivity {trans.detail}, 0 violations; transversality witnesses for {found}/20 states")


def test_criterion_7_carnot():
    r = carnot_check(100, 600, -50, 300)
    exact = r.allowed and r.eta == 0.5 and r.eta_carnot == 0.5
    rejected = not carnot_check(100, 600, -40, 300).allowed
    rng = np.random.default_rng(7)
    bad = 0
    for _ in range(100):
        t0 = rng.uniform(1, 1000)
        t1 = t0 * rng.uniform(1.001, 10)
        q1 = rng.uniform(1e-3, 1e3)
        q0 = -q1 * t0 / t1 * rng.uniform(1.0, 3.0)
        c = carnot_check(q1, t1, q0, t0)
        bad += not (c.allowed and c.eta <= c.eta_carnot + 1e-12)
    record(7, exact and rejected and bad == 0,
           f"eta = {r.eta} = eta_C {r.eta_carnot}; Q0=-40 rejected; {bad}/100 random cycles over the bound")


def test_criterion_8_calibration():
    net = induced_network()
    rng = np.random.default_rng(8)
    pairs = [(random_state(net, "C1E1", rng), random_state(net, "C2", rng)) for _ in range(100)]
    th6 = check_theorem6(net, "C1E1", "C2", pairs, InducedOracle(net, PLANTED_B))
    sol = solve_constants(net)
    err = max(max(abs(sol.B[k] - lambda_formula(net, k)), abs(sol.B[k] - PLANTED_B[k])) for k in PLANTED_B)
    fprops = check_F_properties(net, [("C1", "L1"), ("C2", "L2"), ("C1E1", "C2")])
    net.add_edge("L1", "C1", D=-PLANTED_B["C1"] - 1.0)
    try:
        compute_E(net, "C1", "L1")
        cert = None
    except NegativeCycleError as e:
        cert = e.certificate
    infeasible = solve_constants(net)
    detected = (cert is not None and cert.total < 0 and infeasible.status == "Infeasible"
                and infeasible.certificate is not None)
    record(8, th6.passed and err <= 1e-10 and not fprops.failed and detected,
           f"theorem6 {th6.results[0].detail}; max |B - F(G, L(G))| {err:.1e}; "
           f"planted cycle {cert} certified")


def _analytic_cancellation(n=500, seed=10):
    s = AnalyticEntropy({"a": gas_entropy, "b": lambda u, v: 2.0 * gas_entropy(u, v)})
    rng = np.random.default_rng(seed)

    def state():
        space = "a" if rng.random() < 0.5 else "b"
        return CompoundState.of((1, StateRef(space, (float(rng.uniform(0.5, 5)), float(rng.uniform(0.5, 5))))))

    premises = violations = 0
    for _ in range(n):
        x = state()
        y = CompoundState.of((1, StateRef(list(x)[0][1].space, (float(rng.uniform(0.5, 5)), float(rng.uniform(0.5, 5))))))
        z = state() + 0.5 * state()
        if s.compare(x + z, y + z) is Comparability.PRECEDES:
            premises += 1
            violations += s.compare(x, y) is not Comparability.PRECEDES
    return premises, violations


@pytest.fixture(scope="module")
def corpus_stats():
    t = time.perf_counter()
    stats = audit_corpus()
    return stats, time.perf_counter() - t


def test_criterion_9_finite_brute_force(corpus_stats):
    stats, secs = corpus_stats
    ok = (not stats.clean_failures and not stats.principle_failures and not stats.missed
          and stats.entropies_built > 0)
    record(9, ok, f"{stats.entries} relations, {stats.entropies_built} entropies built with "
                  f"{len(stats.principle_failures)} principle failures; {stats.plants} plants, "
                  f"{len(stats.missed)} missed; {len(stats.clean_failures)} clean failures ({secs:.0f} s)")


def test_criterion_10_cancellation(corpus_stats):
    stats, _ = corpus_stats
    premises, violations = _analytic_cancellation()
    ok = not stats.cancellation_failures and violations == 0
    record(10, ok, f"finite corpus {stats.cancellation_instances} instances, "
                   f"{len(stats.cancellation_failures)} failing relations; analytic 500 triples "
                   f"({premises} with premise), {violations} violations")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
