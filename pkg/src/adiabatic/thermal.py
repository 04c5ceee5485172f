"""Thermal join and split, equilibrium, energy flow and the Carnot bound."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .report import Report, Tally, Verdict
from .simple import (SimpleSystemModel, StatePoint, Sector, TemperatureBracket, forward_sector_contains,
                     temperature)
from .states import DomainError

INV_PHI = (math.sqrt(5) - 1) / 2
SPLIT_TOL = 1e-10


class InfeasibleError(ValueError):
    pass


class NotApplicableError(ValueError):
    pass


class OrderingError(ValueError):
    pass


@dataclass(frozen=True)
class ThermalJoinPoint:
    U: float
    V1: Tuple[float, ...]
    V2: Tuple[float, ...]


@dataclass(frozen=True)
class SplitResult:
    x: StatePoint
    y: StatePoint
    total_entropy: float
    maximizer_energy: float
    concave_profile: bool = True


def thermal_join(x: StatePoint, y: StatePoint) -> ThermalJoinPoint:
    return ThermalJoinPoint(x.U + y.U, x.V, y.V)


def canonical_join(x: StatePoint, mx: SimpleSystemModel, y: StatePoint, my: SimpleSystemModel):
    """Join with the lexicographically smaller space on the left."""
    if my.name < mx.name:
        return thermal_join(y, x), (my, mx)
    return thermal_join(x, y), (mx, my)


def _window(joined: ThermalJoinPoint, left: SimpleSystemModel, right: SimpleSystemModel) -> Tuple[float, float]:
    m1, m2 = left.margins[0], right.margins[0]
    lo = max(left.u_bounds[0] + m1, joined.U - (right.u_bounds[1] - m2))
    hi = min(left.u_bounds[1] - m1, joined.U - (right.u_bounds[0] + m2))
    # region predicates (e.g. positive temperature) trim the window further
    probe = np.linspace(lo, hi, 257) if hi > lo else []
    ok = [w for w in probe if left.contains(StatePoint(w, joined.V1))
          and right.contains(StatePoint(joined.U - w, joined.V2))]
    if not ok:
        raise InfeasibleError(f"no feasible energy split for U={joined.U}")
    if ok[0] > lo:
        lo = _edge(lambda w: left.contains(StatePoint(w, joined.V1)) and
                   right.contains(StatePoint(joined.U - w, joined.V2)), ok[0] - (hi - lo) / 256, ok[0])
    if ok[-1] < hi:
        hi = _edge(lambda w: left.contains(StatePoint(w, joined.V1)) and
                   right.contains(StatePoint(joined.U - w, joined.V2)), ok[-1] + (hi - lo) / 256, ok[-1])
    return lo, hi


def _edge(feasible: Callable[[float], bool], bad: float, good: float) -> float:
    for _ in range(80):
        mid = 0.5 * (bad + good)
        if feasible(mid):
            good = mid
        else:
            bad = mid
    return good


def golden_max(f: Callable[[float], float], a: float, b: float, tol: float = SPLIT_TOL) -> float:
    """Maximizer of a unimodal ``f`` on [a, b] by golden-section search."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return _parabolic(f, a, x, b)


def _parabolic(f, a, x, b):
    """One parabolic step through (a, x, b); kept only if it does not lower f."""
    fa, fx, fb = f(a), f(x), f(b)
    num = (x - a) ** 2 * (fx - fb) - (x - b) ** 2 * (fx - fa)
    den = (x - a) * (fx - fb) - (x - b) * (fx - fa)
    if den == 0:
        return x
    cand = x - 0.5 * num / den
    if a <= cand <= b and f(cand) >= fx:
        return cand
    return x


def _is_concave(values: np.ndarray, scale: float) -> bool:
    second = values[:-2] - 2 * values[1:-1] + values[2:]
    return bool(np.all(second <= 1e-9 * max(1.0, scale)))


def thermal_split(joined: ThermalJoinPoint, left: SimpleSystemModel, right: SimpleSystemModel,
                  tol: float = SPLIT_TOL, entropies: Optional[Tuple[Callable, Callable]] = None) -> SplitResult:
    """Maximize S1(W, V1) + S2(U - W, V2) over the feasible energy window."""
    s1, s2 = entropies or (left.analytic_entropy, right.analytic_entropy)
    if s1 is None or s2 is None:
        raise InfeasibleError("thermal split needs entropies for both systems")
    lo, hi = _window(joined, left, right)

    def total(w):
        return s1(w, joined.V1) + s2(joined.U - w, joined.V2)

    grid = np.linspace(lo, hi, 129)
    prof = np.array([total(w) for w in grid])
    concave = _is_concave(prof, float(np.max(np.abs(prof))))
    if concave:
        w = golden_max(total, lo, hi, tol)
    else:
        k = int(np.argmax(prof))
        a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
        w = golden_max(total, a, b, tol)
    x = StatePoint(w, joined.V1)
    y = StatePoint(joined.U - w, joined.V2)
    return SplitResult(x, y, total(w), w, concave)


def split_scan(joined: ThermalJoinPoint, left: SimpleSystemModel, right: SimpleSystemModel, points: int = 101):
    """(W, S_total) rows across the feasible window."""
    lo, hi = _window(joined, left, right)
    s1, s2 = left.analytic_entropy, right.analytic_entropy
    return [(w, s1(w, joined.V1) + s2(joined.U - w, joined.V2)) for w in np.linspace(lo, hi, points)]


def _bracket(model: SimpleSystemModel, x: StatePoint) -> Tuple[float, TemperatureBracket]:
    return temperature(model, None, x)


def in_thermal_equilibrium(x: StatePoint, y: StatePoint, models: Tuple[SimpleSystemModel, SimpleSystemModel],
                           tol: float = 1e-6) -> bool:
    """Temperature brackets overlap, with slack ``tol * max(T)``."""
    tx, bx = _bracket(models[0], x)
    ty, by = _bracket(models[1], y)
    slack = tol * max(tx, ty)
    return bx.t_minus <= by.t_plus + slack and by.t_minus <= bx.t_plus + slack


def check_zeroth_law(sample_triples, tol: float = 1e-6,
                     predicate: Optional[Callable] = None) -> Report:
    """Transitivity, symmetry and scale invariance of thermal equilibrium.

    Each triple is ``((x, mx), (y, my), (z, mz))``. ``predicate(a, ma, b, mb)``
    overrides the bracket-overlap test.
    """
    eq = predicate or (lambda a, ma, b, mb: in_thermal_equilibrium(a, b, (ma, mb), tol))
    trans, sym, scal = Tally("zeroth_law.transitivity"), Tally("zeroth_law.symmetry"), Tally("zeroth_law.scaling")
    for (x, mx), (y, my), (z, mz) in sample_triples:
        xz, zy, xy = eq(x, mx, z, mz), eq(z, mz, y, my), eq(x, mx, y, my)
        if xz and zy:
            if xy:
                trans.ok()
            else:
                trans.fail(f"{x} ; {z} ; {y}")
        if xy == eq(y, my, x, mx):
            sym.ok()
        else:
            sym.fail(f"{x} ; {y}")
        if xy:
            if eq(x.scaled(2.0), mx.scaled(2.0), y.scaled(3.0), my.scaled(3.0)):
                scal.ok()
            else:
                scal.fail(f"2*{x} ; 3*{y}")
    report = Report()
    for t in (trans, sym, scal):
        t.into(report)
    return report


def _isotherm_energy(model: SimpleSystemModel, T: float, v: Tuple[float, ...], u_lo: float, u_hi: float):
    def f(u):
        return temperature(model, None, StatePoint(u, v))[0] - T
    try:
        flo, fhi = f(u_lo), f(u_hi)
    except DomainError:
        return None
    if flo * fhi > 0:
        return None
    return brentq(f, u_lo, u_hi, xtol=1e-13, rtol=1e-12)


def check_transversality(model: SimpleSystemModel, x: StatePoint, search_box, points: int = 41,
                         temperatures: Optional[Sequence[float]] = None) -> Report:
    """Find X0 << x << X1 at a common temperature inside ``search_box``.

    ``search_box`` is ``((u_lo, u_hi), (v_lo, v_hi))`` for one work coordinate.
    Isotherms are traced by solving T(U, V) = T for U on a V grid.
    """
    report = Report()
    (u_lo, u_hi), (v_lo, v_hi) = search_box
    if u_hi <= u_lo or v_hi <= v_lo:
        report.add("transversality", Verdict.FAIL, f"{x}", "degenerate search box")
        return report
    tx, _ = temperature(model, None, x)
    temps = list(temperatures) if temperatures else [tx * f for f in (0.9, 1.1, 0.75, 1.25, 0.5, 1.5)]
    scanned = []
    for T in temps:
        below = above = None
        for v in np.linspace(v_lo, v_hi, points):
            u = _isotherm_energy(model, T, (float(v),), u_lo, u_hi)
            if u is None:
                continue
            p = StatePoint(u, (float(v),))
            if not model.contains(p):
                continue
            scanned.append((T, p))
            side = forward_sector_contains(model, x, p)
            if side is Sector.SUCCEEDS and below is None:
                below = p
            elif side is Sector.PRECEDES and above is None:
                above = p
            if below and above:
                break
        if below and above and in_thermal_equilibrium(below, above, (model, model)):
            report.add("transversality", Verdict.PASS, f"X0={below} ; X1={above} ; T={T:.6g}")
            return report
    report.add("transversality", Verdict.FAIL, f"{x}", f"{len(scanned)} isotherm points scanned")
    return report


def check_energy_flow(x: StatePoint, mx: SimpleSystemModel, y: StatePoint, my: SimpleSystemModel,
                      tol: float = 1e-9) -> Report:
    """After splitting the join of x and y, energy has moved from hot to cold."""
    tx, _ = temperature(mx, None, x)
    ty, _ = temperature(my, None, y)
    if abs(tx - ty) <= 1e-9 * max(tx, ty):
        raise NotApplicableError("equal temperatures: no flow direction")
    split = thermal_split(thermal_join(x, y), mx, my)
    t_star_x, _ = temperature(mx, None, split.x)
    t_star_y, _ = temperature(my, None, split.y)
    t_star = 0.5 * (t_star_x + t_star_y)
    report = Report()
    hot_first = tx > ty
    d_x = split.x.U - x.U
    d_y = split.y.U - y.U
    flow_ok = (d_x <= tol and d_y >= -tol) if hot_first else (d_x >= -tol and d_y <= tol)
    report.add("energy_flow.direction", Verdict.PASS if flow_ok else Verdict.FAIL,
               "" if flow_ok else f"dU_x={d_x:.6g} ; dU_y={d_y:.6g}")
    hi_t, lo_t = max(tx, ty), min(tx, ty)
    slack = 1e-6 * hi_t
    between = lo_t - slack <= t_star <= hi_t + slack
    strict = t_star < hi_t - slack or t_star > lo_t + slack
    report.add("energy_flow.bracketing", Verdict.PASS if between and strict else Verdict.FAIL,
               "" if between and strict else f"T*={t_star:.6g} ; T=({tx:.6g},{ty:.6g})",
               f"T*={t_star:.10g}")
    cons = abs(split.x.U + split.y.U - (x.U + y.U))
    report.add("energy_flow.conservation", Verdict.PASS if cons <= 1e-12 * max(1.0, abs(x.U + y.U))
               else Verdict.FAIL, f"defect={cons:.3e}" if cons > 1e-12 else "")
    return report


@dataclass(frozen=True)
class CarnotResult:
    allowed: bool
    eta: float
    eta_carnot: float


def carnot_check(q1: float, t1: float, q0: float, t0: float, slack: float = 1e-12) -> CarnotResult:
    """Clausius inequality Q1/T1 + Q0/T0 <= 0 and the efficiency bound."""
    if not (t1 > t0 > 0):
        raise OrderingError("need t1 > t0 > 0")
    if q1 == 0:
        raise ValueError("q1 must be nonzero for an efficiency")
    eta = (q1 + q0) / q1
    eta_c = 1 - t0 / t1
    if q1 > 0:
        # for an engine the Clausius inequality is exactly eta <= eta_c; testing
        # the efficiency keeps the slack meaningful however small q1 is
        allowed = eta <= eta_c + slack
    else:
        allowed = q1 / t1 + q0 / t0 <= slack
    return CarnotResult(allowed, eta, eta_c)


@dataclass(frozen=True)
class ReservoirStep:
    model: SimpleSystemModel
    state: StatePoint
    Q: float


@dataclass(frozen=True)
class AuditRow:
    step: int
    Q: float
    T_end: float
    dS_bound: float
    dS_exact: float


def reservoir_cycle_audit(steps: Sequence[ReservoirStep], machine_entropy_change: float = 0.0,
                          tol: float = 1e-10) -> Tuple[Report, List[AuditRow]]:
    """Exact reservoir entropy changes against -Q/T_end and the total-entropy budget."""
    rows = []
    bound = Tally("reservoir_bound")
    start = Tally("reservoir_bound_start")
    total = machine_entropy_change
    for k, st in enumerate(steps):
        end = StatePoint(st.state.U - st.Q, st.state.V)
        if not st.model.contains(end):
            raise InfeasibleError(f"step {k}: reservoir driven to {end}, outside its domain")
        ds = st.model.entropy(end) - st.model.entropy(st.state)
        t_end, _ = temperature(st.model, None, end)
        b = -st.Q / t_end
        t_start, _ = temperature(st.model, None, st.state)
        rows.append(AuditRow(k, st.Q, t_end, b, ds))
        total += ds
        # concavity in U: -Q/T_end <= dS <= -Q/T_start
        if ds >= b - tol:
            bound.ok()
        else:
            bound.fail(f"step {k}: dS={ds:.12g} < -Q/T_end={b:.12g}")
        if ds <= -st.Q / t_start + tol:
            start.ok()
        else:
            start.fail(f"step {k}: dS={ds:.12g} > -Q/T_start={-st.Q / t_start:.12g}")
    report = Report()
    bound.into(report)
    start.into(report)
    ok = total >= -1e-8
    report.add("entropy_budget", Verdict.PASS if ok else Verdict.FAIL,
               "" if ok else f"total dS={total:.6g}", f"total dS={total:.12g}")
    return report, rows
