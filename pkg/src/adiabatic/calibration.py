"""Entropy constants across state spaces: D, E, F tables and the B solve.

All infima are taken over the configured finite network (its edges,
witnesses and catalyst list), so every F reported here is an upper bound
on the value over all conceivable chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq, linprog

from .report import Report, Tally, Verdict
from .simple import SimpleSystemModel, StatePoint
from .states import Comparability, CompoundState, StateRef, as_compound

INF = math.inf
P, N = Comparability.PRECEDES, Comparability.NOT_PRECEDES


class DataError(ValueError):
    pass


class RangeError(ValueError):
    pass


@dataclass(frozen=True)
class NegativeCycle:
    """A closed walk whose weights sum to a negative number."""
    nodes: Tuple[str, ...]
    weights: Tuple[float, ...]

    @property
    def total(self) -> float:
        return float(sum(self.weights))

    def __str__(self) -> str:
        path = " -> ".join(self.nodes + self.nodes[:1])
        return f"{path} (sum={self.total:.12g})"


class NegativeCycleError(RuntimeError):
    def __init__(self, certificate: NegativeCycle):
        super().__init__(f"negative cycle: {certificate}")
        self.certificate = certificate


@dataclass
class SpaceNode:
    id: str
    composition: Tuple[float, ...]
    entropy: Optional[Callable[[Tuple[float, ...]], float]] = None
    primitive: bool = True
    factors: Tuple[Tuple[float, str], ...] = ()


@dataclass(frozen=True)
class ProcessWitness:
    from_state: Union[StateRef, CompoundState]
    to_state: Union[StateRef, CompoundState]
    note: str = ""


def _key_scale(t: float) -> float:
    return round(float(t), 12)


class ReactionNetwork:
    def __init__(self, n_elements: Optional[int] = None):
        self.n_elements = n_elements
        self.nodes: Dict[str, SpaceNode] = {}
        self.edges: Dict[Tuple[str, str], Union[float, List[ProcessWitness]]] = {}
        self.catalysts: List[str] = []
        self._cache: Dict = {}

    # construction -----------------------------------------------------
    def _touch(self):
        self._cache.clear()

    def add_node(self, id: str, composition: Sequence[float], entropy=None) -> SpaceNode:
        comp = tuple(float(c) for c in composition)
        if any(c < 0 for c in comp):
            raise DataError(f"node {id}: negative composition")
        if self.n_elements is None:
            self.n_elements = len(comp)
        elif len(comp) != self.n_elements:
            raise DataError(f"node {id}: composition has {len(comp)} entries, expected {self.n_elements}")
        if id in self.nodes:
            raise DataError(f"duplicate node {id}")
        node = SpaceNode(id, comp, entropy, True, ((1.0, id),))
        self.nodes[id] = node
        self._touch()
        return node

    def add_product(self, id: str, factors: Sequence[Tuple[float, str]]) -> SpaceNode:
        flat: Dict[str, float] = {}
        for t, fid in factors:
            if fid not in self.nodes:
                raise DataError(f"product {id}: unknown factor {fid}")
            if t <= 0:
                raise DataError(f"product {id}: scale must be positive")
            for s, base in self.nodes[fid].factors:
                flat[base] = flat.get(base, 0.0) + t * s
        comp = np.zeros(self.n_elements or 0)
        for base, t in flat.items():
            comp += t * np.array(self.nodes[base].composition)
        if id in self.nodes:
            raise DataError(f"duplicate node {id}")
        node = SpaceNode(id, tuple(float(c) for c in comp), None, False,
                         tuple(sorted((t, b) for b, t in flat.items())))
        self.nodes[id] = node
        self._touch()
        return node

    def add_edge(self, g: str, g_prime: str, D: Optional[float] = None,
                 witnesses: Optional[Sequence[ProcessWitness]] = None) -> None:
        for n in (g, g_prime):
            if n not in self.nodes:
                raise DataError(f"edge {g}->{g_prime}: unknown node {n}")
        if (D is None) == (witnesses is None):
            raise DataError(f"edge {g}->{g_prime}: give exactly one of D or witnesses")
        if witnesses is not None:
            for w in witnesses:
                self._check_member(g, w.from_state)
                self._check_member(g_prime, w.to_state)
            self.edges[(g, g_prime)] = list(witnesses)
        else:
            self.edges[(g, g_prime)] = float(D)
        self._touch()

    def set_catalysts(self, ids: Iterable[str]) -> None:
        ids = list(ids)
        for c in ids:
            if c not in self.nodes:
                raise DataError(f"unknown catalyst {c}")
        self.catalysts = ids
        self._touch()

    # lookups ----------------------------------------------------------
    def factor_key(self, id: str) -> Tuple[Tuple[str, float], ...]:
        return tuple(sorted((b, _key_scale(t)) for t, b in self.nodes[id].factors))

    def _key_index(self) -> Dict:
        if "keys" not in self._cache:
            self._cache["keys"] = {self.factor_key(i): i for i in sorted(self.nodes)}
        return self._cache["keys"]

    def find_product(self, items: Iterable[Tuple[float, str]]) -> Optional[str]:
        flat: Dict[str, float] = {}
        for t, fid in items:
            for s, base in self.nodes[fid].factors:
                flat[base] = flat.get(base, 0.0) + t * s
        key = tuple(sorted((b, _key_scale(t)) for b, t in flat.items()))
        return self._key_index().get(key)

    @property
    def elements(self) -> List[str]:
        out = []
        for i, n in sorted(self.nodes.items()):
            if n.primitive and sum(1 for c in n.composition if c != 0) == 1 and max(n.composition) == 1.0:
                out.append(i)
        return out

    def lambda_node(self, id: str) -> Optional[str]:
        """The product of element spaces with the same composition as ``id``."""
        by_index = {self.nodes[e].composition.index(1.0): e for e in self.elements}
        items = []
        for k, c in enumerate(self.nodes[id].composition):
            if c == 0:
                continue
            if k not in by_index:
                return None
            items.append((c, by_index[k]))
        return self.find_product(items)

    def expansion(self, id: str) -> Dict[str, float]:
        """B(id) as a linear combination of primitive constants."""
        out: Dict[str, float] = {}
        for t, base in self.nodes[id].factors:
            out[base] = out.get(base, 0.0) + t
        return out

    def _masses(self, state) -> Dict[str, float]:
        return {k: float(v) for k, v in as_compound(state).masses().items()}

    def node_of(self, state) -> Optional[str]:
        if isinstance(state, StateRef):
            return state.space if state.space in self.nodes else None
        return self.find_product((t, s) for s, t in self._masses(state).items()
                                 if s in self.nodes)

    def _check_member(self, id: str, state) -> None:
        node = self.nodes[id]
        want = {b: _key_scale(t) for t, b in node.factors}
        got = {s: _key_scale(t) for s, t in self._masses(state).items()}
        if node.primitive and isinstance(state, StateRef):
            got = {state.space: 1.0}
        if want != got:
            raise DataError(f"state {state} is not in space {id}")

    def state_entropy(self, id: str, state) -> float:
        self._check_member(id, state)
        total = 0.0
        for t, ref in as_compound(state):
            fn = self.nodes[ref.space].entropy
            if fn is None:
                raise DataError(f"space {ref.space} has no entropy function")
            total += float(t) * float(fn(ref.coords))
        return total

    def composition_of(self, id: str) -> np.ndarray:
        return np.array(self.nodes[id].composition)

    def scaled(self, t: float) -> "ReactionNetwork":
        """Every space replaced by its t-fold copy; D values scale by t."""
        out = ReactionNetwork(self.n_elements)
        for i, node in self.nodes.items():
            out.nodes[i] = SpaceNode(i, tuple(t * c for c in node.composition), None, node.primitive,
                                     tuple((t * s, b) for s, b in node.factors))
        for (a, b) in self.edges:
            out.edges[(a, b)] = t * compute_D(self, a, b)
        out.catalysts = list(self.catalysts)
        return out


# D, E, F --------------------------------------------------------------------

def compute_D(network: ReactionNetwork, g: str, g_prime: str) -> float:
    """Smallest entropy jump over the supplied witnesses, +inf without an edge."""
    edge = network.edges.get((g, g_prime))
    base = 0.0 if g == g_prime else INF
    if edge is None:
        return base
    if isinstance(edge, float):
        return min(base, edge)
    jumps = [network.state_entropy(g_prime, w.to_state) - network.state_entropy(g, w.from_state) for w in edge]
    return min([base] + jumps)


def d_table(network: ReactionNetwork) -> Dict[Tuple[str, str], float]:
    if "D" not in network._cache:
        network._cache["D"] = {k: compute_D(network, *k) for k in sorted(network.edges)}
    return network._cache["D"]


def _relaxes(du: float, w: float, dv: float) -> bool:
    if dv == INF:
        return True
    return du + w < dv - 1e-12 * max(1.0, abs(dv))


def _extract_cycle(pred: Dict[str, Tuple[str, float]], start: str, n: int) -> NegativeCycle:
    v = start
    for _ in range(n):
        v = pred[v][0]
    back, u = [v], pred[v][0]
    while u != v:
        back.append(u)
        u = pred[u][0]
    nodes = back[::-1]
    k = len(nodes)
    weights = [pred[nodes[(i + 1) % k]][1] for i in range(k)]
    return NegativeCycle(tuple(nodes), tuple(weights))


def bellman_ford(nodes: Sequence[str], edges: Sequence[Tuple[str, str, float]], source: str):
    """Distances from ``source`` and a negative cycle reachable from it, if any."""
    dist = {v: INF for v in nodes}
    pred: Dict[str, Tuple[str, float]] = {}
    dist[source] = 0.0
    for _ in range(len(nodes) - 1):
        changed = False
        for u, v, w in edges:
            if dist[u] < INF and _relaxes(dist[u], w, dist[v]):
                dist[v] = dist[u] + w
                pred[v] = (u, w)
                changed = True
        if not changed:
            return dist, None
    for u, v, w in edges:
        if dist[u] < INF and _relaxes(dist[u], w, dist[v]):
            pred[v] = (u, w)
            return dist, _extract_cycle(pred, v, len(nodes))
    return dist, None


def _reachable(edges, starts) -> set:
    adj: Dict[str, List[str]] = {}
    for u, v, _ in edges:
        adj.setdefault(u, []).append(v)
    seen, stack = set(starts), list(starts)
    while stack:
        u = stack.pop()
        for v in adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def _e_from(network: ReactionNetwork, g: str):
    cache = network._cache.setdefault("E", {})
    if g not in cache:
        edges = [(a, b, w) for (a, b), w in d_table(network).items() if a != b and w < INF]
        dist, cycle = bellman_ford(sorted(network.nodes), edges, g)
        tainted = _reachable(edges, cycle.nodes) if cycle else set()
        cache[g] = (dist, cycle, tainted)
    return cache[g]


def compute_E(network: ReactionNetwork, g: str, g_prime: str) -> float:
    """Cheapest chain of D values from g to g_prime (over the configured network)."""
    dist, cycle, tainted = _e_from(network, g)
    if g_prime in tainted:
        raise NegativeCycleError(cycle)
    return dist[g_prime]


def compute_F(network: ReactionNetwork, g: str, g_prime: str) -> float:
    """E minimized over the configured catalysts, the empty one included."""
    best = compute_E(network, g, g_prime)
    for c in network.catalysts:
        a = network.find_product([(1.0, g), (1.0, c)])
        b = network.find_product([(1.0, g_prime), (1.0, c)])
        if a is not None and b is not None:
            best = min(best, compute_E(network, a, b))
    return best


def f_table(network: ReactionNetwork, ids: Optional[Sequence[str]] = None) -> Dict[Tuple[str, str], float]:
    ids = sorted(network.nodes) if ids is None else list(ids)
    return {(a, b): compute_F(network, a, b) for a in ids for b in ids}


def _close(a: float, b: float, tol: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def check_F_properties(network: ReactionNetwork, sample_pairs: Sequence[Tuple[str, str]],
                       table: Optional[Mapping[Tuple[str, str], float]] = None,
                       scale: float = 2.0, tol: float = 1e-12) -> Report:
    """Fa-Fe and -F(G',G) <= F(G,G') on the nodes touched by ``sample_pairs``.

    ``table`` overrides computed F values where it has an entry, which is
    how a hand-planted inconsistent table is audited.
    """
    override = dict(table or {})

    def F(a, b):
        if (a, b) in override:
            return override[(a, b)]
        return compute_F(network, a, b)

    ids = sorted({n for p in sample_pairs for n in p})
    report = Report()

    fa = Tally("Fa")
    for a in ids:
        v = F(a, a)
        if v == 0:
            fa.ok()
        else:
            fa.fail(f"F({a},{a})={v!r}")
    fa.into(report)

    fb = Tally("Fb")
    scaled = network.scaled(scale)
    for a, b in sample_pairs:
        lhs, rhs = compute_F(scaled, a, b), scale * F(a, b)
        if _close(lhs, rhs, tol):
            fb.ok()
        else:
            fb.fail(f"t={scale} ; F(t{a},t{b})={lhs!r} ; t*F={rhs!r}")
    fb.into(report)

    fc = Tally("Fc")
    for (a1, b1) in sample_pairs:
        for (a2, b2) in sample_pairs:
            pa = network.find_product([(1.0, a1), (1.0, a2)])
            pb = network.find_product([(1.0, b1), (1.0, b2)])
            if pa is None or pb is None:
                continue
            lhs, rhs = F(pa, pb), F(a1, b1) + F(a2, b2)
            if rhs == INF or lhs <= rhs + tol * max(1.0, abs(rhs)):
                fc.ok()
            else:
                fc.fail(f"F({pa},{pb})={lhs!r} > {rhs!r}")
    fc.into(report, "" if fc.checked else "no product nodes for sampled pairs")

    fd = Tally("Fd")
    for a, b in sample_pairs:
        for c in network.catalysts:
            pa = network.find_product([(1.0, a), (1.0, c)])
            pb = network.find_product([(1.0, b), (1.0, c)])
            if pa is None or pb is None:
                continue
            if _close(F(pa, pb), F(a, b), 1e-9):
                fd.ok()
            else:
                fd.fail(f"catalyst {c} ; F({pa},{pb})={F(pa, pb)!r} ; F({a},{b})={F(a, b)!r}")
    fd.into(report, "" if fd.checked else "no catalyst products for sampled pairs")

    fe = Tally("Fe")
    for a in ids:
        for b in ids:
            for c in ids:
                lhs, rhs = F(a, c), F(a, b) + F(b, c)
                if rhs == INF or lhs <= rhs + tol * max(1.0, abs(rhs)):
                    fe.ok()
                else:
                    fe.fail(f"{a} ; {b} ; {c} ; F={lhs!r} > {rhs!r}")
    fe.into(report)

    f29 = Tally("F29")
    for a in ids:
        for b in ids:
            lo, hi = -F(b, a), F(a, b)
            if lo <= hi + tol * max(1.0, abs(hi) if hi < INF else 1.0):
                f29.ok()
            else:
                f29.fail(f"-F({b},{a})={lo!r} > F({a},{b})={hi!r}")
    f29.into(report)
    return report


class InducedOracle:
    """Cross-space order from entropies plus constants: X < Y iff S(X)+B <= S(Y)+B'."""

    backend = "InducedEntropy"

    def __init__(self, network: ReactionNetwork, constants: Mapping[str, float], tolerance: float = 1e-12):
        self.network = network
        self.constants = dict(constants)
        self.tolerance = tolerance

    def constant(self, id: str) -> float:
        return sum(t * self.constants.get(b, 0.0) for b, t in self.network.expansion(id).items())

    def total(self, state) -> Tuple[str, float]:
        id = self.network.node_of(state)
        if id is None:
            raise DataError(f"{state} lies in no configured space")
        return id, self.network.state_entropy(id, state) + self.constant(id)

    def compare(self, a, b) -> Comparability:
        ia, sa = self.total(a)
        ib, sb = self.total(b)
        if not np.allclose(self.network.composition_of(ia), self.network.composition_of(ib)):
            return N
        return P if sa <= sb + self.tolerance else N


def check_theorem6(network: ReactionNetwork, g: str, g_prime: str, sample_states, oracle,
                   tol: float = 1e-9) -> Report:
    """X < Y iff S(X) + F(G, G') <= S'(Y) on sampled cross-space pairs.

    Pairs within ``tol`` of the boundary are counted separately and left
    out of the verdict.
    """
    f = compute_F(network, g, g_prime)
    t = Tally("theorem6")
    boundary = 0
    for x, y in sample_states:
        sx, sy = network.state_entropy(g, x), network.state_entropy(g_prime, y)
        gap = sy - sx - f
        if f < INF and abs(gap) <= tol:
            boundary += 1
            continue
        predicted = f < INF and gap >= 0
        v = oracle.compare(x, y)
        if (v is P) == predicted:
            t.ok()
        else:
            t.fail(f"{x} ; {y} ; S'(Y)-S(X)-F={gap!r} ; oracle={v.value}")
    report = Report()
    t.into(report, f"{t.checked} strict, {boundary} equivalent within tolerance; F over configured network")
    return report


# B solve ---------------------------------------------------------------------

@dataclass
class CalibrationSolution:
    B: Dict[str, float]
    intervals: Dict[str, Tuple[float, float]]
    gaps: Dict[Tuple[str, str], Tuple[float, float]]
    status: str
    certificate: Optional[NegativeCycle] = None
    free: List[str] = field(default_factory=list)
    method: str = "shortest-path"

    def value(self, network: ReactionNetwork, id: str) -> float:
        return sum(t * self.B[b] for b, t in network.expansion(id).items())


ZERO = "<zero>"


def _constraints(network: ReactionNetwork, F: Mapping[Tuple[str, str], float], pinned: set):
    """(coefficients, bound, pair) for B(a) - B(b) <= F(a, b)."""
    out = []
    for (a, b), f in sorted(F.items()):
        if a == b or f == INF:
            continue
        coef: Dict[str, float] = {}
        for k, t in network.expansion(a).items():
            coef[k] = coef.get(k, 0.0) + t
        for k, t in network.expansion(b).items():
            coef[k] = coef.get(k, 0.0) - t
        coef = {k: v for k, v in coef.items() if k not in pinned and abs(v) > 1e-14}
        out.append((coef, f, (a, b)))
    return out


def _as_difference(coef: Dict[str, float], f: float):
    """Edge (u, v, w) meaning x_v - x_u <= w, or None if not a difference constraint."""
    if len(coef) == 1:
        (k, c), = coef.items()
        return (ZERO, k, f / c) if c > 0 else (k, ZERO, f / -c)
    if len(coef) == 2:
        (k1, c1), (k2, c2) = sorted(coef.items(), key=lambda kv: -kv[1])
        if c1 > 0 and abs(c1 + c2) <= 1e-12 * c1:
            return (k2, k1, f / c1)
    return None


def _diff_solve(variables: List[str], edges: List[Tuple[str, str, float]]):
    """Bounds and midpoints for a difference-constraint system, pinning free variables."""
    edges = list(edges)
    nodes = [ZERO] + variables
    free = []
    while True:
        # every node reachable from a virtual source: detects any negative cycle
        src = "<source>"
        _, cycle = bellman_ford(nodes + [src], edges + [(src, v, 0.0) for v in nodes], src)
        if cycle is not None:
            return None, None, free, cycle
        up, _ = bellman_ford(nodes, edges, ZERO)
        down, _ = bellman_ford(nodes, [(v, u, w) for u, v, w in edges], ZERO)
        lo = {v: -down[v] + 0.0 for v in variables}
        hi = {v: up[v] for v in variables}
        loose = [v for v in variables if lo[v] == -INF or hi[v] == INF]
        if not loose:
            return lo, hi, free, None
        v = loose[0]
        anchor = hi[v] if hi[v] < INF else (lo[v] if lo[v] > -INF else 0.0)
        edges += [(ZERO, v, anchor), (v, ZERO, -anchor)]
        free.append(v)


def _lp_solve(variables: List[str], cons):
    idx = {v: i for i, v in enumerate(variables)}
    n = len(variables)
    A = np.zeros((len(cons), n))
    b = np.zeros(len(cons))
    for r, (coef, f, _) in enumerate(cons):
        for k, c in coef.items():
            A[r, idx[k]] = c
        b[r] = f
    bounds = [(None, None)] * n
    free = []
    while True:
        lo, hi, extremes = {}, {}, []
        loose = None
        for v in variables:
            c = np.zeros(n)
            c[idx[v]] = 1.0
            res_lo = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
            res_hi = linprog(-c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
            if res_lo.status == 2:
                return None, None, None, free
            if res_lo.status == 3 or res_hi.status == 3:
                lo_v = res_lo.fun if res_lo.status == 0 else -INF
                hi_v = -res_hi.fun if res_hi.status == 0 else INF
                loose = (v, lo_v, hi_v)
                break
            lo[v], hi[v] = res_lo.fun, -res_hi.fun
            extremes += [res_lo.x, res_hi.x]
        if loose is None:
            break
        v, lo_v, hi_v = loose
        anchor = hi_v if hi_v < INF else (lo_v if lo_v > -INF else 0.0)
        bounds[idx[v]] = (anchor, anchor)
        free.append(v)
    mid = np.array([0.5 * (lo[v] + hi[v]) for v in variables])
    if n and np.all(A @ mid <= b + 1e-9 * np.maximum(1.0, np.abs(b))):
        x = mid
    else:
        x = np.mean(extremes, axis=0) if extremes else mid
    return lo, hi, dict(zip(variables, map(float, x))), free


def solve_constants(network: ReactionNetwork, F: Optional[Mapping[Tuple[str, str], float]] = None
                    ) -> CalibrationSolution:
    """Constants B with -F(G',G) <= B(G) - B(G') <= F(G, G'), element spaces pinned to 0.

    Difference-form systems are solved by shortest paths; each constant is
    the midpoint of its feasible interval. Products of non-element spaces
    make the system general linear; it is then solved by linear programming.
    """
    pinned = set(network.elements)
    variables = sorted(i for i, n in network.nodes.items() if n.primitive and i not in pinned)
    if F is None:
        try:
            F = f_table(network)
        except NegativeCycleError as err:
            return CalibrationSolution({}, {}, {}, "Infeasible", err.certificate)
    gaps = {}
    for (a, b), f in sorted(F.items()):
        if a < b and (f < INF or F.get((b, a), INF) < INF):
            gaps[(a, b)] = (-F.get((b, a), INF), f)
    cons = _constraints(network, F, pinned)
    for coef, f, (a, b) in cons:
        if not coef and f < -1e-12:
            cert = NegativeCycle((a, b), (f, F.get((b, a), 0.0)))
            return CalibrationSolution({}, {}, gaps, "Infeasible", cert)
    cons = [c for c in cons if c[0]]
    diff = [_as_difference(coef, f) for coef, f, _ in cons]
    B = {e: 0.0 for e in pinned}
    if all(d is not None for d in diff):
        lo, hi, free, cycle = _diff_solve(variables, diff)
        if cycle is not None:
            return CalibrationSolution({}, {}, gaps, "Infeasible", cycle)
        for v in variables:
            if lo[v] > hi[v]:
                # saturated pair: bounds cross by rounding only
                lo[v] = hi[v] = 0.5 * (lo[v] + hi[v])
            B[v] = 0.5 * (lo[v] + hi[v])
        method = "shortest-path"
    else:
        lo, hi, x, free = _lp_solve(variables, cons)
        if lo is None:
            return CalibrationSolution({}, {}, gaps, "Infeasible", None, free, "linear-program")
        B.update(x)
        method = "linear-program"
    intervals = {e: (0.0, 0.0) for e in pinned}
    intervals.update({v: (lo[v], hi[v]) for v in variables})
    status = "Unbounded-degrees-of-freedom" if free else "Feasible"
    return CalibrationSolution(B, intervals, gaps, status, None, free, method)


def lambda_formula(network: ReactionNetwork, id: str) -> float:
    """B(G) = F(G, L(G)), valid when the constraints around G are saturated."""
    lam = network.lambda_node(id)
    if lam is None:
        raise DataError(f"no element product configured for {id}")
    return compute_F(network, id, lam)


def _with_energy(state, u: float):
    """Copy of ``state`` whose first part has energy coordinate ``u``."""
    c = as_compound(state)
    (t, ref), rest = c.parts[0], c.parts[1:]
    moved = StateRef(ref.space, (u,) + tuple(ref.coords[1:]))
    if isinstance(state, StateRef):
        return moved
    return CompoundState(((t, moved),) + tuple(rest))


def matching_state(network: ReactionNetwork, id: str, template, target: float):
    """A state of ``id`` with entropy ``target``, moving the first energy of ``template``.

    The root is bracketed by doubling/halving the energy, so the first
    factor's entropy must be increasing in U and unbounded both ways
    (as for ideal gases).
    """
    u0 = float(as_compound(template).parts[0][1].coords[0])

    def g(u):
        return network.state_entropy(id, _with_energy(template, u)) - target

    lo, hi = u0, u0
    for _ in range(400):
        if g(lo) <= 0:
            break
        lo *= 0.5
    for _ in range(400):
        if g(hi) >= 0:
            break
        hi *= 2.0
    if g(lo) > 0 or g(hi) < 0:
        raise RangeError(f"entropy {target} not reachable in {id}")
    return _with_energy(template, brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500))


def induced_witnesses(network: ReactionNetwork, g: str, g_prime: str, constants: Mapping[str, float],
                      sources: Sequence, template, jumps: Sequence[float] = (0.0, 0.5)) -> List[ProcessWitness]:
    """Witnesses X < Y with S'(Y) + B' = S(X) + B + jump, for each source X and jump >= 0."""
    oracle = InducedOracle(network, constants)
    out = []
    for x in sources:
        _, total = oracle.total(x)
        for jump in jumps:
            if jump < 0:
                raise ValueError("jumps must be nonnegative")
            y = matching_state(network, g_prime, template, total + jump - oracle.constant(g_prime))
            out.append(ProcessWitness(x, y, "reversible" if jump == 0 else f"jump {jump:g}"))
    return out


# calibrators ----------------------------------------------------------------

@dataclass(frozen=True)
class Calibrators:
    x0: StatePoint
    x1: StatePoint
    y0: StatePoint
    y1: StatePoint
    degenerate: bool = False

    def __iter__(self):
        return iter((self.x0, self.x1, self.y0, self.y1))


def _base_point(model: SimpleSystemModel) -> StatePoint:
    for f in (0.1, 0.25, 0.5, 0.05, 0.75):
        u = model.u_bounds[0] + f * (model.u_bounds[1] - model.u_bounds[0])
        v = tuple(lo + 0.25 * (hi - lo) for lo, hi in model.v_bounds)
        p = StatePoint(u, v)
        if model.contains(p):
            return p
    raise RangeError(f"{model.name}: no interior base point found")


def _ray_partner(model: SimpleSystemModel, x0: StatePoint, delta: float, tol: float) -> StatePoint:
    s0 = model.entropy(x0)
    m = model.margins[0]
    end = model.u_bounds[1] - m if delta > 0 else model.u_bounds[0] + m
    # keep inside region predicates by pulling the far end back
    while not model.contains(StatePoint(end, x0.V)) and abs(end - x0.U) > 1e-12:
        end = x0.U + 0.5 * (end - x0.U)

    def g(u):
        return model.entropy(StatePoint(u, x0.V)) - s0 - delta

    if g(end) * (1 if delta > 0 else -1) < 0:
        raise RangeError(f"{model.name}: entropy change {delta} not reachable along the energy ray")
    u = brentq(g, x0.U, end, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
    return StatePoint(u, x0.V)


def find_calibrators(model1: SimpleSystemModel, model2: SimpleSystemModel, target_delta: float,
                     tol: float = 1e-10, x0: Optional[StatePoint] = None,
                     y0: Optional[StatePoint] = None) -> Calibrators:
    """States with S1(X1)-S1(X0) = S2(Y1)-S2(Y0) = target_delta, by root search in U."""
    x0 = x0 or _base_point(model1)
    y0 = y0 or _base_point(model2)
    model1.require(x0)
    model2.require(y0)
    if target_delta == 0:
        return Calibrators(x0, x0, y0, y0, True)
    x1 = _ray_partner(model1, x0, target_delta, tol)
    y1 = _ray_partner(model2, y0, target_delta, tol)
    return Calibrators(x0, x1, y0, y1, False)
