"""Simple systems: energy plus work coordinates, adiabats and temperature."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .oracles import AnalyticEntropy, P, N, U
from .report import Report, Tally, Verdict
from .states import Comparability, CompoundState, DomainError, StateRef, as_compound

DEFAULT_SUBDIVISIONS = 1024
REFINE_TOL = 1e-8
MAX_SUBDIVISIONS = 1 << 18
BOUNDARY_FRACTION = 1e-6


class ModelError(RuntimeError):
    """The pressure or entropy function misbehaved."""


class OrientationError(ValueError):
    """Temperature came out non-positive."""


@dataclass(frozen=True)
class StatePoint:
    U: float
    V: Tuple[float, ...]

    def __post_init__(self) -> None:
        v = self.V
        if isinstance(v, (int, float)):
            v = (float(v),)
        object.__setattr__(self, "U", float(self.U))
        object.__setattr__(self, "V", tuple(float(c) for c in v))

    def scaled(self, t: float) -> "StatePoint":
        return StatePoint(t * self.U, tuple(t * c for c in self.V))

    @property
    def coords(self) -> Tuple[float, ...]:
        return (self.U,) + self.V


@dataclass(frozen=True)
class SimpleSystemModel:
    """A convex box of (U, V) states with a pressure field.

    ``pressure(U, V)`` returns the n generalized pressures at a state with
    ``V`` a tuple of floats. ``analytic_entropy(U, V)`` is optional.
    """

    name: str
    n: int
    u_bounds: Tuple[float, float]
    v_bounds: Tuple[Tuple[float, float], ...]
    pressure: Callable
    analytic_entropy: Optional[Callable] = None
    amount: float = 1.0
    lipschitz_hint: float = 1.0
    region: Optional[Callable] = None
    kind: str = "custom"
    params: Dict = field(default_factory=dict, compare=False)

    def __hash__(self) -> int:
        return hash((self.name, self.kind, self.amount, self.u_bounds, self.v_bounds))

    @property
    def margins(self) -> Tuple[float, ...]:
        spans = [self.u_bounds[1] - self.u_bounds[0]] + [hi - lo for lo, hi in self.v_bounds]
        return tuple(BOUNDARY_FRACTION * s for s in spans)

    def contains(self, x: StatePoint) -> bool:
        if len(x.V) != self.n:
            return False
        m = self.margins
        lo, hi = self.u_bounds
        if not (lo + m[0] <= x.U <= hi - m[0]):
            return False
        for c, (vlo, vhi), mv in zip(x.V, self.v_bounds, m[1:]):
            if not (vlo + mv <= c <= vhi - mv):
                return False
        return self.region is None or bool(self.region(x.U, x.V))

    def require(self, x: StatePoint) -> None:
        if not self.contains(x):
            raise DomainError(f"{x} is not inside the domain of {self.name}")

    def entropy(self, x: StatePoint) -> float:
        if self.analytic_entropy is None:
            raise ModelError(f"{self.name} has no analytic entropy")
        return float(self.analytic_entropy(x.U, x.V))

    def state_ref(self, x: StatePoint) -> StateRef:
        return StateRef(self.name, x.coords)

    def point(self, ref: StateRef) -> StatePoint:
        return StatePoint(ref.coords[0], tuple(ref.coords[1:]))

    def scaled(self, t: float, name: Optional[str] = None) -> "SimpleSystemModel":
        """The scaled copy: states (tU, tV), intensive pressure, extensive entropy."""
        if t <= 0:
            raise DomainError("scale must be positive")
        p0, s0, r0 = self.pressure, self.analytic_entropy, self.region

        def pressure(u, v):
            return p0(u / t, tuple(c / t for c in v))

        entropy = None
        if s0 is not None:
            def entropy(u, v):
                return t * s0(u / t, tuple(c / t for c in v))

        region = None
        if r0 is not None:
            def region(u, v):
                return r0(u / t, tuple(c / t for c in v))

        return replace(self, name=name or f"{t:g}*{self.name}", pressure=pressure, analytic_entropy=entropy,
                       region=region, amount=t * self.amount,
                       u_bounds=(t * self.u_bounds[0], t * self.u_bounds[1]),
                       v_bounds=tuple((t * lo, t * hi) for lo, hi in self.v_bounds))


def ideal_gas(name: str = "gas", amount: float = 1.0, u_bounds=(1e-3, 1e3),
              v_bounds=((1e-3, 1e3),)) -> SimpleSystemModel:
    """Monatomic ideal gas: P = 2U/(3V), S = amount*(3/2 ln(U/amount) + ln(V/amount))."""

    def pressure(u, v):
        return (2.0 * u / (3.0 * v[0]),)

    def entropy(u, v):
        return amount * (1.5 * math.log(u / amount) + math.log(v[0] / amount))

    return SimpleSystemModel(name, 1, tuple(u_bounds), tuple(map(tuple, v_bounds)), pressure, entropy,
                             amount=amount, kind="ideal-gas")


def van_der_waals(name: str = "vdw", amount: float = 1.0, u_bounds=(-5.0, 50.0),
                  v_bounds=((0.4, 50.0),), cv: float = 4.0) -> SimpleSystemModel:
    """Van der Waals fluid in reduced units.

    Per unit amount: ``P = 8T/(3v-1) - 3/v**2`` with caloric equation
    ``u = cv*T - 3/v``, so ``T = (u + 3/v)/cv`` and
    ``s = cv*ln T + (8/3) ln(v - 1/3)``. Below the critical temperature the
    entropy is not concave near the spinodal region.
    """

    def temp(u, v):
        return (u + 3.0 / v) / cv

    def pressure(u, v):
        vv = v[0] / amount
        t = temp(u / amount, vv)
        return (8.0 * t / (3.0 * vv - 1.0) - 3.0 / vv ** 2,)

    def entropy(u, v):
        vv = v[0] / amount
        t = temp(u / amount, vv)
        if t <= 0 or vv <= 1.0 / 3.0:
            raise DomainError("van der Waals state outside T > 0, v > 1/3")
        return amount * (cv * math.log(t) + (8.0 / 3.0) * math.log(vv - 1.0 / 3.0))

    def region(u, v):
        vv = v[0] / amount
        return vv > 1.0 / 3.0 and temp(u / amount, vv) > 0

    return SimpleSystemModel(name, 1, tuple(u_bounds), tuple(map(tuple, v_bounds)), pressure, entropy,
                             amount=amount, region=region, kind="van-der-waals", params={"cv": cv})


def table_model(name: str, u_grid: Sequence[float], v_grid: Sequence[float], p_table, amount: float = 1.0):
    """A one-coordinate model whose pressure is bilinear in a (U, V) table."""
    from scipy.interpolate import RegularGridInterpolator

    interp = RegularGridInterpolator((np.asarray(u_grid, float), np.asarray(v_grid, float)),
                                     np.asarray(p_table, float))

    def pressure(u, v):
        return (float(interp([[u, v[0]]])[0]),)

    return SimpleSystemModel(name, 1, (float(u_grid[0]), float(u_grid[-1])),
                             ((float(v_grid[0]), float(v_grid[-1])),), pressure, None, amount=amount,
                             kind="custom-table")


# ---------------------------------------------------------------- adiabats

@dataclass(frozen=True)
class AdiabatCurve:
    seed: StatePoint
    samples: Tuple[Tuple[Tuple[float, ...], float], ...]
    step: float

    @property
    def final_u(self) -> float:
        return self.samples[-1][1]

    @property
    def final_v(self) -> Tuple[float, ...]:
        return self.samples[-1][0]


def _rk4_segment(model: SimpleSystemModel, u0: float, v0: np.ndarray, dv: np.ndarray, steps: int,
                 keep: bool):
    """Integrate du/ds = -P(u, v0 + s dv) . dv over s in [0, 1]."""
    h = 1.0 / steps
    p = model.pressure
    lo, hi = model.u_bounds
    dvt = tuple(float(c) for c in dv)
    v0t = tuple(float(c) for c in v0)
    n = len(dvt)

    def rhs(u, s):
        vs = tuple(v0t[j] + s * dvt[j] for j in range(n))
        pr = p(u, vs)
        acc = 0.0
        for j in range(n):
            acc -= pr[j] * dvt[j]
        if not math.isfinite(acc):
            raise ModelError(f"pressure not finite at U={u}, V={vs}")
        return acc

    u = u0
    out = [(v0t, u0)] if keep else None
    for k in range(steps):
        s = k * h
        k1 = rhs(u, s)
        k2 = rhs(u + 0.5 * h * k1, s + 0.5 * h)
        k3 = rhs(u + 0.5 * h * k2, s + 0.5 * h)
        k4 = rhs(u + h * k3, s + h)
        u = u + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not (lo < u < hi):
            raise DomainError(f"adiabat left the energy range of {model.name} at U={u}")
        if keep:
            out.append((tuple(v0t[j] + (s + h) * dvt[j] for j in range(n)), u))
    return u, out


def _check_segment(model: SimpleSystemModel, v_from, v_to) -> None:
    m = model.margins[1:]
    for c, (lo, hi), mv in zip(v_to, model.v_bounds, m):
        if not (lo + mv <= c <= hi - mv):
            raise DomainError(f"target V={tuple(v_to)} outside the domain of {model.name}")


def integrate_adiabat(model: SimpleSystemModel, x: StatePoint, v_target, subdivisions: int = DEFAULT_SUBDIVISIONS,
                      tol: float = REFINE_TOL, keep_samples: bool = True) -> AdiabatCurve:
    """The adiabat through ``x`` followed along the straight segment to ``v_target``.

    Classical RK4 with ``subdivisions`` steps, doubled until two successive
    runs agree on the endpoint energy within ``tol`` (relative above 1).
    """
    model.require(x)
    vt = (float(v_target),) if np.isscalar(v_target) else tuple(float(c) for c in v_target)
    if len(vt) != model.n:
        raise DomainError(f"expected {model.n} work coordinates, got {len(vt)}")
    v0 = np.array(x.V, float)
    dv = np.array(vt, float) - v0
    length = float(np.linalg.norm(dv))
    if length == 0.0:
        return AdiabatCurve(x, ((x.V, x.U),), 0.0)
    _check_segment(model, x.V, vt)
    steps = subdivisions
    u_prev, samples = _rk4_segment(model, x.U, v0, dv, steps, keep_samples)
    while True:
        if steps * 2 > MAX_SUBDIVISIONS:
            raise ModelError(f"adiabat refinement did not settle below {MAX_SUBDIVISIONS} steps")
        steps *= 2
        u_next, samples = _rk4_segment(model, x.U, v0, dv, steps, keep_samples)
        if abs(u_next - u_prev) <= tol * max(1.0, abs(u_next)):
            break
        u_prev = u_next
    if keep_samples:
        _verify_region(model, samples)
    else:
        samples = [(vt, u_next)]
    return AdiabatCurve(x, tuple(samples), length / steps)


def _verify_region(model: SimpleSystemModel, samples) -> None:
    if model.region is None:
        return
    for v, u in samples[:: max(1, len(samples) // 64)]:
        if not model.region(u, v):
            raise DomainError(f"adiabat left the region of {model.name} at U={u}, V={v}")


def integrate_adiabat_path(model: SimpleSystemModel, x: StatePoint, waypoints: Sequence,
                           **kw) -> AdiabatCurve:
    """Chain straight segments through ``waypoints`` (the last one is the target)."""
    cur = x
    samples: List = [(x.V, x.U)]
    step = 0.0
    for w in waypoints:
        seg = integrate_adiabat(model, cur, w, **kw)
        samples.extend(seg.samples[1:])
        step = max(step, seg.step)
        cur = StatePoint(seg.final_u, seg.final_v)
    return AdiabatCurve(x, tuple(samples), step)


@lru_cache(maxsize=65536)
def _adiabat_energy(model: SimpleSystemModel, x: StatePoint, v_target: Tuple[float, ...]) -> float:
    return integrate_adiabat(model, x, v_target, keep_samples=False).final_u


def adiabat_energy(model: SimpleSystemModel, x: StatePoint, v_target) -> float:
    """u_x(V): energy on the adiabat of ``x`` at ``v_target`` (cached)."""
    vt = (float(v_target),) if np.isscalar(v_target) else tuple(float(c) for c in v_target)
    return _adiabat_energy(model, x, vt)


class Sector(enum.Enum):
    PRECEDES = "Precedes"
    EQUIVALENT = "Equivalent"
    SUCCEEDS = "Succeeds"


def sector_tolerance(u: float) -> float:
    return max(1e-9, 1e-6 * abs(u))


def forward_sector_contains(model: SimpleSystemModel, x: StatePoint, y: StatePoint) -> Sector:
    """Where ``y`` sits relative to the adiabat through ``x``.

    Above the adiabat (more energy at the same V) means ``x << y``.
    """
    model.require(y)
    u = adiabat_energy(model, x, y.V)
    d = y.U - u
    if abs(d) <= sector_tolerance(y.U):
        return Sector.EQUIVALENT
    return Sector.PRECEDES if d > 0 else Sector.SUCCEEDS


@dataclass(frozen=True)
class ModelOracle:
    """Geometric answers for single states, entropy sums for compounds."""

    model: SimpleSystemModel
    tolerance: float = 1e-12
    backend: str = "GeometricAdiabat"

    def _single(self, c: CompoundState):
        if len(c) == 1:
            t, s = c.parts[0]
            if s.space == self.model.name:
                return t, self.model.point(s)
        return None

    def compare(self, a, b) -> Comparability:
        a, b = as_compound(a), as_compound(b)
        sa, sb = self._single(a), self._single(b)
        if sa and sb and abs(float(sa[0]) - float(sb[0])) <= 1e-15 * float(sa[0]):
            verdict = forward_sector_contains(self.model, sa[1], sb[1])
            return N if verdict is Sector.SUCCEEDS else P
        if self.model.analytic_entropy is None:
            return U
        return self.analytic().compare(a, b)

    def analytic(self) -> AnalyticEntropy:
        s = self.model.analytic_entropy
        return AnalyticEntropy({self.model.name: lambda u, *v: s(u, tuple(v))}, self.tolerance)


def oracle_from_model(model: SimpleSystemModel) -> ModelOracle:
    return ModelOracle(model)


# ---------------------------------------------------------------- temperature

@dataclass(frozen=True)
class TemperatureBracket:
    t_minus: float
    t_plus: float


def _entropy_callable(model: SimpleSystemModel, entropy: Optional[Callable]) -> Callable:
    if entropy is not None:
        return entropy
    if model.analytic_entropy is None:
        raise ModelError(f"{model.name} has no entropy; pass one explicitly")
    return model.analytic_entropy


def _fit_step(model: SimpleSystemModel, x: StatePoint, h: float, coord: int) -> Tuple[float, bool]:
    """Largest step <= h keeping both stencil points inside; flags shrinkage."""
    shrunk = False
    for _ in range(60):
        lo = _shift(x, coord, -h)
        hi = _shift(x, coord, h)
        if model.contains(lo) and model.contains(hi):
            return h, shrunk
        h *= 0.5
        shrunk = True
    raise DomainError(f"no finite-difference stencil fits around {x}")


def _shift(x: StatePoint, coord: int, d: float) -> StatePoint:
    if coord == 0:
        return StatePoint(x.U + d, x.V)
    v = list(x.V)
    v[coord - 1] += d
    return StatePoint(x.U, tuple(v))


def default_step(x: StatePoint) -> float:
    return 1e-5 * max(1.0, abs(x.U))


def temperature(model: SimpleSystemModel, entropy: Optional[Callable], x: StatePoint,
                h: Optional[float] = None, tol: float = 1e-6) -> Tuple[float, TemperatureBracket]:
    """T = 1/(dS/dU) at fixed V by central difference, with one-sided bracket."""
    s = _entropy_callable(model, entropy)
    model.require(x)
    h, _ = _fit_step(model, x, h or default_step(x), 0)
    s0 = s(x.U, x.V)
    sp = s(x.U + h, x.V)
    sm = s(x.U - h, x.V)
    central = (sp - sm) / (2 * h)
    if not central > 0:
        raise OrientationError(f"dS/dU = {central:.6g} <= 0 at {x}")
    back, fwd = (s0 - sm) / h, (sp - s0) / h
    if back <= 0 or fwd <= 0:
        raise OrientationError(f"one-sided dS/dU not positive at {x}")
    t_lo, t_hi = sorted((1.0 / back, 1.0 / fwd))
    T = 1.0 / central
    if not t_lo <= t_hi + tol * T:
        raise OrientationError("temperature bracket inverted")
    return T, TemperatureBracket(t_lo, t_hi)


def check_concavity(entropy: Optional[Callable], model: SimpleSystemModel, sample_secants,
                    lambdas=(0.25, 0.5, 0.75), tol: float = 1e-10) -> Report:
    s = _entropy_callable(model, entropy)
    t = Tally("concavity")
    for a, b in sample_secants:
        sa, sb = s(a.U, a.V), s(b.U, b.V)
        for lam in lambdas:
            mid = StatePoint((1 - lam) * a.U + lam * b.U,
                             tuple((1 - lam) * p + lam * q for p, q in zip(a.V, b.V)))
            gap = (1 - lam) * sa + lam * sb - s(mid.U, mid.V)
            if gap <= tol:
                t.ok()
            else:
                t.fail(f"{a} ; {b} ; lambda={lam} ; gap={gap:.3e}")
    report = Report()
    t.into(report)
    return report


def check_pressure_entropy_identity(model: SimpleSystemModel, entropy: Optional[Callable], sample,
                                    rtol: float = 1e-4) -> Report:
    """dS/dV_j = P_j/T by central differences; shrunken stencils get 10x tolerance."""
    s = _entropy_callable(model, entropy)
    t = Tally("pressure_identity")
    shrunk_count = 0
    for x in sample:
        T, _ = temperature(model, s, x)
        pr = model.pressure(x.U, x.V)
        for j in range(model.n):
            h, shrunk = _fit_step(model, x, 1e-5 * max(1.0, abs(x.V[j])), j + 1)
            shrunk_count += shrunk
            lo, hi = _shift(x, j + 1, -h), _shift(x, j + 1, h)
            dsdv = (s(hi.U, hi.V) - s(lo.U, lo.V)) / (2 * h)
            want = pr[j] / T
            allowed = (10 if shrunk else 1) * rtol * max(abs(want), 1e-12)
            if abs(dsdv - want) <= allowed:
                t.ok()
            else:
                t.fail(f"{x} ; j={j} ; dS/dV={dsdv:.10g} ; P/T={want:.10g}")
    report = Report()
    t.into(report, f"{shrunk_count} shrunken stencil(s)" if shrunk_count else "")
    return report
