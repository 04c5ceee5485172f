"""Command-line front end.

Exit codes: 0 when every check passes, 1 on a failed check or a module
error, 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from collections import Counter
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .axioms import check_axioms, check_cancellation, check_CH
from .calibration import (NegativeCycleError, check_F_properties, compute_D, compute_E, compute_F,
                          solve_constants)
from .config import ConfigError, load_network, load_systems, parse_toml
from .entropy import AffineFit, FitError, affine_fit, construct_entropy
from .finite import RelationParseError, parse_relation
from .report import Report, config_hash, read_csv, write_csv
from .simple import ModelOracle, StatePoint, integrate_adiabat, temperature
from .oracles import strictly_precedes
from .states import Comparability, CompoundState, StateRef
from .thermal import (ReservoirStep, ThermalJoinPoint, carnot_check, reservoir_cycle_audit, split_scan,
                      thermal_split)


class UsageError(Exception):
    pass


class Run:
    """Parsed arguments plus the raw config, its hash and the output directory."""

    def __init__(self, args):
        self.args = args
        self.out = Path(args.out)
        self.path = Path(args.config) if args.config else None
        self.raw = b""
        if self.path is not None:
            if not self.path.is_file():
                raise UsageError(f"{self.path}: no such file")
            self.raw = self.path.read_bytes()
        self.sha = config_hash(self.raw)

    def toml(self) -> dict:
        if self.path is None:
            raise UsageError("--config is required for this command")
        try:
            return parse_toml(self.raw.decode())
        except ConfigError as err:
            raise ConfigError(f"{self.path}:{err.line}:{err.column}: {err}", 0, 0) from None

    def write(self, name: str, header, rows) -> Path:
        p = write_csv(self.out / name, header, rows, tool=self.args.command, config_sha=self.sha,
                      seed=self.args.seed)
        print(f"wrote {p}")
        return p


def _report_rows(label: str, report: Report):
    return [(label, r.check, r.verdict.value, r.witness, r.detail) for r in report.results]


def _verdict_exit(run: Run, reports: List[Report]) -> int:
    failed = any(r.failed for r in reports)
    unsure = any(r.inconclusive for r in reports)
    if failed or (unsure and run.args.strict):
        return 1
    return 0


def _print_report(label: str, report: Report) -> None:
    for r in report.results:
        extra = f"  [{r.witness}]" if r.witness else ""
        print(f"{label:>10}  {r.check:<16} {r.verdict.value}{extra}")


# check-axioms ------------------------------------------------------------

def _model_sample(model, spec: dict) -> List[StateRef]:
    pts = int(spec.get("points", 3))
    (ulo, uhi) = spec.get("u", _inner(model.u_bounds))
    (vlo, vhi) = spec.get("v", _inner(model.v_bounds[0]))
    out = []
    for u in np.linspace(ulo, uhi, pts):
        for v in np.linspace(vlo, vhi, pts):
            p = StatePoint(float(u), (float(v),))
            if model.contains(p):
                out.append(model.state_ref(p))
    return out


def _inner(bounds):
    lo, hi = bounds
    return lo + 0.1 * (hi - lo), lo + 0.3 * (hi - lo)


def cmd_check_axioms(run: Run) -> int:
    if run.path is None:
        raise UsageError("--config is required")
    reports, rows = [], []
    if run.path.suffix == ".toml":
        cfg = run.toml()
        spec = cfg.get("check", {})
        for name, model in load_systems(cfg).items():
            oracle = ModelOracle(model)
            sample = _model_sample(model, spec)
            if not sample:
                raise ConfigError(f"system {name}: check box holds no domain states")
            rep = check_axioms(oracle, sample, limit=int(spec.get("limit", 200)), seed=run.args.seed)
            rep.extend(check_cancellation(oracle.analytic(), sample, limit=500, seed=run.args.seed))
            rep.extend(check_CH(oracle, name, sample))
            reports.append(rep)
            rows += _report_rows(name, rep)
            _print_report(name, rep)
    else:
        try:
            rel_spec = parse_relation(run.raw.decode())
        except RelationParseError as err:
            raise RelationParseError(f"{run.path}:{err.line}:{err.column}: {err.args[0]}", err.line,
                                     err.column) from None
        rel = rel_spec.relation()
        singles = [CompoundState.of(s) for s in rel_spec.states]
        half = Fraction(1, 2)
        mixes = [CompoundState.of((half, a), (half, b)) for i, a in enumerate(rel_spec.states)
                 for b in rel_spec.states[i + 1:]]
        sample = singles + mixes
        rep = check_axioms(rel, sample, seed=run.args.seed)
        rep.extend(check_cancellation(rel, sample, seed=run.args.seed))
        rep.extend(check_CH(rel, None, singles))
        reports.append(rep)
        rows += _report_rows("relation", rep)
        _print_report("relation", rep)
    run.write("axioms.csv", ["system", "check", "verdict", "witness", "detail"], rows)
    return _verdict_exit(run, reports)


# build-entropy -----------------------------------------------------------

def cmd_build_entropy(run: Run) -> int:
    cfg = run.toml()
    systems = load_systems(cfg)
    spec = cfg.get("entropy", {})
    name = spec.get("system", next(iter(systems)))
    model = systems[name]
    oracle = ModelOracle(model).analytic()
    pts = spec.get("points", [10, 10])
    us = np.linspace(*spec.get("u", model.u_bounds), int(pts[0]))
    vs = np.linspace(*spec.get("v", model.v_bounds[0]), int(pts[1]))
    grid = [StatePoint(float(u), (float(v),)) for u in us for v in vs]
    for p in grid:
        if not model.contains(p):
            raise ValueError(f"grid point {p} lies outside the domain of {name}")
    corners = (StatePoint(float(us[0]), (float(vs[0]),)), StatePoint(float(us[-1]), (float(vs[-1]),)))
    x0 = StatePoint(spec["x0"][0], tuple(spec["x0"][1:])) if "x0" in spec else corners[0]
    x1 = StatePoint(spec["x1"][0], tuple(spec["x1"][1:])) if "x1" in spec else corners[1]
    r0, r1 = model.state_ref(x0), model.state_ref(x1)
    if "x0" not in spec and strictly_precedes(oracle, r1, r0) is Comparability.PRECEDES:
        r0, r1 = r1, r0
    tol = run.args.tol
    lams = [construct_entropy(oracle, r0, r1, model.state_ref(p), tol=tol) for p in grid]
    exact = [model.entropy(p) for p in grid]
    fit: Optional[AffineFit] = None
    if len(grid) >= 2:
        try:
            fit = affine_fit({i: s for i, s in enumerate(exact)}, {i: l for i, l in enumerate(lams)},
                             range(len(grid)))
        except FitError as err:
            print(f"fit skipped: {err}")
    rows = []
    for p, lam, s in zip(grid, lams, exact):
        res = abs(lam - (fit.a * s + fit.B)) if fit else ""
        rows.append((p.U, *p.V, lam, s, res))
    nv = len(grid[0].V)
    vcols = [f"V{j + 1}" for j in range(nv)] if nv > 1 else ["V"]
    run.write("entropy.csv", ["U"] + vcols + ["lambda", "S_analytic", "fit_residual"], rows)
    if fit:
        run.write("entropy_fit.csv", ["a", "B", "residual"], [(fit.a, fit.B, fit.residual)])
        print(f"fit: lambda = {fit.a:.12g} * S + {fit.B:.12g}, max residual {fit.residual:.3e}")
    return 0


# adiabat -----------------------------------------------------------------

def cmd_adiabat(run: Run) -> int:
    cfg = run.toml()
    systems = load_systems(cfg)
    spec = cfg.get("adiabat", {})
    model = systems[spec.get("system", next(iter(systems)))]
    seed = spec.get("seed", [1.0, 1.0])
    x = StatePoint(float(seed[0]), tuple(float(v) for v in seed[1:]))
    target = tuple(float(v) for v in spec.get("v_target", [8.0]))
    curve = integrate_adiabat(model, x, target, tol=spec.get("tol", 1e-8))
    keep = int(spec.get("samples", 65))
    idx = np.unique(np.linspace(0, len(curve.samples) - 1, min(keep, len(curve.samples))).round().astype(int))
    rows = [(*curve.samples[i][0], curve.samples[i][1]) for i in idx]
    nv = len(target)
    run.write("adiabat.csv", ([f"V{j + 1}" for j in range(nv)] if nv > 1 else ["V"]) + ["u"], rows)
    print(f"final u = {curve.final_u:.17g}")
    return 0


# split -------------------------------------------------------------------

def cmd_split(run: Run) -> int:
    cfg = run.toml()
    systems = load_systems(cfg)
    spec = cfg.get("split", {})
    names = list(systems)
    left = systems[spec.get("left", names[0])]
    right = systems[spec.get("right", names[-1])]
    joined = ThermalJoinPoint(float(spec["U"]), tuple(map(float, spec.get("V1", [1.0]))),
                              tuple(map(float, spec.get("V2", [1.0]))))
    res = thermal_split(joined, left, right, tol=min(run.args.tol, 1e-10))
    run.write("split_scan.csv", ["W", "S_total"], split_scan(joined, left, right, int(spec.get("points", 101))))
    tl, _ = temperature(left, None, res.x)
    tr, _ = temperature(right, None, res.y)
    run.write("split.csv", ["W", "U_right", "S_total", "T_left", "T_right", "concave"],
              [(res.maximizer_energy, res.y.U, res.total_entropy, tl, tr, res.concave_profile)])
    print(f"W = {res.maximizer_energy:.12g}, T = ({tl:.8g}, {tr:.8g})")
    return 0


# carnot ------------------------------------------------------------------

def cmd_carnot(run: Run) -> int:
    cycles = []
    if run.args.cycle:
        cycles.append(tuple(run.args.cycle))
    cfg = run.toml() if run.path is not None else {}
    for c in cfg.get("carnot", {}).get("cycle", []):
        cycles.append((c["q1"], c["t1"], c["q0"], c["t0"]))
    audit = cfg.get("audit")
    if not cycles and audit is None:
        raise UsageError("no cycles: pass --cycle Q1 T1 Q0 T0 or a config with [[carnot.cycle]]")
    rows = []
    bad = False
    for k, (q1, t1, q0, t0) in enumerate(cycles):
        r = carnot_check(float(q1), float(t1), float(q0), float(t0))
        rows.append((k, q1, t1, q0, t0, r.allowed, r.eta, r.eta_carnot))
        print(f"cycle {k}: allowed={r.allowed} eta={r.eta:.17g} eta_carnot={r.eta_carnot:.17g}")
    if cycles:
        run.write("carnot.csv", ["cycle", "q1", "t1", "q0", "t0", "allowed", "eta", "eta_carnot"], rows)
    if audit is not None:
        systems = load_systems(cfg)
        steps = [ReservoirStep(systems[s["system"]], StatePoint(float(s["U"]), tuple(map(float, s["V"]))),
                               float(s["Q"])) for s in audit.get("step", [])]
        rep, arows = reservoir_cycle_audit(steps, float(audit.get("machine_dS", 0.0)))
        run.write("audit.csv", ["step", "Q", "T_end", "dS_bound", "dS_exact"],
                  [(a.step, a.Q, a.T_end, a.dS_bound, a.dS_exact) for a in arows])
        _print_report("audit", rep)
        bad = rep.failed
    return 1 if bad else 0


# calibrate ---------------------------------------------------------------

def cmd_calibrate(run: Run) -> int:
    net = load_network(run.toml())
    ids = sorted(net.nodes)
    rows = []
    try:
        for a in ids:
            for b in ids:
                if a == b:
                    continue
                d, e, f = compute_D(net, a, b), compute_E(net, a, b), compute_F(net, a, b)
                if math.isfinite(f) or math.isfinite(d):
                    rows.append((f"{a}->{b}", d, e, f))
    except NegativeCycleError as err:
        print(f"infeasible: {err}", file=sys.stderr)
        run.write("certificate.csv", ["node", "weight_to_next"],
                  zip(err.certificate.nodes, err.certificate.weights))
        return 1
    run.write("pairs.csv", ["pair", "D", "E", "F"], rows)
    sol = solve_constants(net)
    if sol.status == "Infeasible":
        print(f"infeasible: {sol.certificate or 'linear program has no solution'}", file=sys.stderr)
        if sol.certificate:
            run.write("certificate.csv", ["node", "weight_to_next"],
                      zip(sol.certificate.nodes, sol.certificate.weights))
        return 1
    prim = [i for i in ids if net.nodes[i].primitive]
    run.write("constants.csv", ["node", "B", "interval_lo", "interval_hi", "free"],
              [(i, sol.B[i], *sol.intervals[i], i in sol.free) for i in prim])
    run.write("gaps.csv", ["pair", "lo", "hi"], [(f"{a}|{b}", lo, hi) for (a, b), (lo, hi) in sol.gaps.items()])
    checks = check_F_properties(net, [(a, b) for a in ids for b in ids if a != b])
    run.write("calibration_checks.csv", ["scope", "check", "verdict", "witness", "detail"],
              _report_rows("network", checks))
    print(f"status: {sol.status} ({sol.method})")
    for i in prim:
        lo, hi = sol.intervals[i]
        print(f"  B({i}) = {sol.B[i]:.12g}  in [{lo:.12g}, {hi:.12g}]")
    _print_report("network", checks)
    return _verdict_exit(run, [checks])


# report ------------------------------------------------------------------

def cmd_report(run: Run) -> int:
    if not run.out.is_dir():
        raise UsageError(f"{run.out}: no output directory to summarize")
    rows, failed = [], False
    for p in sorted(run.out.glob("*.csv")):
        if p.name == "report.csv":
            continue
        data = read_csv(p)
        counts = Counter(r.get("verdict") for r in data if r.get("verdict"))
        failed |= counts.get("FAIL", 0) > 0
        rows.append((p.name, len(data), counts.get("PASS", 0), counts.get("FAIL", 0),
                     counts.get("INCONCLUSIVE", 0)))
        print(f"{p.name:<28} rows={len(data):<5} pass={counts.get('PASS', 0)} fail={counts.get('FAIL', 0)} "
              f"inconclusive={counts.get('INCONCLUSIVE', 0)}")
    run.write("report.csv", ["file", "rows", "pass", "fail", "inconclusive"], rows)
    return 1 if failed else 0


COMMANDS = {
    "check-axioms": cmd_check_axioms,
    "build-entropy": cmd_build_entropy,
    "adiabat": cmd_adiabat,
    "split": cmd_split,
    "carnot": cmd_carnot,
    "calibrate": cmd_calibrate,
    "report": cmd_report,
}


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="system, relation or network file")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--tol", type=_positive, default=1e-9, help="numerical tolerance")
    common.add_argument("--seed", type=_seed, default=0, help="sampling seed")
    common.add_argument("--strict", action="store_true", help="treat inconclusive checks as failures")
    parser = argparse.ArgumentParser(prog="adiabatic", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "carnot":
            sp.add_argument("--cycle", nargs=4, type=float, metavar=("Q1", "T1", "Q0", "T0"))
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        run = Run(args)
        return COMMANDS[args.command](run)
    except (UsageError, ConfigError, RelationParseError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, RuntimeError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
