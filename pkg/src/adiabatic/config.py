"""TOML loaders for system models and reaction networks."""

from __future__ import annotations

import math
import re
from pathlib import Path
from typing import Dict, Union

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .calibration import ProcessWitness, ReactionNetwork
from .simple import SimpleSystemModel, ideal_gas, table_model, van_der_waals
from .states import CompoundState, StateRef


class ConfigError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        where = f" (line {line}, column {column})" if line else ""
        super().__init__(message + where)
        self.line, self.column = line, column


_POS = re.compile(r"at line (\d+), column (\d+)")


def load_toml(path: Union[str, Path]) -> dict:
    text = Path(path).read_text()
    return parse_toml(text)


def parse_toml(text: str) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        msg = str(err)
        m = _POS.search(msg)
        if m:
            line, col = int(m.group(1)), int(m.group(2))
        elif "end of document" in msg:
            lines = text.splitlines() or [""]
            line, col = len(lines), len(lines[-1]) + 1
        else:
            line, col = 0, 0
        msg = re.sub(r"\s*\((?:at line \d+, column \d+|at end of document)\)", "", msg)
        raise ConfigError(f"TOML syntax error: {msg}", line, col) from None


def build_system(name: str, spec: dict) -> SimpleSystemModel:
    kind = spec.get("kind", "ideal-gas")
    amount = float(spec.get("amount", 1.0))
    dom = spec.get("domain", {})
    kw = {}
    if "u" in dom:
        kw["u_bounds"] = tuple(float(x) for x in dom["u"])
    if "v" in dom:
        v = dom["v"]
        kw["v_bounds"] = tuple(tuple(float(x) for x in b) for b in (v if isinstance(v[0], list) else [v]))
    if kind == "ideal-gas":
        return ideal_gas(name, amount, **kw)
    if kind == "van-der-waals":
        return van_der_waals(name, amount, cv=float(spec.get("cv", 4.0)), **kw)
    if kind == "table":
        try:
            return table_model(name, spec["u"], spec["v"], spec["pressure"], amount)
        except KeyError as err:
            raise ConfigError(f"system {name}: table needs key {err}") from None
    raise ConfigError(f"system {name}: unknown kind {kind!r}")


def load_systems(cfg: dict) -> Dict[str, SimpleSystemModel]:
    systems = cfg.get("system", {})
    if not systems:
        raise ConfigError("config defines no [system.<name>] table")
    return {name: build_system(name, spec) for name, spec in systems.items()}


def _entropy_fn(node_id: str, spec: dict):
    kind = spec.get("kind", "ideal-gas")
    if kind == "ideal-gas":
        a = float(spec.get("amount", 1.0))

        def s(c, a=a):
            return a * (1.5 * math.log(c[0] / a) + math.log(c[1] / a))
        return s
    if kind == "affine":
        coef = [float(x) for x in spec.get("coef", [1.0])]
        offset = float(spec.get("offset", 0.0))
        return lambda c: offset + sum(k * x for k, x in zip(coef, c))
    raise ConfigError(f"node {node_id}: unknown entropy kind {kind!r}")


def _state(net: ReactionNetwork, node_id: str, coords):
    node = net.nodes[node_id]
    if node.primitive:
        return StateRef(node_id, tuple(float(x) for x in coords))
    if len(coords) != len(node.factors):
        raise ConfigError(f"state for product {node_id} needs {len(node.factors)} factor states")
    return CompoundState(tuple((t, StateRef(b, tuple(float(x) for x in c)))
                               for (t, b), c in zip(node.factors, coords)))


def load_network(cfg: dict) -> ReactionNetwork:
    """``[node.<id>]`` with composition/entropy or factors, ``[edge.<a>.<b>]`` with D or witnesses."""
    nodes = cfg.get("node", {})
    if not nodes:
        raise ConfigError("network defines no [node.<id>] table")
    net = ReactionNetwork()
    pending = {}
    for nid, spec in nodes.items():
        if "factors" in spec:
            pending[nid] = spec
            continue
        if "composition" not in spec:
            raise ConfigError(f"node {nid}: needs composition or factors")
        ent = spec.get("entropy")
        net.add_node(nid, spec["composition"], _entropy_fn(nid, ent) if ent is not None else None)
    while pending:
        ready = [n for n, s in pending.items() if all(f[1] in net.nodes for f in s["factors"])]
        if not ready:
            raise ConfigError(f"products with unknown or cyclic factors: {sorted(pending)}")
        for nid in sorted(ready):
            spec = pending.pop(nid)
            node = net.add_product(nid, [(float(t), str(f)) for t, f in spec["factors"]])
            if "composition" in spec and [float(c) for c in spec["composition"]] != list(node.composition):
                raise ConfigError(f"product {nid}: composition does not match its factors")
    for a, targets in cfg.get("edge", {}).items():
        for b, spec in targets.items():
            if a not in net.nodes or b not in net.nodes:
                raise ConfigError(f"edge {a}.{b}: unknown node")
            if "D" in spec:
                d = spec["D"]
                net.add_edge(a, b, D=float("inf") if d == "inf" else float(d))
            else:
                ws = [ProcessWitness(_state(net, a, w["from"]), _state(net, b, w["to"]), w.get("note", ""))
                      for w in spec.get("witnesses", [])]
                net.add_edge(a, b, witnesses=ws)
    net.set_catalysts(cfg.get("catalysts", {}).get("ids", []))
    return net
