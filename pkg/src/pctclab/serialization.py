"""Circuit <-> JSON.

Beyond the core schema, gates may carry an optional ``"label"`` string and
controlled named gates an optional ``"active"`` label string.
"""
from __future__ import annotations

import json
from typing import Any

from .circuit import (
    BASES,
    NAMED_GATES,
    NAMED_INITS,
    BellInit,
    Circuit,
    MatrixGate,
    NamedGate,
    Postselection,
    TableGate,
    TableRow,
    Wire,
    WireRole,
)

__all__ = ["CircuitParseError", "parse_circuit", "serialize_circuit", "circuit_to_dict", "circuit_from_dict"]


class CircuitParseError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _complex(value, path: str) -> complex:
    if (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)
    ):
        return complex(value[0], value[1])
    raise CircuitParseError(path, "expected a [re, im] pair")


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _str(obj: dict, key: str, path: str) -> str:
    v = obj.get(key)
    if not isinstance(v, str):
        raise CircuitParseError(f"{path}.{key}", "expected a string")
    return v


def _id_list(obj: dict, key: str, path: str, required=True) -> tuple[str, ...]:
    if key not in obj and not required:
        return ()
    v = obj.get(key)
    if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
        raise CircuitParseError(f"{path}.{key}", "expected a list of wire ids")
    return tuple(v)


def _check_keys(obj: Any, path: str, allowed: set[str]):
    if not isinstance(obj, dict):
        raise CircuitParseError(path, "expected an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise CircuitParseError(f"{path}.{extra[0]}", "unexpected field")


def _parse_init(value, path: str):
    if isinstance(value, str):
        if value in NAMED_INITS:
            return value
        if value.startswith("bell:"):
            parts = value.split(":", 2)
            if len(parts) == 3 and parts[1] in ("psi_plus", "phi_plus") and parts[2]:
                return BellInit(parts[1], parts[2])
        raise CircuitParseError(path, f"unknown init {value!r}")
    if isinstance(value, dict):
        _check_keys(value, path, {"amplitudes"})
        amps = value.get("amplitudes")
        if not isinstance(amps, list) or not amps:
            raise CircuitParseError(f"{path}.amplitudes", "expected a non-empty list")
        return tuple(_complex(a, f"{path}.amplitudes[{i}]") for i, a in enumerate(amps))
    raise CircuitParseError(path, "expected a string or {\"amplitudes\": [...]}")


def _parse_gate(g, path: str):
    if not isinstance(g, dict):
        raise CircuitParseError(path, "expected an object")
    kind = g.get("kind")
    label = g.get("label")
    if label is not None and not isinstance(label, str):
        raise CircuitParseError(f"{path}.label", "expected a string")
    if kind == "named":
        _check_keys(g, path, {"kind", "name", "basis", "targets", "controls", "active", "label"})
        name = _str(g, "name", path)
        if name not in NAMED_GATES:
            raise CircuitParseError(f"{path}.name", f"unknown gate name {name!r}")
        basis = g.get("basis", "z")
        if basis not in BASES:
            raise CircuitParseError(f"{path}.basis", f"unknown basis {basis!r}")
        active = g.get("active")
        if active is not None and not isinstance(active, str):
            raise CircuitParseError(f"{path}.active", "expected a string")
        return NamedGate(
            name,
            _id_list(g, "targets", path),
            basis,
            _id_list(g, "controls", path, required=False),
            active,
            label,
        )
    if kind == "table":
        _check_keys(g, path, {"kind", "basis", "targets", "rows", "label"})
        basis = g.get("basis")
        if basis not in BASES:
            raise CircuitParseError(f"{path}.basis", f"unknown basis {basis!r}")
        rows_in = g.get("rows")
        if not isinstance(rows_in, list):
            raise CircuitParseError(f"{path}.rows", "expected a list")
        rows = []
        for i, r in enumerate(rows_in):
            rp = f"{path}.rows[{i}]"
            _check_keys(r, rp, {"in", "out", "amp"})
            amp = _complex(r["amp"], f"{rp}.amp") if "amp" in r else 1.0
            rows.append(TableRow(_str(r, "in", rp).replace("−", "-"), _str(r, "out", rp).replace("−", "-"), amp))
        return TableGate(basis, _id_list(g, "targets", path), tuple(rows), label)
    if kind == "matrix":
        _check_keys(g, path, {"kind", "targets", "entries", "label"})
        entries = g.get("entries")
        if not isinstance(entries, list) or not all(isinstance(r, list) for r in entries):
            raise CircuitParseError(f"{path}.entries", "expected a list of rows")
        m = tuple(
            tuple(_complex(x, f"{path}.entries[{i}][{j}]") for j, x in enumerate(row))
            for i, row in enumerate(entries)
        )
        return MatrixGate(_id_list(g, "targets", path), m, label)
    raise CircuitParseError(f"{path}.kind", f"unknown gate kind {kind!r}")


def circuit_from_dict(doc: Any) -> Circuit:
    _check_keys(doc, "$", {"wires", "gates", "postselect"})
    wires_in = doc.get("wires")
    if not isinstance(wires_in, list):
        raise CircuitParseError("$.wires", "expected a list")
    wires, seen = [], set()
    for i, w in enumerate(wires_in):
        path = f"$.wires[{i}]"
        _check_keys(w, path, {"id", "dim", "role", "init"})
        wid = _str(w, "id", path)
        if wid in seen:
            raise CircuitParseError(f"{path}.id", f"duplicate wire id {wid!r}")
        seen.add(wid)
        dim = w.get("dim", 2)
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 2:
            raise CircuitParseError(f"{path}.dim", "expected an integer >= 2")
        try:
            role = WireRole.parse(w.get("role", "chronology"))
        except (ValueError, AttributeError):
            raise CircuitParseError(f"{path}.role", f"unknown role {w.get('role')!r}") from None
        wires.append(Wire(wid, dim, role, _parse_init(w.get("init", "zero"), f"{path}.init")))
    gates_in = doc.get("gates", [])
    if not isinstance(gates_in, list):
        raise CircuitParseError("$.gates", "expected a list")
    gates = [_parse_gate(g, f"$.gates[{i}]") for i, g in enumerate(gates_in)]
    ps_in = doc.get("postselect", [])
    if not isinstance(ps_in, list):
        raise CircuitParseError("$.postselect", "expected a list")
    posts = []
    for i, p in enumerate(ps_in):
        path = f"$.postselect[{i}]"
        _check_keys(p, path, {"pair", "state"})
        pair = _id_list(p, "pair", path)
        if len(pair) != 2:
            raise CircuitParseError(f"{path}.pair", "expected exactly two wire ids")
        state = p.get("state", "phi_plus")
        if state != "phi_plus":
            raise CircuitParseError(f"{path}.state", f"unknown postselection state {state!r}")
        posts.append(Postselection((pair[0], pair[1]), state))
    return Circuit(tuple(wires), tuple(gates), tuple(posts))


def parse_circuit(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitParseError("$", f"invalid JSON ({exc})") from None
    return circuit_from_dict(doc)


def _init_to_json(init):
    if isinstance(init, BellInit):
        return f"bell:{init.which}:{init.partner}"
    if isinstance(init, tuple):
        return {"amplitudes": [_pair(a) for a in init]}
    return init


def _gate_to_json(g) -> dict:
    if isinstance(g, NamedGate):
        d = {"kind": "named", "name": g.name, "basis": g.basis, "targets": list(g.targets)}
        if g.controls:
            d["controls"] = list(g.controls)
        if g.active is not None:
            d["active"] = g.active
    elif isinstance(g, TableGate):
        d = {
            "kind": "table",
            "basis": g.basis,
            "targets": list(g.targets),
            "rows": [{"in": r.inp, "out": r.out, "amp": _pair(r.amp)} for r in g.rows],
        }
    else:
        d = {"kind": "matrix", "targets": list(g.targets), "entries": [[_pair(x) for x in row] for row in g.entries]}
    if g.label is not None:
        d["label"] = g.label
    return d


def circuit_to_dict(c: Circuit) -> dict:
    return {
        "wires": [{"id": w.id, "dim": w.dim, "role": str(w.role), "init": _init_to_json(w.init)} for w in c.wires],
        "gates": [_gate_to_json(g) for g in c.gates],
        "postselect": [{"pair": list(p.pair), "state": p.state} for p in c.postselect],
    }


def serialize_circuit(c: Circuit) -> str:
    return json.dumps(circuit_to_dict(c), indent=2)
