"""Declarative circuits over role-tagged wires.

Gates act in list order (index 0 first). A gate with ``basis="pm"`` is the
computational-basis gate conjugated by a Hadamard on every wire it touches,
so labels ``+``/``-`` play the role of ``0``/``1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from math import prod
from typing import Mapping, Sequence, Union

import numpy as np

from . import tolerances as tol
from .linalg import AmplitudeVector, Operator, bell_state, is_unitary, named_state

__all__ = [
    "WireRole",
    "BellInit",
    "Wire",
    "NamedGate",
    "TableRow",
    "TableGate",
    "MatrixGate",
    "Postselection",
    "Circuit",
    "Violation",
    "CircuitError",
    "validate",
    "compile_unitary",
    "gate_matrix",
    "initial_state",
    "apply_local",
    "replace_gate",
]

ROLE_KINDS = ("chronology", "ctc_past", "ctc_future", "environment")
BASES = ("z", "pm")
NAMED_INITS = ("zero", "one", "plus", "minus")
NAMED_GATES = {"I": 1, "X": 1, "Y": 1, "Z": 1, "H": 1, "CNOT": 2, "SWAP": 2}

_S2 = 1 / np.sqrt(2)
_BASE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "CNOT": np.eye(4, dtype=complex)[[0, 1, 3, 2]],
    "SWAP": np.eye(4, dtype=complex)[[0, 2, 1, 3]],
}


class CircuitError(ValueError):
    """A circuit failed validation; ``violations`` lists every problem."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class Violation:
    where: str
    message: str

    def __str__(self):
        return f"{self.where}: {self.message}"


@dataclass(frozen=True)
class WireRole:
    kind: str
    loop: str | None = None

    @classmethod
    def parse(cls, text: str) -> "WireRole":
        kind, _, loop = text.partition(":")
        if kind in ("ctc_past", "ctc_future"):
            if not loop:
                raise ValueError(f"role {text!r} needs a loop id")
            return cls(kind, loop)
        if kind in ("chronology", "environment") and not loop:
            return cls(kind)
        raise ValueError(f"unknown role {text!r}")

    def __str__(self):
        return f"{self.kind}:{self.loop}" if self.loop is not None else self.kind

    @property
    def is_ctc(self) -> bool:
        return self.kind in ("ctc_past", "ctc_future")


@dataclass(frozen=True)
class BellInit:
    which: str  # "psi_plus" | "phi_plus"
    partner: str


Init = Union[str, BellInit, tuple]  # tuple = explicit amplitudes


@dataclass(frozen=True)
class Wire:
    id: str
    dim: int = 2
    role: WireRole = field(default_factory=lambda: WireRole("chronology"))
    init: Init = "zero"


@dataclass(frozen=True)
class NamedGate:
    """Standard gate; optional ``controls`` fire on the ``active`` labels.

    ``active`` defaults to ``1`` per control in the z basis and ``-`` in the
    pm basis (the Hadamard image of ``1``).
    """

    name: str
    targets: tuple[str, ...]
    basis: str = "z"
    controls: tuple[str, ...] = ()
    active: str | None = None
    label: str | None = None

    @property
    def wires(self) -> tuple[str, ...]:
        return tuple(self.controls) + tuple(self.targets)


@dataclass(frozen=True)
class TableRow:
    inp: str
    out: str
    amp: complex = 1.0


@dataclass(frozen=True)
class TableGate:
    """Gate given by basis-label rows; unlisted inputs are completed unitarily."""

    basis: str
    targets: tuple[str, ...]
    rows: tuple[TableRow, ...]
    label: str | None = None

    @property
    def wires(self) -> tuple[str, ...]:
        return tuple(self.targets)


@dataclass(frozen=True)
class MatrixGate:
    targets: tuple[str, ...]
    entries: tuple[tuple[complex, ...], ...]
    label: str | None = None

    @property
    def wires(self) -> tuple[str, ...]:
        return tuple(self.targets)

    @classmethod
    def from_array(cls, targets, matrix, label=None) -> "MatrixGate":
        m = np.asarray(matrix, dtype=complex)
        return cls(tuple(targets), tuple(tuple(complex(x) for x in row) for row in m), label)


Gate = Union[NamedGate, TableGate, MatrixGate]


@dataclass(frozen=True)
class Postselection:
    pair: tuple[str, str]
    state: str = "phi_plus"


@dataclass(frozen=True)
class Circuit:
    wires: tuple[Wire, ...]
    gates: tuple[Gate, ...] = ()
    postselect: tuple[Postselection, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(self.wires))
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "postselect", tuple(self.postselect))

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(w.id for w in self.wires)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(w.dim for w in self.wires)

    def index(self, wire_id: str) -> int:
        try:
            return self.ids.index(wire_id)
        except ValueError:
            raise KeyError(f"no wire {wire_id!r}") from None

    def wire(self, wire_id: str) -> Wire:
        return self.wires[self.index(wire_id)]

    def loops(self) -> dict[str, tuple[str, str]]:
        """Loop id -> (past wire, future wire) for complete loops."""
        past, future = {}, {}
        for w in self.wires:
            if w.role.kind == "ctc_past":
                past[w.role.loop] = w.id
            elif w.role.kind == "ctc_future":
                future[w.role.loop] = w.id
        return {k: (past[k], future[k]) for k in past if k in future}


# ---------------------------------------------------------------- labels


def _label_digits(label: str, basis: str, dims: Sequence[int]) -> tuple[int, ...] | None:
    if len(label) != len(dims):
        return None
    out = []
    for ch, d in zip(label, dims):
        if basis == "pm":
            v = {"+": 0, "-": 1, "\u2212": 1}.get(ch)
        else:
            v = int(ch) if ch.isdigit() else None
        if v is None or v >= d:
            return None
        out.append(v)
    return tuple(out)


def _digits_index(digits: Sequence[int], dims: Sequence[int]) -> int:
    idx = 0
    for v, d in zip(digits, dims):
        idx = idx * d + v
    return idx


def _sylvester(k: int) -> np.ndarray:
    s = np.ones((1, 1))
    for _ in range(k):
        s = np.kron(s, np.array([[1.0, 1.0], [1.0, -1.0]]))
    return s


def to_pm_frame(m: np.ndarray) -> np.ndarray:
    """Conjugate a 2^k x 2^k matrix by the k-fold Hadamard.

    Uses the integer Sylvester matrix so dyadic entries stay exact.
    """
    k = int(np.log2(m.shape[0]))
    s = _sylvester(k)
    return (s @ m @ s) / 2**k


# ---------------------------------------------------------------- gates


def _table_label_matrix(gate: TableGate, dims: Sequence[int]) -> tuple[np.ndarray, list[str]]:
    """Matrix in the label frame plus any problems found with the rows."""
    n = prod(dims)
    m = np.zeros((n, n), dtype=complex)
    specified = set()
    problems = []
    for i, row in enumerate(gate.rows):
        din = _label_digits(row.inp, gate.basis, dims)
        dout = _label_digits(row.out, gate.basis, dims)
        if din is None or dout is None:
            problems.append(f"row {i}: bad label {row.inp!r} -> {row.out!r} for basis {gate.basis!r}")
            continue
        c = _digits_index(din, dims)
        m[_digits_index(dout, dims), c] += row.amp
        specified.add(c)
    if problems:
        return m, problems
    cols = sorted(specified)
    block = m[:, cols]
    if np.max(np.abs(block.conj().T @ block - np.eye(len(cols))), initial=0.0) > tol.UNITARITY:
        return m, ["non-unitary table (listed rows are not orthonormal)"]
    # complete the unlisted inputs with basis vectors orthogonal to the listed outputs
    basis_cols = [m[:, c] for c in cols]
    candidates = iter(range(n))
    for c in range(n):
        if c in specified:
            continue
        for cand in candidates:
            v = np.zeros(n, dtype=complex)
            v[cand] = 1
            for u in basis_cols:
                v = v - np.vdot(u, v) * u
            if np.linalg.norm(v) > 1e-8:
                v = v / np.linalg.norm(v)
                m[:, c] = v
                basis_cols.append(v)
                break
    return m, []


def _named_label_matrix(gate: NamedGate) -> np.ndarray:
    base = _BASE[gate.name]
    nc = len(gate.controls)
    if nc == 0:
        return base.copy()
    active = gate.active if gate.active is not None else ("-" if gate.basis == "pm" else "1") * nc
    digits = _label_digits(active, gate.basis, (2,) * nc)
    if digits is None:
        raise ValueError(f"bad active control label {active!r}")
    k = _digits_index(digits, (2,) * nc)
    nt = base.shape[0]
    m = np.eye(2**nc * nt, dtype=complex)
    m[k * nt:(k + 1) * nt, k * nt:(k + 1) * nt] = base
    return m


def gate_matrix(gate: Gate, dims: Sequence[int]) -> np.ndarray:
    """Matrix of ``gate`` on its own wires (``gate.wires`` order)."""
    if isinstance(gate, NamedGate):
        m = _named_label_matrix(gate)
        return to_pm_frame(m) if gate.basis == "pm" else m
    if isinstance(gate, TableGate):
        m, problems = _table_label_matrix(gate, dims)
        if problems:
            raise ValueError("; ".join(problems))
        return to_pm_frame(m) if gate.basis == "pm" else m
    if isinstance(gate, MatrixGate):
        return np.array(gate.entries, dtype=complex)
    raise TypeError(f"unknown gate type {type(gate).__name__}")


def table_label_matrix(gate: TableGate, dims: Sequence[int] | None = None) -> np.ndarray:
    """Completed table in its own label frame (a permutation for bijective rows)."""
    dims = dims or (2,) * len(gate.targets)
    m, problems = _table_label_matrix(gate, dims)
    if problems:
        raise ValueError("; ".join(problems))
    return m


# ---------------------------------------------------------------- validation


def _validate_gate(i: int, gate: Gate, circuit: Circuit) -> list[Violation]:
    where = f"gate[{i}]"
    out = []
    ids = set(circuit.ids)
    wires = gate.wires
    missing = [w for w in wires if w not in ids]
    if missing:
        return [Violation(where, f"unknown wire(s) {missing}")]
    if len(set(wires)) != len(wires):
        return [Violation(where, "target/control wires must be distinct")]
    dims = [circuit.wire(w).dim for w in wires]
    if isinstance(gate, NamedGate):
        if gate.name not in NAMED_GATES:
            return [Violation(where, f"unknown gate name {gate.name!r}")]
        if len(gate.targets) != NAMED_GATES[gate.name]:
            out.append(Violation(where, f"{gate.name} takes {NAMED_GATES[gate.name]} target(s)"))
        if gate.basis not in BASES:
            out.append(Violation(where, f"unknown basis {gate.basis!r}"))
        if any(d != 2 for d in dims):
            out.append(Violation(where, "named gates act on qubits only"))
        if gate.active is not None and _label_digits(gate.active, gate.basis, (2,) * len(gate.controls)) is None:
            out.append(Violation(where, f"bad active control label {gate.active!r}"))
    elif isinstance(gate, TableGate):
        if gate.basis not in BASES:
            return [Violation(where, f"unknown basis {gate.basis!r}")]
        if gate.basis == "pm" and any(d != 2 for d in dims):
            out.append(Violation(where, "pm basis needs qubit wires"))
        else:
            _, problems = _table_label_matrix(gate, dims)
            out.extend(Violation(where, p) for p in problems)
    elif isinstance(gate, MatrixGate):
        m = np.array(gate.entries, dtype=complex)
        n = prod(dims)
        if m.shape != (n, n):
            out.append(Violation(where, f"matrix shape {m.shape} does not match wires ({n}x{n})"))
        elif not is_unitary(m):
            out.append(Violation(where, "matrix is not unitary"))
    else:
        out.append(Violation(where, f"unknown gate type {type(gate).__name__}"))
    return out


def validate(circuit: Circuit) -> list[Violation]:
    """Every violated circuit invariant; an empty list means valid."""
    out: list[Violation] = []
    seen = set()
    for i, w in enumerate(circuit.wires):
        where = f"wire[{i}] {w.id!r}"
        if w.id in seen:
            out.append(Violation(where, "duplicate wire id"))
        seen.add(w.id)
        if w.dim < 2:
            out.append(Violation(where, f"dimension {w.dim} < 2"))
        if w.role.kind not in ROLE_KINDS:
            out.append(Violation(where, f"unknown role {w.role.kind!r}"))
        init = w.init
        if isinstance(init, str):
            if init not in NAMED_INITS:
                out.append(Violation(where, f"unknown init {init!r}"))
            elif init in ("plus", "minus") and w.dim != 2:
                out.append(Violation(where, f"init {init!r} needs a qubit"))
        elif isinstance(init, tuple):
            v = np.array(init, dtype=complex)
            if v.size != w.dim:
                out.append(Violation(where, f"explicit init has {v.size} amplitudes, dim is {w.dim}"))
            elif abs(np.linalg.norm(v) - 1) > tol.UNITARITY:
                out.append(Violation(where, "explicit init is not normalized"))
    if out:
        return out

    by_id = {w.id: w for w in circuit.wires}
    bell_refs: dict[str, int] = {}
    for i, w in enumerate(circuit.wires):
        if not isinstance(w.init, BellInit):
            continue
        where = f"wire[{i}] {w.id!r}"
        p = w.init.partner
        bell_refs[p] = bell_refs.get(p, 0) + 1
        if w.init.which not in ("psi_plus", "phi_plus"):
            out.append(Violation(where, f"unknown Bell state {w.init.which!r}"))
        elif p not in by_id or p == w.id:
            out.append(Violation(where, f"Bell partner {p!r} is not another wire"))
        else:
            other = by_id[p].init
            if not (isinstance(other, BellInit) and other.partner == w.id and other.which == w.init.which):
                out.append(Violation(where, f"Bell partner {p!r} does not reference {w.id!r} back"))
            if by_id[p].dim != w.dim or (w.init.which == "psi_plus" and w.dim != 2):
                out.append(Violation(where, "Bell pair dimensions incompatible"))
    for wid, n in bell_refs.items():
        if n > 1:
            out.append(Violation(f"wire {wid!r}", "referenced by more than one Bell pair"))

    past: dict[str, list[str]] = {}
    future: dict[str, list[str]] = {}
    for w in circuit.wires:
        if w.role.kind == "ctc_past":
            past.setdefault(w.role.loop, []).append(w.id)
        elif w.role.kind == "ctc_future":
            future.setdefault(w.role.loop, []).append(w.id)
    loops = {}
    for loop in sorted(set(past) | set(future)):
        ps, fs = past.get(loop, []), future.get(loop, [])
        if len(ps) != 1 or len(fs) != 1:
            out.append(Violation(f"loop {loop!r}", f"unpaired loop ({len(ps)} past, {len(fs)} future wires)"))
            continue
        p, f = by_id[ps[0]], by_id[fs[0]]
        if p.dim != f.dim:
            out.append(Violation(f"loop {loop!r}", "past and future wires differ in dimension"))
        if not (isinstance(p.init, BellInit) and p.init.which == "phi_plus" and p.init.partner == f.id):
            out.append(Violation(f"loop {loop!r}", "loop pair must be initialized jointly in phi_plus"))
        loops[loop] = (p.id, f.id)

    used = {}
    for i, ps in enumerate(circuit.postselect):
        where = f"postselect[{i}]"
        if ps.state != "phi_plus":
            out.append(Violation(where, f"unknown postselection state {ps.state!r}"))
        if len(ps.pair) != 2 or ps.pair[0] == ps.pair[1] or any(w not in by_id for w in ps.pair):
            out.append(Violation(where, f"bad wire pair {ps.pair!r}"))
            continue
        if by_id[ps.pair[0]].dim != by_id[ps.pair[1]].dim:
            out.append(Violation(where, "postselected wires differ in dimension"))
        for w in ps.pair:
            if w in used:
                out.append(Violation(where, f"wire {w!r} already postselected"))
            used[w] = i
    for loop, (p, f) in loops.items():
        hits = [i for i, ps in enumerate(circuit.postselect) if set(ps.pair) == {p, f}]
        if len(hits) != 1:
            out.append(Violation(f"loop {loop!r}", f"needs exactly one postselection onto phi_plus, found {len(hits)}"))

    for i, g in enumerate(circuit.gates):
        out.extend(_validate_gate(i, g, circuit))
    return out


def check(circuit: Circuit) -> None:
    violations = validate(circuit)
    if violations:
        raise CircuitError(violations)


# ---------------------------------------------------------------- simulation


def apply_local(tensor: np.ndarray, matrix: np.ndarray, positions: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Apply ``matrix`` to the subsystems at ``positions``.

    ``tensor`` is flat over ``dims`` with an optional trailing batch axis.
    """
    n = len(dims)
    batch = tensor.shape[1:] if tensor.ndim > 1 else ()
    t = tensor.reshape(tuple(dims) + batch)
    k = len(positions)
    t = np.moveaxis(t, list(positions), list(range(k)))
    shape = t.shape
    local = prod(dims[p] for p in positions)
    t = (matrix @ t.reshape(local, -1)).reshape(shape)
    t = np.moveaxis(t, list(range(k)), list(positions))
    return t.reshape((prod(dims),) + batch) if n else t


def compile_unitary(circuit: Circuit, wires: Sequence[str] | None = None) -> Operator:
    """Product of all gate matrices, first gate rightmost.

    ``wires`` restricts the space to a subset (every gate must lie inside it).
    """
    check(circuit)
    wires = tuple(wires) if wires is not None else circuit.ids
    return _compile(circuit, wires)


@lru_cache(maxsize=128)
def _compile(circuit: Circuit, wires: tuple[str, ...]) -> Operator:
    dims = tuple(circuit.wire(w).dim for w in wires)
    n = prod(dims)
    u = np.eye(n, dtype=complex)
    for i, g in enumerate(circuit.gates):
        outside = [w for w in g.wires if w not in wires]
        if outside:
            raise ValueError(f"gate[{i}] touches wires {outside} outside the compiled space")
        pos = [wires.index(w) for w in g.wires]
        u = apply_local(u, gate_matrix(g, [dims[p] for p in pos]), pos, dims)
    if not is_unitary(u):
        raise AssertionError("compiled circuit is not unitary; this is a bug in gate construction")
    return Operator(u, dims, tag="unitary")


def _as_vector(value, dim: int) -> np.ndarray:
    if isinstance(value, str):
        if value == "zero" or value == "one":
            v = np.zeros(dim, dtype=complex)
            v[0 if value == "zero" else 1] = 1
            return v
        v = named_state(value).amplitudes
    elif isinstance(value, AmplitudeVector):
        v = value.amplitudes
    else:
        v = np.asarray(value, dtype=complex).reshape(-1)
    if v.size != dim:
        raise ValueError(f"state has dimension {v.size}, wire needs {dim}")
    return v


def initial_state(
    circuit: Circuit,
    overrides: Mapping[str, object] | None = None,
    exclude: Sequence[str] = (),
) -> AmplitudeVector:
    """Joint initial vector in wire order (``exclude``-d wires left out).

    Overrides replace the initial state of chronology wires that are not
    part of a Bell pair; the override is used as given (no normalization).
    """
    overrides = dict(overrides or {})
    for wid in overrides:
        w = circuit.wire(wid)
        if w.role.kind != "chronology":
            raise ValueError(f"override on {wid!r}: only chronology wires may be overridden")
        if isinstance(w.init, BellInit):
            raise ValueError(f"override on {wid!r}: wire is half of a Bell pair")
    ids = [w for w in circuit.ids if w not in exclude]
    groups: list[tuple[list[int], np.ndarray]] = []
    placed = set()
    for pos, wid in enumerate(ids):
        if wid in placed:
            continue
        w = circuit.wire(wid)
        if isinstance(w.init, BellInit):
            partner = w.init.partner
            if partner not in ids:
                raise ValueError(f"wire {wid!r} is Bell-paired with excluded wire {partner!r}")
            v = bell_state(w.init.which, w.dim).amplitudes.reshape(w.dim, w.dim)
            groups.append(([pos, ids.index(partner)], v))
            placed.update((wid, partner))
        else:
            src = overrides.get(wid, w.init)
            groups.append(([pos], _as_vector(src, w.dim)))
            placed.add(wid)
    t = np.ones((), dtype=complex)
    axes: list[int] = []
    for g_axes, g in groups:
        t = np.tensordot(t, g, axes=0)
        axes.extend(g_axes)
    t = np.transpose(t, np.argsort(axes)) if axes else t
    dims = tuple(circuit.wire(w).dim for w in ids)
    return AmplitudeVector(t.reshape(-1), dims)


def replace_gate(circuit: Circuit, label: str, gate: Gate) -> Circuit:
    """Copy of ``circuit`` with the gate carrying ``label`` swapped out."""
    hits = [i for i, g in enumerate(circuit.gates) if g.label == label]
    if len(hits) != 1:
        raise KeyError(f"expected one gate labelled {label!r}, found {len(hits)}")
    gates = list(circuit.gates)
    gates[hits[0]] = gate
    return replace(circuit, gates=tuple(gates))


def insert_identities(circuit: Circuit, positions: Sequence[int], wire: str) -> Circuit:
    gates = list(circuit.gates)
    for p in sorted(positions, reverse=True):
        gates.insert(p, NamedGate("I", (wire,)))
    return replace(circuit, gates=tuple(gates))
