"""Post-selected teleportation semantics for closed timelike curves.

A loop is a pair of wires prepared in ``|phi+>`` and, after the circuit,
projected back onto ``<phi+|``. The projection uses the bare bra (no factor
of ``d``), so ``effective_operator`` equals ``d`` times the explicit path.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import tolerances as tol
from .circuit import Circuit, apply_local, check, compile_unitary, initial_state
from .linalg import AmplitudeVector, Operator, bell_state, eig, partial_trace

__all__ = [
    "PctcOutcome",
    "LoopAnalysis",
    "EntangledResidueError",
    "run_postselected",
    "effective_operator",
    "circuit_effective_operator",
    "loop_operator",
    "teleportation_identity_check",
    "circuit_identity_check",
]


class EntangledResidueError(ValueError):
    """The probe output stays entangled with the other surviving wires."""

    def __init__(self, probe: str, schmidt_values: np.ndarray):
        self.probe = probe
        self.schmidt_values = np.asarray(schmidt_values)
        super().__init__(
            f"entangled residue: output on {probe!r} does not factor from the other surviving wires "
            f"(Schmidt values {np.round(self.schmidt_values, 6).tolist()})"
        )


@dataclass(frozen=True)
class PctcOutcome:
    weight: float
    state: AmplitudeVector | None
    paradox: bool
    wires: tuple[str, ...]
    amplitudes: AmplitudeVector  # unnormalized survivor vector


@dataclass(frozen=True)
class LoopAnalysis:
    probe: str
    loop_operator: Operator
    eigenpairs: list
    classification: str  # "paradox" | "tautology" | "consistent"
    fixed_state: AmplitudeVector | None
    count: int
    residue: AmplitudeVector | None
    residue_wires: tuple[str, ...]


def _project_pairs(t: np.ndarray, dims: list[int], ids: list[str], pairs) -> tuple[np.ndarray, list[int], list[str]]:
    t = t.reshape(dims)
    for a, b in pairs:
        ia, ib = ids.index(a), ids.index(b)
        bra = bell_state("phi_plus", dims[ia]).amplitudes.conj().reshape(dims[ia], dims[ib])
        t = np.tensordot(t, bra, axes=([ia, ib], [0, 1]))
        for i in sorted((ia, ib), reverse=True):
            del dims[i]
            del ids[i]
    return t.reshape(-1), dims, ids


def run_postselected(
    circuit: Circuit,
    overrides: Mapping[str, object] | None = None,
    epsilon: float = tol.ZERO_AMPLITUDE,
) -> PctcOutcome:
    """Prepare, evolve, and project every postselected pair onto ``|phi+>``."""
    check(circuit)
    psi = initial_state(circuit, overrides)
    u = compile_unitary(circuit)
    out = u.entries @ psi.amplitudes
    pairs = [p.pair for p in circuit.postselect]
    vec, dims, ids = _project_pairs(out, list(circuit.dims), list(circuit.ids), pairs)
    raw = AmplitudeVector(vec, tuple(dims))
    weight = float(np.vdot(vec, vec).real)
    paradox = weight <= epsilon
    state = None if paradox else AmplitudeVector(vec / np.sqrt(weight), tuple(dims))
    return PctcOutcome(weight, state, paradox, tuple(ids), raw)


def effective_operator(u: Operator, ctc: Iterable[int]) -> Operator:
    """``Tr_ctc[U]`` on the remaining subsystems (unnormalized)."""
    ctc = set(int(i) for i in ctc)
    for i in ctc:
        if not 0 <= i < len(u.dims):
            raise IndexError(f"ctc index {i} out of range")
    return partial_trace(u, [i for i in range(len(u.dims)) if i not in ctc])


def _loop_space(circuit: Circuit) -> tuple[list[str], list[int]]:
    loops = circuit.loops()
    futures = {f for _, f in loops.values()}
    for i, g in enumerate(circuit.gates):
        hit = futures.intersection(g.wires)
        if hit:
            raise ValueError(f"gate[{i}] acts on future-mouth wire(s) {sorted(hit)}; trace form needs them idle")
    wires = [w for w in circuit.ids if w not in futures]
    past = [wires.index(p) for p, _ in loops.values()]
    return wires, past


def circuit_effective_operator(circuit: Circuit) -> tuple[Operator, tuple[str, ...]]:
    """Effective operator of a circuit and the wires it acts on."""
    check(circuit)
    wires, past = _loop_space(circuit)
    u = compile_unitary(circuit, wires)
    kept = tuple(w for i, w in enumerate(wires) if i not in past)
    return effective_operator(u, past), kept


def teleportation_identity_check(u: Operator, ctc: Sequence[int]) -> float:
    """Max deviation between ``d * (explicit |phi+> path)`` and the trace form.

    Runs every computational basis input of the non-loop subsystems through
    both routes.
    """
    ctc = [int(i) for i in ctc]
    n = len(u.dims)
    rest = [i for i in range(n) if i not in ctc]
    rest_dims = [u.dims[i] for i in rest]
    loop_dims = [u.dims[i] for i in ctc]
    d = prod(loop_dims)
    eff = effective_operator(u, ctc).entries
    # extended register: original subsystems, then one partner per loop wire
    ext_dims = list(u.dims) + loop_dims
    partners = list(range(n, n + len(ctc)))
    residual = 0.0
    for k in range(prod(rest_dims) if rest_dims else 1):
        rest_vec = np.zeros(prod(rest_dims) if rest_dims else 1, dtype=complex)
        rest_vec[k] = 1
        t = rest_vec.reshape(rest_dims) if rest_dims else rest_vec.reshape(())
        axes = list(rest)
        for c, p, dl in zip(ctc, partners, loop_dims):
            t = np.tensordot(t, bell_state("phi_plus", dl).amplitudes.reshape(dl, dl), axes=0)
            axes.extend([c, p])
        t = np.transpose(t, np.argsort(axes)).reshape(-1)
        t = apply_local(t, u.entries, list(range(n)), ext_dims)
        ids = [str(i) for i in range(len(ext_dims))]
        vec, _, _ = _project_pairs(t, list(ext_dims), ids, [(str(c), str(p)) for c, p in zip(ctc, partners)])
        residual = max(residual, float(np.max(np.abs(d * vec - eff @ rest_vec))))
    return residual


def circuit_identity_check(circuit: Circuit) -> float:
    check(circuit)
    wires, past = _loop_space(circuit)
    return teleportation_identity_check(compile_unitary(circuit, wires), past)


def _canonical(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.round(np.abs(v), 12)))
    return v * (abs(v[k]) / v[k]) if abs(v[k]) > 0 else v


def loop_operator(
    circuit: Circuit,
    probe: str,
    epsilon: float = tol.ZERO_AMPLITUDE,
) -> LoopAnalysis:
    """Linear map ``M`` with ``M|psi>`` = unnormalized probe output for input ``|psi>``.

    Runs one postselected simulation per probe basis state. The other
    surviving wires must come out in a probe-independent product state; that
    state is reported as ``residue`` and contracted away. Anything else
    raises :class:`EntangledResidueError`.
    """
    check(circuit)
    w = circuit.wire(probe)
    if w.role.kind != "chronology":
        raise ValueError(f"probe {probe!r} must be a chronology wire")
    d = w.dim
    columns = []
    for k in range(d):
        basis = np.zeros(d, dtype=complex)
        basis[k] = 1
        out = run_postselected(circuit, {probe: basis}, epsilon)
        columns.append(out.amplitudes.amplitudes)
    ids = list(out.wires)
    dims = list(out.amplitudes.dims)
    p = ids.index(probe)
    rest_ids = tuple(i for i in ids if i != probe)
    rest_dims = [dm for i, dm in zip(ids, dims) if i != probe]
    # tensor[rest, out, in]
    a = np.stack([np.moveaxis(c.reshape(dims), p, -1).reshape(-1, d) for c in columns], axis=-1)
    if np.max(np.abs(a)) <= epsilon:
        m = np.zeros((d, d), dtype=complex)
        residue = None
    else:
        mat = a.reshape(a.shape[0], d * d)
        u_, s, vh = np.linalg.svd(mat, full_matrices=False)
        if len(s) > 1 and s[1] > tol.EIG_NONZERO:
            raise EntangledResidueError(probe, s)
        r = _canonical(u_[:, 0])
        m = (r.conj() @ mat).reshape(d, d)
        residue = AmplitudeVector(r, tuple(rest_dims)) if rest_dims else None
    op = Operator(m, (d,))
    pairs = eig(op)
    if np.max(np.abs(m)) <= epsilon:
        cls, fixed, count = "paradox", None, 0
    else:
        nonzero = [(lam, v) for lam, v in pairs if abs(lam) > tol.EIG_NONZERO]
        count = len(nonzero)
        if count == 1:
            cls, fixed = "tautology", nonzero[0][1]
        else:
            cls, fixed = "consistent", None
    return LoopAnalysis(probe, op, pairs, cls, fixed, count, residue, rest_ids)
