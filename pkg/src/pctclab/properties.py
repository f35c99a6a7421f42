"""Seeded property suites, also reachable as ``pctc-lab experiment properties``.

Each suite returns ``(passed, measured, tolerance)``.
"""
from __future__ import annotations

import numpy as np

from . import tolerances as tol
from .circuit import BellInit, Circuit, MatrixGate, Postselection, Wire, WireRole, compile_unitary
from .deutsch import deutsch_map
from .linalg import Operator, haar_unitary, partial_trace, random_state
from .pctc import circuit_identity_check, run_postselected, teleportation_identity_check
from .serialization import parse_circuit, serialize_circuit


def random_loop_circuit(rng: np.random.Generator, n_system: int = 1, dim: int = 2) -> Circuit:
    """``n_system`` free chronology wires plus one loop, one Haar gate on all of them."""
    wires = [Wire(f"R{i}", dim, WireRole("chronology"), "zero") for i in range(n_system)]
    wires += [
        Wire("C_past", dim, WireRole("ctc_past", "L"), BellInit("phi_plus", "C_future")),
        Wire("C_future", dim, WireRole("ctc_future", "L"), BellInit("phi_plus", "C_past")),
    ]
    targets = tuple(w.id for w in wires[:n_system]) + ("C_past",)
    u = haar_unitary(dim ** len(targets), rng)
    gate = MatrixGate.from_array(targets, u, label="U")
    return Circuit(tuple(wires), (gate,), (Postselection(("C_past", "C_future")),))


def _random_density(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def linearity(seed: int, trials: int = 30) -> tuple[bool, float, float]:
    """Raw postselected output is linear in the probe input."""
    from .experiments import build_fig1b_cnot, build_fig1b_copy

    rng = np.random.default_rng(seed)
    circuits = [build_fig1b_copy(), build_fig1b_cnot(write="copy")]
    circuits += [random_loop_circuit(rng) for _ in range(3)]
    worst = 0.0
    for c in circuits:
        probe = "B" if "B" in c.ids else "R0"
        for _ in range(trials // len(circuits) + 1):
            a, b = random_state(2, rng), random_state(2, rng)
            alpha, beta = rng.normal(size=2) + 1j * rng.normal(size=2)
            lhs = run_postselected(c, {probe: alpha * a + beta * b}).amplitudes.amplitudes
            rhs = alpha * run_postselected(c, {probe: a}).amplitudes.amplitudes
            rhs = rhs + beta * run_postselected(c, {probe: b}).amplitudes.amplitudes
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst <= tol.UNITARITY, worst, tol.UNITARITY


def partial_trace_preserves_trace(seed: int, trials: int = 50) -> tuple[bool, float, float]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        dims = tuple(int(x) for x in rng.integers(2, 4, size=3))
        rho = Operator(_random_density(int(np.prod(dims)), rng), dims)
        for keep in ([], [0], [1, 2], [0, 2]):
            worst = max(worst, abs(np.trace(partial_trace(rho, keep).entries) - 1))
    return worst <= tol.TRACE, float(worst), tol.TRACE


def deutsch_map_is_channel(seed: int, trials: int = 50) -> tuple[bool, dict, dict]:
    """Output trace stays 1 and eigenvalues stay non-negative."""
    rng = np.random.default_rng(seed)
    trace_err, min_eig = 0.0, 1.0
    for _ in range(trials):
        dc, dl = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        u = haar_unitary(dc * dl, rng)
        u = Operator(u, (dc, dl))
        out = deutsch_map(u, Operator(_random_density(dc, rng), (dc,)), Operator(_random_density(dl, rng), (dl,)))
        trace_err = max(trace_err, abs(np.trace(out.entries) - 1))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(out.entries).min()))
    ok = trace_err <= tol.TRACE and min_eig >= -tol.DENSITY
    return ok, {"trace_error": float(trace_err), "min_eigenvalue": min_eig}, {"trace": tol.TRACE, "eigenvalue": -tol.DENSITY}


def round_trip(seed: int) -> tuple[bool, dict, int]:
    """parse(serialize(c)) == c, byte-stable text, bit-identical compiled unitary."""
    from .experiments import (
        build_copy_interaction,
        build_fig1a,
        build_fig1b_cnot,
        build_fig1b_copy,
        build_grandfather,
    )

    rng = np.random.default_rng(seed)
    circuits = [
        build_fig1a(0),
        build_fig1a(1),
        build_fig1b_cnot(),
        build_fig1b_cnot(write="copy", order="cnot-first"),
        build_fig1b_copy(),
        build_fig1b_copy(completion="alt"),
        build_grandfather(),
        build_copy_interaction(),
    ] + [random_loop_circuit(rng, n_system=2) for _ in range(5)]
    failures = 0
    for c in circuits:
        text = serialize_circuit(c)
        back = parse_circuit(text)
        same_u = np.array_equal(compile_unitary(c).entries, compile_unitary(back).entries)
        if back != c or serialize_circuit(back) != text or not same_u:
            failures += 1
    return failures == 0, {"circuits": len(circuits), "failures": failures}, 0


def identity_check(seed: int, trials: int = 50) -> tuple[bool, float, float]:
    """Trace form vs explicit teleportation path on Haar unitaries and packaged circuits."""
    from .experiments import build_fig1a, build_fig1b_cnot, build_fig1b_copy, build_grandfather

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        u = haar_unitary(4, rng)
        worst = max(worst, teleportation_identity_check(Operator(u, (2, 2)), [1]))
    for c in (build_fig1a(1), build_fig1b_cnot(), build_fig1b_copy(), build_grandfather()):
        worst = max(worst, circuit_identity_check(c))
    return worst < tol.IDENTITY_CHECK, worst, tol.IDENTITY_CHECK


SUITES = {
    "linearity": linearity,
    "partial_trace_preserves_trace": partial_trace_preserves_trace,
    "deutsch_map_is_channel": deutsch_map_is_channel,
    "round_trip": round_trip,
    "identity_check": identity_check,
}


def run_all(seed: int) -> dict:
    return {name: fn(seed) for name, fn in SUITES.items()}
