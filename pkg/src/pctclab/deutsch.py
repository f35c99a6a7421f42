"""Deutsch self-consistency: loop states with ``D(rho) = rho``.

``D(rho) = Tr_CR[U (rho_CR (x) rho) U^dag]`` with the chronology-respecting
subsystems first and the loop last in ``U``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import tolerances as tol
from .circuit import BellInit, Circuit, check, compile_unitary, initial_state
from .linalg import Operator, trace_distance

__all__ = ["DeutschSolution", "deutsch_map", "superoperator", "fixed_points", "circuit_deutsch", "von_neumann_entropy"]


@dataclass(frozen=True)
class DeutschSolution:
    fixed_state: Operator
    residual: float
    iterations: int
    multiplicity: int
    selected: bool  # max-entropy representative chosen among several
    converged: bool  # averaged iteration reached the residual target
    method: str  # "iteration" | "spectral"
    agreement: float | None  # iteration vs spectral trace distance (unique case)


def _split(u: Operator, rho_cr: Operator) -> tuple[int, int]:
    dc = rho_cr.dim
    if u.dim % dc:
        raise ValueError(f"U dimension {u.dim} is not a multiple of the CR dimension {dc}")
    return dc, u.dim // dc


def _apply(u: np.ndarray, rho_cr: np.ndarray, rho: np.ndarray, dc: int, dl: int) -> np.ndarray:
    joint = u @ np.kron(rho_cr, rho) @ u.conj().T
    return np.einsum("aiaj->ij", joint.reshape(dc, dl, dc, dl))


def deutsch_map(u: Operator, rho_cr: Operator, rho_loop: Operator) -> Operator:
    dc, dl = _split(u, rho_cr)
    if rho_loop.dim != dl:
        raise ValueError(f"loop state has dimension {rho_loop.dim}, U leaves {dl}")
    return Operator(_apply(u.entries, rho_cr.entries, rho_loop.entries, dc, dl), (dl,) if dl > 1 else ())


def superoperator(u: Operator, rho_cr: Operator) -> np.ndarray:
    """Matrix ``S`` with ``vec(D(rho)) = S vec(rho)`` (row-major vec)."""
    dc, dl = _split(u, rho_cr)
    s = np.zeros((dl * dl, dl * dl), dtype=complex)
    for i in range(dl):
        for j in range(dl):
            e = np.zeros((dl, dl), dtype=complex)
            e[i, j] = 1
            s[:, i * dl + j] = _apply(u.entries, rho_cr.entries, e, dc, dl).reshape(-1)
    return s


def _trace_norm(m: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvalsh((m + m.conj().T) / 2)).sum())


def von_neumann_entropy(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    w = w[w > 1e-15]
    return float(-(w * np.log(w)).sum())


def _hermitian_fixed_basis(s: np.ndarray, dl: int) -> list[np.ndarray]:
    """Real basis of Hermitian matrices spanning the eigenvalue-1 eigenspace."""
    _, sv, vh = np.linalg.svd(s - np.eye(dl * dl))
    null = vh[sv < tol.DEUTSCH_EIGENVALUE_ONE].conj()
    herm = []
    for v in null:
        m = v.reshape(dl, dl)
        herm.append((m + m.conj().T) / 2)
        herm.append((m - m.conj().T) / 2j)
    if not herm:
        return []
    real = np.array([np.concatenate([h.real.ravel(), h.imag.ravel()]) for h in herm])
    _, rs, rvh = np.linalg.svd(real, full_matrices=False)
    rank = int(np.sum(rs > 1e-9))
    basis = []
    for row in rvh[:rank]:
        h = (row[: dl * dl] + 1j * row[dl * dl:]).reshape(dl, dl)
        basis.append((h + h.conj().T) / 2)
    return basis


def _max_entropy(basis: list[np.ndarray], start: np.ndarray, dl: int) -> np.ndarray:
    """Projected gradient ascent of the entropy over trace-1 PSD combinations of ``basis``."""
    c = np.array([np.trace(b).real for b in basis])
    gram = np.array([[np.vdot(a, b).real for b in basis] for a in basis])
    gram_inv = np.linalg.pinv(gram)

    def coords(rho):
        return gram_inv @ np.array([np.vdot(b, rho).real for b in basis])

    def build(t):
        return sum(ti * b for ti, b in zip(t, basis))

    # start strictly inside if the maximally mixed state's projection allows it
    t = coords(start)
    centre = coords(np.eye(dl) / dl)
    centre = centre / (c @ centre) if abs(c @ centre) > 1e-12 else t
    for lam in (1.0, 0.5, 0.25, 0.1, 0.01):
        trial = (1 - lam) * t + lam * centre
        if np.linalg.eigvalsh(build(trial)).min() > 1e-12:
            t = trial
            break
    ent = von_neumann_entropy(build(t))
    cc = c @ gram_inv @ c
    for _ in range(2000):
        rho = build(t)
        w, v = np.linalg.eigh(rho)
        log_rho = (v * np.log(np.clip(w, 1e-300, None))) @ v.conj().T
        g = np.array([-np.trace(b @ log_rho).real - np.trace(b).real for b in basis])
        # natural gradient in the basis metric, projected onto the trace-1 plane
        step = gram_inv @ g
        step = step - (c @ step) / cc * (gram_inv @ c)
        if np.linalg.norm(step) < 1e-12:
            break
        eta, improved = 1.0, False
        while eta > 1e-12:
            trial = t + eta * step
            tr = build(trial)
            if np.linalg.eigvalsh(tr).min() > 0:
                new_ent = von_neumann_entropy(tr)
                if new_ent >= ent:
                    improved = True
                    break
            eta /= 2
        if not improved:
            break
        t, delta, ent = trial, new_ent - ent, new_ent
        if delta < 1e-12:
            break
    return build(t)


def fixed_points(u: Operator, rho_cr: Operator, max_iterations: int = tol.DEUTSCH_MAX_ITERATIONS) -> DeutschSolution:
    """Fixed point of the Deutsch map by averaged iteration, cross-checked spectrally."""
    dc, dl = _split(u, rho_cr)
    ue, rc = u.entries, rho_cr.entries

    def d(rho):
        return _apply(ue, rc, rho, dc, dl)

    rho = np.eye(dl, dtype=complex) / dl
    avg = rho.copy()
    found, iterations = None, 0
    for n in range(1, max_iterations + 1):
        for cand in (rho, avg):
            if _trace_norm(d(cand) - cand) <= tol.DEUTSCH_RESIDUAL:
                found = cand
                break
        if found is not None:
            iterations = n - 1
            break
        rho = d(rho)
        avg = avg + (rho - avg) / (n + 1)
        iterations = n
    converged = found is not None

    s = superoperator(u, rho_cr)
    basis = _hermitian_fixed_basis(s, dl)
    multiplicity = len(basis)
    if multiplicity == 0:
        raise ArithmeticError("no eigenvalue-1 direction found; the map is not trace preserving?")

    spectral = None
    if multiplicity == 1:
        b = basis[0]
        spectral = b / np.trace(b).real

    if converged:
        fixed, method = found, "iteration"
    elif spectral is not None:
        fixed, method = spectral, "spectral"
    else:
        # non-converged with a degenerate fixed space: best averaged iterate projected into the space
        fixed, method = avg, "spectral"

    selected = False
    if multiplicity > 1:
        fixed = _max_entropy(basis, fixed, dl)
        selected = True
    fixed = (fixed + fixed.conj().T) / 2
    fixed = fixed / np.trace(fixed).real

    agreement = None
    if spectral is not None and converged:
        agreement = trace_distance(spectral, found)
    residual = _trace_norm(d(fixed) - fixed)
    return DeutschSolution(
        Operator(fixed, (dl,)),
        residual,
        iterations,
        multiplicity,
        selected,
        converged,
        method,
        agreement,
    )


def circuit_deutsch(
    circuit: Circuit, loop_wire: str, overrides: Mapping[str, object] | None = None
) -> tuple[Operator, Operator, tuple[str, ...]]:
    """Deutsch data for a circuit: ``(U, rho_CR, CR wire ids)``.

    ``loop_wire`` is the past mouth of a loop; its future partner and the
    postselection are dropped. Every other wire is chronology-respecting.
    """
    check(circuit)
    loops = {p: f for p, f in circuit.loops().values()}
    if loop_wire not in loops:
        raise ValueError(f"{loop_wire!r} is not the past wire of a loop")
    future = loops[loop_wire]
    for i, g in enumerate(circuit.gates):
        if future in g.wires:
            raise ValueError(f"gate[{i}] acts on the future-mouth wire {future!r}")
    other_loops = [w for pf in circuit.loops().values() for w in pf if w not in (loop_wire, future)]
    if other_loops:
        raise ValueError("Deutsch semantics here handles a single loop")
    cr = tuple(w for w in circuit.ids if w not in (loop_wire, future))
    for w in cr:
        init = circuit.wire(w).init
        if isinstance(init, BellInit) and init.partner not in cr:
            raise ValueError(f"wire {w!r} is entangled with the loop at preparation")
    psi = initial_state(circuit, overrides, exclude=(loop_wire, future)).amplitudes
    psi = psi / np.linalg.norm(psi)
    rho_cr = Operator(np.outer(psi, psi.conj()), tuple(circuit.wire(w).dim for w in cr))
    order = cr + (loop_wire,)
    u = compile_unitary(circuit, order)
    return u, rho_cr, cr

