"""Dense complex linear algebra over tensor-product spaces.

Basis convention: subsystem 0 is the most significant digit of the flat
basis index, so ``|q0 q1 ... qn>`` sits at index ``q0*d1*...*dn + ...``.
Every routine in the package uses this ordering.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import unitary_group

from . import tolerances as tol

__all__ = [
    "AmplitudeVector",
    "Operator",
    "EigenDecompositionError",
    "tensor_product",
    "partial_trace",
    "adjoint",
    "projector",
    "eig",
    "fidelity",
    "trace_distance",
    "is_unitary",
    "is_density",
    "named_state",
    "bell_state",
    "haar_unitary",
    "random_state",
    "I2",
    "X",
    "Y",
    "Z",
    "H",
]

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


class EigenDecompositionError(RuntimeError):
    """The eigen-solver failed to converge."""


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


def _check_dims(dims: Sequence[int], size: int) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 2 for d in dims):
        raise ValueError(f"subsystem dimensions must be >= 2, got {dims}")
    if prod(dims) != size:
        raise ValueError(f"dims {dims} do not multiply to {size}")
    return dims


@dataclass(frozen=True, eq=False)
class AmplitudeVector:
    """State vector over subsystems ``dims``; not necessarily normalized."""

    amplitudes: np.ndarray
    dims: tuple[int, ...] = field(default=())
    normalized: bool = False

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        dims = self.dims if self.dims else ((amps.size,) if amps.size > 1 else ())
        object.__setattr__(self, "dims", _check_dims(dims, amps.size))
        object.__setattr__(self, "amplitudes", _frozen(amps))
        if self.normalized and abs(np.linalg.norm(amps) - 1) > tol.NORMALIZATION:
            raise ValueError("vector tagged normalized has norm %r" % np.linalg.norm(amps))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "AmplitudeVector":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("cannot normalize the zero vector")
        return AmplitudeVector(self.amplitudes / n, self.dims, normalized=True)

    def __repr__(self):
        return f"AmplitudeVector(dims={self.dims}, amplitudes={np.round(self.amplitudes, 6).tolist()})"


@dataclass(frozen=True, eq=False)
class Operator:
    """Square matrix acting on subsystems ``dims``.

    ``tag`` may be ``"unitary"`` or ``"density"``; tagged operators are
    checked on construction.
    """

    entries: np.ndarray
    dims: tuple[int, ...] = field(default=())
    tag: str | None = None

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        dims = self.dims if self.dims else ((m.shape[0],) if m.shape[0] > 1 else ())
        object.__setattr__(self, "dims", _check_dims(dims, m.shape[0]))
        object.__setattr__(self, "entries", _frozen(m))
        if self.tag == "unitary" and not is_unitary(m):
            raise ValueError("operator tagged unitary fails U U^dag = I")
        if self.tag == "density" and not is_density(m):
            raise ValueError("operator tagged density is not a valid density matrix")
        if self.tag not in (None, "unitary", "density"):
            raise ValueError(f"unknown tag {self.tag!r}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other):
        if isinstance(other, Operator):
            if other.dims != self.dims:
                raise ValueError(f"dims mismatch {self.dims} vs {other.dims}")
            return Operator(self.entries @ other.entries, self.dims)
        if isinstance(other, AmplitudeVector):
            if other.dims != self.dims:
                raise ValueError(f"dims mismatch {self.dims} vs {other.dims}")
            return AmplitudeVector(self.entries @ other.amplitudes, self.dims)
        return NotImplemented

    def __repr__(self):
        return f"Operator(dims={self.dims}, tag={self.tag})"


def is_unitary(m: np.ndarray, atol: float = tol.UNITARITY) -> bool:
    m = np.asarray(m)
    return bool(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))) <= atol)


def is_density(m: np.ndarray, atol: float = tol.DENSITY) -> bool:
    m = np.asarray(m)
    if np.max(np.abs(m - m.conj().T)) > atol:
        return False
    if abs(np.trace(m) - 1) > atol:
        return False
    return bool(np.linalg.eigvalsh((m + m.conj().T) / 2).min() >= -atol)


def tensor_product(a, b):
    """Kronecker product, left operand's subsystems first."""
    if isinstance(a, AmplitudeVector) and isinstance(b, AmplitudeVector):
        return AmplitudeVector(np.kron(a.amplitudes, b.amplitudes), a.dims + b.dims)
    if isinstance(a, Operator) and isinstance(b, Operator):
        return Operator(np.kron(a.entries, b.entries), a.dims + b.dims)
    raise TypeError(
        f"tensor_product needs two vectors or two operators, got "
        f"{type(a).__name__} and {type(b).__name__}"
    )


def partial_trace(op: Operator, keep: Iterable[int]) -> Operator:
    """Trace out every subsystem not in ``keep``.

    Kept subsystems stay in ascending order. An empty ``keep`` returns the
    1x1 full trace.
    """
    keep = sorted(set(int(k) for k in keep))
    n = len(op.dims)
    for k in keep:
        if not 0 <= k < n:
            raise IndexError(f"subsystem {k} out of range for {n} subsystems")
    t = op.entries.reshape(op.dims + op.dims)
    traced = [i for i in range(n) if i not in keep]
    # einsum subscripts: rows i0..i(n-1), columns j0..j(n-1), with traced j == i
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise ValueError("too many subsystems for partial_trace")
    rows = list(letters[:n])
    cols = [rows[i] if i in traced else letters[n + i] for i in range(n)]
    out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
    reduced = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    kept_dims = tuple(op.dims[k] for k in keep)
    size = prod(kept_dims)
    return Operator(reduced.reshape(size, size), kept_dims)


def adjoint(op: Operator) -> Operator:
    return Operator(op.entries.conj().T, op.dims)


def projector(vec: AmplitudeVector) -> Operator:
    a = vec.amplitudes
    return Operator(np.outer(a, a.conj()), vec.dims)


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    # largest component made real-positive; ties broken by the first index
    k = int(np.argmax(np.round(np.abs(v), 12)))
    if abs(v[k]) == 0:
        return v
    return v * (abs(v[k]) / v[k])


def eig(op: Operator) -> list[tuple[complex, AmplitudeVector]]:
    """Eigenpairs sorted by descending ``|lambda|`` (then descending real part).

    Hermitian inputs use the Hermitian solver so eigenvectors come out
    orthonormal. Eigenvectors are unit-norm with a canonical global phase.
    """
    m = op.entries
    if m.shape[0] > 2**12:
        raise ValueError("eig supports dimension <= 4096")
    try:
        if np.max(np.abs(m - m.conj().T), initial=0.0) <= tol.UNITARITY:
            values, vectors = np.linalg.eigh((m + m.conj().T) / 2)
            values = values.astype(complex)
        else:
            values, vectors = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise EigenDecompositionError(str(exc)) from exc
    order = sorted(
        range(len(values)),
        key=lambda i: (-round(abs(values[i]), 12), -round(values[i].real, 12), -round(values[i].imag, 12)),
    )
    pairs = []
    for i in order:
        v = vectors[:, i]
        v = _canonical_phase(v / np.linalg.norm(v))
        pairs.append((complex(values[i]), AmplitudeVector(v, op.dims)))
    return pairs


def fidelity(a, b) -> float:
    """Phase-insensitive overlap ``|<a|b>|^2 / (|a|^2 |b|^2)``."""
    va = a.amplitudes if isinstance(a, AmplitudeVector) else np.asarray(a, dtype=complex)
    vb = b.amplitudes if isinstance(b, AmplitudeVector) else np.asarray(b, dtype=complex)
    na, nb = np.vdot(va, va).real, np.vdot(vb, vb).real
    if na == 0 or nb == 0:
        return 0.0
    return float(abs(np.vdot(va, vb)) ** 2 / (na * nb))


def trace_distance(rho, sigma) -> float:
    r = rho.entries if isinstance(rho, Operator) else np.asarray(rho)
    s = sigma.entries if isinstance(sigma, Operator) else np.asarray(sigma)
    d = r - s
    return float(0.5 * np.abs(np.linalg.eigvalsh((d + d.conj().T) / 2)).sum())


_S2 = 1 / np.sqrt(2)
_NAMED = {
    "zero": [1, 0],
    "one": [0, 1],
    "plus": [_S2, _S2],
    "minus": [_S2, -_S2],
    "plus_i": [_S2, 1j * _S2],
    "minus_i": [_S2, -1j * _S2],
}


def named_state(name: str) -> AmplitudeVector:
    """One of the six cardinal qubit states (``zero``, ``plus``, ``minus_i``...)."""
    try:
        return AmplitudeVector(np.array(_NAMED[name], dtype=complex), (2,), normalized=True)
    except KeyError:
        raise ValueError(f"unknown state name {name!r}") from None


def bell_state(which: str, d: int = 2) -> AmplitudeVector:
    """``phi_plus`` = sum_k |kk>/sqrt(d); ``psi_plus`` = (|01>+|10>)/sqrt(2)."""
    v = np.zeros(d * d, dtype=complex)
    if which == "phi_plus":
        v[[k * d + k for k in range(d)]] = 1 / np.sqrt(d)
    elif which == "psi_plus":
        if d != 2:
            raise ValueError("psi_plus is defined for qubits only")
        v[[1, 2]] = _S2
    else:
        raise ValueError(f"unknown Bell state {which!r}")
    return AmplitudeVector(v, (d, d), normalized=True)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(d, random_state=rng)


def random_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)
