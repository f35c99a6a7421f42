import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pctclab import tolerances as tol
from pctclab.linalg import (
    H,
    I2,
    X,
    Z,
    AmplitudeVector,
    Operator,
    bell_state,
    eig,
    fidelity,
    haar_unitary,
    is_density,
    named_state,
    partial_trace,
    projector,
    tensor_product,
    trace_distance,
)

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def test_product_of_basis_states():
    out = tensor_product(named_state("zero"), named_state("one"))
    assert np.array_equal(out.amplitudes, [0, 1, 0, 0])
    assert out.dims == (2, 2)


def test_product_of_uniform_states():
    out = tensor_product(named_state("plus"), named_state("plus"))
    np.testing.assert_allclose(out.amplitudes, [0.5] * 4, atol=1e-15)


def test_psi_plus_times_phi_plus_support():
    # oracle: expand (|10>+|01>)(|00>+|11>)/2 term by term
    oracle = (ket("1000") + ket("1011") + ket("0100") + ket("0111")) / 2
    out = tensor_product(bell_state("psi_plus"), bell_state("phi_plus"))
    np.testing.assert_allclose(out.amplitudes, oracle, atol=1e-15)
    assert sorted(format(i, "04b") for i in np.flatnonzero(np.abs(out.amplitudes) > 1e-12)) == [
        "0100",
        "0111",
        "1000",
        "1011",
    ]


def test_mixed_kinds_rejected():
    with pytest.raises(TypeError):
        tensor_product(named_state("zero"), Operator(X))


def test_partial_trace_of_traceless_factor():
    out = partial_trace(Operator(np.kron(X, I2), (2, 2)), [1])
    assert np.array_equal(out.entries, np.zeros((2, 2)))


def test_phi_plus_marginal():
    rho = projector(bell_state("phi_plus"))
    np.testing.assert_allclose(partial_trace(rho, [0]).entries, I2 / 2, atol=1e-15)


def test_partial_trace_of_swap_is_identity():
    # brute force: sum_k (I (x) <k|) SWAP (I (x) |k>)
    oracle = sum(np.kron(I2, ket(k)[None, :]) @ SWAP @ np.kron(I2, ket(k)[:, None]) for k in "01")
    np.testing.assert_allclose(oracle, I2)
    np.testing.assert_allclose(partial_trace(Operator(SWAP, (2, 2)), [0]).entries, oracle)


def test_empty_keep_gives_full_trace():
    m = np.arange(16).reshape(4, 4).astype(complex)
    out = partial_trace(Operator(m, (2, 2)), [])
    assert out.entries.shape == (1, 1)
    assert out.entries[0, 0] == np.trace(m)


def test_partial_trace_bad_index():
    with pytest.raises(IndexError):
        partial_trace(Operator(SWAP, (2, 2)), [2])


def test_partial_trace_keeps_ascending_order_on_qutrits():
    rng = np.random.default_rng(0)
    a, b, c = (rng.normal(size=(d, d)) for d in (2, 3, 2))
    big = Operator(np.kron(np.kron(a, b), c), (2, 3, 2))
    np.testing.assert_allclose(partial_trace(big, [2, 0]).entries, np.kron(a, c) * np.trace(b), atol=1e-12)


def test_eig_z():
    pairs = eig(Operator(Z))
    assert [round(l.real, 12) for l, _ in pairs] == [1.0, -1.0]
    assert fidelity(pairs[0][1], named_state("zero")) == pytest.approx(1)
    assert fidelity(pairs[1][1], named_state("one")) == pytest.approx(1)


def test_eig_plus_projector():
    (l0, v0), (l1, v1) = eig(projector(named_state("plus")))
    assert abs(l0 - 1) < 1e-12 and abs(l1) < 1e-12
    assert fidelity(v0, named_state("plus")) >= 1 - tol.FIDELITY
    assert fidelity(v1, named_state("minus")) >= 1 - tol.FIDELITY


def test_eig_fig1a_operator():
    (l0, v0), (l1, v1) = eig(Operator(I2 + X))
    assert abs(l0 - 2) < 1e-12 and abs(l1) < 1e-12
    assert fidelity(v0, named_state("plus")) >= 1 - tol.FIDELITY


def test_eig_non_hermitian_sorted_by_magnitude():
    m = np.array([[0.1, 1], [0, -3]], dtype=complex)
    lams = [l for l, _ in eig(Operator(m))]
    assert abs(lams[0] + 3) < 1e-12 and abs(lams[1] - 0.1) < 1e-12


def test_eig_dimension_limit():
    with pytest.raises(ValueError):
        eig(Operator(np.eye(4097)))


def test_unitary_tag_checked():
    with pytest.raises(ValueError):
        Operator(np.array([[1, 1], [0, 1]]), tag="unitary")
    Operator(H, tag="unitary")


def test_normalized_tag_checked():
    with pytest.raises(ValueError):
        AmplitudeVector([1, 1], normalized=True)


def test_dims_must_multiply():
    with pytest.raises(ValueError):
        Operator(np.eye(4), (2, 3))


def test_arrays_are_read_only():
    v = named_state("plus")
    with pytest.raises(ValueError):
        v.amplitudes[0] = 3


def test_fidelity_ignores_global_phase():
    v = named_state("minus_i")
    assert fidelity(v, np.exp(0.7j) * v.amplitudes) == pytest.approx(1, abs=1e-15)


def test_trace_distance_orthogonal():
    a = projector(named_state("plus"))
    b = projector(named_state("minus"))
    assert trace_distance(a, b) == pytest.approx(1)


def _unitaries(d):
    return st.integers(0, 2**32 - 1).map(lambda s: haar_unitary(d, np.random.default_rng(s)))


def _densities(d):
    def build(seed):
        rng = np.random.default_rng(seed)
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        r = g @ g.conj().T
        return r / np.trace(r).real

    return st.integers(0, 2**32 - 1).map(build)


@settings(max_examples=40, deadline=None)
@given(_unitaries(8), _densities(8))
def test_trace_preserved_under_conjugation(u, rho):
    out = Operator(u @ rho @ u.conj().T, (2, 2, 2))
    assert abs(partial_trace(out, []).entries[0, 0] - np.trace(rho)) <= tol.TRACE
    assert abs(np.trace(partial_trace(out, [1]).entries) - 1) <= tol.TRACE


@settings(max_examples=40, deadline=None)
@given(_densities(2), _densities(3))
def test_partial_trace_of_product(a, b):
    out = partial_trace(Operator(np.kron(a, b), (2, 3)), [0])
    assert np.max(np.abs(out.entries - a * np.trace(b))) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(_densities(4))
def test_eig_reconstructs_hermitian(rho):
    rebuilt = sum(l * np.outer(v.amplitudes, v.amplitudes.conj()) for l, v in eig(Operator(rho)))
    assert np.max(np.abs(rebuilt - rho)) <= tol.EIG_RECONSTRUCTION
    assert is_density(rho)


@settings(max_examples=25, deadline=None)
@given(_unitaries(2), _unitaries(2), _unitaries(2))
def test_tensor_product_associative(a, b, c):
    a, b, c = Operator(a), Operator(b), Operator(c)
    left = tensor_product(tensor_product(a, b), c).entries
    right = tensor_product(a, tensor_product(b, c)).entries
    assert np.max(np.abs(left - right)) <= 1e-14
