import numpy as np
import pytest

from hyqgnn.errors import IndexOutOfRange, LayoutMismatch, TooLong, ZeroVector
from hyqgnn.quantum import (
    QuantumParams,
    amplitude_encode,
    apply_ansatz,
    apply_cnot,
    apply_readout,
    apply_single,
    basis_state,
    circuit_predict,
    circuit_text,
    pauli_z_expectation,
    rx,
    ry,
    rz,
    z_expectations,
)

from oracles import ansatz_unitary, cnot_matrix, dense_circuit_predict, embed, readout_unitary, rotation


def random_state(rng, n=5):
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return psi / np.linalg.norm(psi)


def random_params(rng, layers=2, n=5):
    return QuantumParams(rng.uniform(-np.pi, np.pi, (layers, n)), rng.uniform(-np.pi, np.pi, (n, 3)),
                         rng.normal(), rng.normal())


def test_basis_vector_encoding():
    x = np.zeros(32)
    x[0] = 1.0
    np.testing.assert_array_equal(amplitude_encode(x), basis_state(0))


def test_uniform_encoding():
    np.testing.assert_allclose(amplitude_encode(np.ones(32)), np.full(32, 1 / np.sqrt(32)), atol=1e-15)


def test_encoding_pads(rng):
    x = rng.normal(size=25)
    psi = amplitude_encode(x)
    np.testing.assert_allclose(psi[:25].real, x / np.sqrt(np.sum(x**2)), atol=1e-12)
    assert np.all(psi[25:] == 0)


def test_encoding_errors():
    with pytest.raises(ZeroVector):
        amplitude_encode(np.zeros(25))
    with pytest.raises(ZeroVector):
        amplitude_encode(np.full(4, 1e-14))
    with pytest.raises(TooLong):
        amplitude_encode(np.ones(33))


def test_encoding_scale_invariance(rng):
    x = rng.normal(size=20)
    np.testing.assert_array_equal(amplitude_encode(x), amplitude_encode(x * 4.0))


def test_gates_match_kronecker(rng):
    for _ in range(20):
        psi = random_state(rng)
        theta = rng.uniform(-4, 4)
        q = int(rng.integers(5))
        for gate, axis in ((rx, "x"), (ry, "y"), (rz, "z")):
            dense = embed(rotation(axis, theta), q, 5) @ psi
            np.testing.assert_allclose(apply_single(psi, gate(theta), q, 5), dense, atol=1e-12)
        c, t = rng.choice(5, 2, replace=False)
        np.testing.assert_allclose(apply_cnot(psi, c, t, 5), cnot_matrix(c, t, 5) @ psi, atol=1e-12)


def test_big_endian_convention():
    x_gate = rx(np.pi)
    psi = apply_single(basis_state(0), x_gate, 0, 5)
    assert abs(psi[16]) == pytest.approx(1.0)  # qubit 0 is the top bit


def test_ansatz_identity_on_vacuum():
    np.testing.assert_allclose(apply_ansatz(basis_state(0), np.zeros((2, 5))), basis_state(0), atol=1e-15)


def test_single_qubit_ry_pi():
    psi = apply_ansatz(basis_state(0, 1), [[np.pi]], 1)
    assert abs(abs(psi[1]) - 1.0) < 1e-12


def test_ansatz_matches_dense(rng):
    for _ in range(20):
        psi = random_state(rng)
        thetas = rng.uniform(-np.pi, np.pi, (2, 5))
        out = apply_ansatz(psi, thetas)
        np.testing.assert_allclose(out, ansatz_unitary(thetas, 5) @ psi, atol=1e-10)
        assert abs(np.linalg.norm(out) - 1) < 1e-10


def test_readout_identity(rng):
    psi = random_state(rng)
    np.testing.assert_allclose(apply_readout(psi, np.zeros((5, 3))), psi, atol=1e-15)


def test_readout_x_flip():
    psi = apply_readout(basis_state(0, 1), [[np.pi, 0, 0]], 1)
    assert abs(abs(psi[1]) - 1.0) < 1e-12


def test_readout_matches_dense(rng):
    for _ in range(20):
        psi = random_state(rng)
        angles = rng.uniform(-np.pi, np.pi, (5, 3))
        np.testing.assert_allclose(apply_readout(psi, angles), readout_unitary(angles, 5) @ psi, atol=1e-10)


def test_z_expectation_vacuum():
    for q in range(5):
        assert pauli_z_expectation(basis_state(0), q) == 1.0


def test_z_expectation_flipped():
    for q in range(5):
        assert pauli_z_expectation(basis_state(1 << (4 - q)), q) == -1.0


def test_z_expectation_balanced():
    psi = np.array([1, 1], dtype=complex) / np.sqrt(2)
    assert abs(pauli_z_expectation(psi, 0)) < 1e-12


def test_z_expectation_bad_index():
    with pytest.raises(IndexOutOfRange):
        pauli_z_expectation(basis_state(0), 5)


def test_z_expectations_bounded(rng):
    z = z_expectations(np.stack([random_state(rng) for _ in range(50)]))
    assert np.all(np.abs(z) <= 1 + 1e-12)


def test_params_roundtrip(rng):
    assert QuantumParams.size(5, 2) == 27
    vec = rng.normal(size=27)
    np.testing.assert_array_equal(QuantumParams.from_flat(vec).to_flat(), vec)
    with pytest.raises(LayoutMismatch):
        QuantumParams.from_flat(np.zeros(26))


def test_zero_scale_returns_offset(rng):
    qp = QuantumParams(rng.normal(size=(2, 5)), rng.normal(size=(5, 3)), 0.0, -1.25)
    assert circuit_predict(rng.normal(size=(5, 5)), qp) == -1.25


def test_identity_matrix_against_dense():
    qp = QuantumParams(np.zeros((2, 5)), np.zeros((5, 3)))
    assert circuit_predict(np.eye(5), qp) == pytest.approx(
        dense_circuit_predict(np.eye(5), np.zeros((2, 5)), np.zeros((5, 3)), 1.0, 0.0), abs=1e-12)


def test_prediction_bounds(rng):
    for _ in range(50):
        qp = random_params(rng)
        w = rng.normal(size=(5, 5))
        y = circuit_predict(w + w.T, qp)
        assert qp.offset - abs(qp.scale) - 1e-12 <= y <= qp.offset + abs(qp.scale) + 1e-12


def test_batched_prediction_matches_single(rng):
    qp = random_params(rng)
    ws = rng.normal(size=(7, 5, 5))
    batch = circuit_predict(ws, qp)
    np.testing.assert_allclose(batch, [circuit_predict(w, qp) for w in ws], atol=1e-14)


def test_circuit_dump(rng):
    text = circuit_text(random_params(rng))
    lines = text.splitlines()
    assert lines[0] == "INIT amplitude_encode 5"
    assert sum(line.startswith("CNOT") for line in lines) == 10
    assert sum(line.startswith("MEASURE") for line in lines) == 5
