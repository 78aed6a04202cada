import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qoverlap import qsim
from qoverlap.qsim import (
    DensityMatrix,
    GateInstance,
    GateKind,
    InvalidGateError,
    InvalidMeasurementError,
    StateVector,
    U,
    apply_circuit,
    apply_gate,
    circuit_unitary,
    cnot,
    cz,
    gate,
    measure_probs,
    one_qubit_unitary,
    sample_outcomes,
    zyz_angles,
)

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
I2 = np.eye(2)


def kron_embed(mat, q, n):
    # oracle: qubit 0 is the rightmost kron factor
    out = np.eye(1)
    for k in reversed(range(n)):
        out = np.kron(out, mat if k == q else I2)
    return out


def cnot_oracle(c, t, n):
    P0, P1 = np.diag([1, 0]), np.diag([0, 1])
    X = np.array([[0, 1], [1, 0]])
    return kron_embed(P0, c, n) + kron_embed(P1, c, n) @ kron_embed(X, t, n)


def random_gates(rng, n, depth):
    gates = []
    for _ in range(depth):
        if rng.random() < 0.4:
            a, b = rng.choice(n, 2, replace=False)
            gates.append(cnot(a, b) if rng.random() < 0.5 else cz(a, b))
        else:
            gates.append(U(int(rng.integers(n)), rng.uniform(-np.pi, np.pi, 3)))
    return gates


def test_x_flips_zero():
    out = apply_gate(StateVector.zero(1), gate("X", 0))
    assert np.allclose(out.amplitudes, [0, 1])


def test_hadamard_on_zero():
    out = apply_gate(StateVector.zero(1), gate("H", 0))
    assert np.allclose(out.amplitudes, [2**-0.5, 2**-0.5])


def test_cnot_makes_bell_state():
    # (|00> + |10>)/sqrt2 in ket order |q1 q0>: control qubit 0 set in the second term
    psi = StateVector(2, np.array([1, 1, 0, 0]) / np.sqrt(2))
    out = apply_gate(psi, cnot(0, 1))
    assert np.allclose(out.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_out_of_range_gate():
    with pytest.raises(InvalidGateError):
        apply_gate(StateVector.zero(2), cnot(0, 2))
    with pytest.raises(InvalidGateError):
        circuit_unitary([gate("H", 3)], 2)


def test_gate_validation():
    with pytest.raises(InvalidGateError):
        GateInstance(GateKind.CNOT, (1, 1))
    with pytest.raises(InvalidGateError):
        GateInstance(GateKind.U, (0,), (1.0,))
    with pytest.raises(InvalidGateError):
        GateInstance(GateKind.H, (0, 1))


def test_one_qubit_unitary_identity():
    assert np.allclose(one_qubit_unitary((0, 0, 0)), I2, atol=1e-15)


def test_one_qubit_unitary_hadamard():
    # Euler angles of H found by brute force over a pi/4 grid, then frozen
    grid = np.arange(-4, 5) * np.pi / 4
    hits = [
        (a, b, c) for a in grid for b in grid for c in grid
        if abs(abs(np.trace((qsim.rz(c) @ qsim.ry(b) @ qsim.rz(a)).conj().T @ H)) - 2) < 1e-12
    ]
    assert (np.pi, np.pi / 2, 0.0) in hits
    u = one_qubit_unitary((np.pi, np.pi / 2, 0.0))
    assert abs(abs(np.trace(u.conj().T @ H)) - 2) < 1e-12


def test_one_qubit_unitary_is_zyz_product():
    a, b, c = 0.3, -1.1, 2.5
    expect = qsim.rz(c) @ qsim.ry(b) @ qsim.rz(a)
    assert np.allclose(one_qubit_unitary((a, b, c)), expect, atol=1e-14)


@given(st.tuples(*[st.floats(-10, 10)] * 3))
def test_one_qubit_unitary_is_unitary(p):
    u = one_qubit_unitary(p)
    assert np.max(np.abs(u.conj().T @ u - I2)) < 1e-14


@given(st.tuples(*[st.floats(-10, 10)] * 3))
def test_zyz_round_trip(p):
    u = one_qubit_unitary(p)
    v = one_qubit_unitary(zyz_angles(u))
    assert abs(abs(np.trace(v.conj().T @ u)) - 2) < 1e-10


def test_batched_unitaries_match():
    rng = np.random.default_rng(3)
    p = rng.uniform(-4, 4, (7, 3))
    stack = qsim.one_qubit_unitaries(p)
    for row, m in zip(p, stack):
        assert np.allclose(m, one_qubit_unitary(row), atol=1e-15)


def test_measure_probs_examples():
    assert np.allclose(measure_probs(StateVector.zero(2), [0, 1]).probs, [1, 0, 0, 0])
    plus = apply_gate(StateVector.zero(1), gate("H", 0))
    assert np.allclose(measure_probs(plus, [0]).probs, [0.5, 0.5])
    bell = StateVector(2, np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert np.allclose(measure_probs(bell, [1, 0]).probs, [0.5, 0, 0, 0.5])


def test_measure_probs_outcome_bit_order():
    # qubit 2 set, qubit 0 clear: measuring (0, 2) gives outcome index 0b10
    psi = StateVector.basis(3, 0b100)
    pv = measure_probs(psi, [2, 0])
    assert pv.measured_qubits == (0, 2)
    assert np.allclose(pv.probs, [0, 0, 1, 0])


def test_measure_probs_errors():
    psi = StateVector.zero(2)
    with pytest.raises(InvalidMeasurementError):
        measure_probs(psi, [])
    with pytest.raises(InvalidMeasurementError):
        measure_probs(psi, [0, 0])
    with pytest.raises(InvalidMeasurementError):
        measure_probs(psi, [2])


def test_sample_outcomes_deterministic_state():
    hist = sample_outcomes(StateVector.zero(2), [0, 1], 1000, 1)
    assert hist[0] == 1000 and hist.sum() == 1000


def test_sample_outcomes_binomial():
    shots = 10**6
    plus = apply_gate(StateVector.zero(1), gate("H", 0))
    hist = sample_outcomes(plus, [0], shots, 7)
    sigma = 0.5 / np.sqrt(shots)
    assert abs(hist[0] / shots - 0.5) < 5 * sigma


def test_sample_outcomes_seeded():
    psi = StateVector(2, np.full(4, 0.5))
    a = sample_outcomes(psi, [0, 1], 500, 42)
    b = sample_outcomes(psi, [0, 1], 500, 42)
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        sample_outcomes(psi, [0], 0, 1)


def test_circuit_unitary_examples():
    assert np.allclose(circuit_unitary([], 2), np.eye(4))
    assert np.max(np.abs(circuit_unitary([gate("H", 0), gate("H", 0)], 1) - I2)) < 1e-14


def test_circuit_unitary_matches_kron_oracle():
    rng = np.random.default_rng(11)
    n = 3
    gates = random_gates(rng, n, 12)
    expect = np.eye(2**n)
    for g in gates:
        if g.kind is GateKind.CNOT:
            m = cnot_oracle(*g.qubits, n)
        elif g.kind is GateKind.CZ:
            a, b = g.qubits
            m = np.diag([(-1) ** (((i >> a) & (i >> b)) & 1) for i in range(2**n)])
        else:
            m = kron_embed(g.matrix(), g.qubits[0], n)
        expect = m @ expect
    assert np.allclose(circuit_unitary(gates, n), expect, atol=1e-12)


def test_two_qubit_matrix_convention():
    # a generic 4x4 on (a, b) treats the first listed qubit as the high bit
    rng = np.random.default_rng(2)
    m = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    psi = rng.normal(size=8) + 0j
    out = qsim.apply_matrix(psi, m, (2, 0), 3)
    t = psi.reshape(2, 2, 2)  # axes q2, q1, q0
    expect = np.einsum("abcd,cxd->axb", m.reshape(2, 2, 2, 2), t).reshape(-1)
    assert np.allclose(out, expect)


def test_norm_preserved_over_random_circuits():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 5))
        gates = random_gates(rng, n, 50) if n > 1 else [U(0, rng.uniform(-3, 3, 3)) for _ in range(50)]
        v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        out = apply_circuit(StateVector(n, v / np.linalg.norm(v)), gates)
        worst = max(worst, abs(1 - np.vdot(out.amplitudes, out.amplitudes).real))
    assert worst < 1e-10


def test_pure_and_mixed_agree():
    rng = np.random.default_rng(5)
    gates = random_gates(rng, 3, 20)
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi = StateVector(3, v / np.linalg.norm(v))
    out_v = apply_circuit(psi, gates).amplitudes
    out_rho = apply_circuit(psi.density(), gates).matrix
    assert np.max(np.abs(out_rho - np.outer(out_v, out_v.conj()))) < 1e-10


def test_full_measurement_is_squared_amplitudes():
    rng = np.random.default_rng(8)
    v = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi = StateVector(4, v / np.linalg.norm(v))
    assert np.max(np.abs(measure_probs(psi, range(4)).probs - np.abs(psi.amplitudes) ** 2)) < 1e-12


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(1, np.array([[1, 1], [0, 0]]))
    with pytest.raises(ValueError):
        StateVector(1, np.array([1, 1]))
    rho = DensityMatrix.maximally_mixed(2)
    assert np.allclose(measure_probs(rho, [1]).probs, [0.5, 0.5])


@settings(max_examples=30)
@given(st.floats(0, 1), st.integers(0, 2))
def test_depolarize_matches_pauli_twirl(p, q):
    # oracle: full depolarizing on one qubit = (1 - 3p/4) rho + p/4 sum_P P rho P
    rng = np.random.default_rng(1)
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    paulis = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    expect = (1 - 3 * p / 4) * rho
    for P in paulis:
        E = kron_embed(P, q, 3)
        expect = expect + p / 4 * E @ rho @ E
    out = qsim.depolarize_array(rho, [q], p, 3)
    assert np.max(np.abs(out - expect)) < 1e-12
