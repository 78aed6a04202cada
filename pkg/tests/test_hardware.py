import numpy as np
import pytest

from qoverlap.hardware import (
    RIGETTI_ALPHAS,
    S_PULSE,
    InvalidResourcesError,
    TopologyParseError,
    equal_up_to_phase,
    gateset_by_name,
    gateset_ibmqx4,
    gateset_ideal,
    gateset_rigetti19,
    parse_topology,
    rigetti_aba_oneq_gates,
    rigetti_fixed_gate,
    rigetti_swaptest_oneq_gates,
)
from qoverlap.qsim import GateKind, U, cnot, cz, rx, rz


def test_ideal_pair_counts():
    assert len(gateset_ideal(3).allowed_pairs) == 6
    assert gateset_ideal(2).allowed_pairs == {(0, 1), (1, 0)}
    assert len(gateset_ideal(5).allowed_pairs) == 20
    assert gateset_ideal(4).one_qubit_slots == set(range(4))


def test_ideal_needs_two_qubits():
    with pytest.raises(InvalidResourcesError):
        gateset_ideal(1)


def test_ibmqx4_pairs():
    gs = gateset_ibmqx4()
    assert gs.n_qubits == 5
    assert gs.two_qubit_kind is GateKind.CNOT
    assert gs.allowed_pairs == {(1, 0), (2, 0), (2, 1), (3, 2), (2, 4), (3, 4)}
    assert gs.allows(cnot(1, 0))
    assert not gs.allows(cnot(0, 1))
    assert gs.allows(U(4))


def test_rigetti_default_topology():
    gs = gateset_rigetti19()
    assert gs.two_qubit_kind is GateKind.CZ
    line = {(0, 1), (1, 2), (2, 3)}
    assert gs.allowed_pairs == line | {(b, a) for a, b in line}
    assert all((b, a) in gs.allowed_pairs for a, b in gs.allowed_pairs)
    assert gs.allows(cz(2, 1)) and not gs.allows(cz(0, 2))


def test_rigetti_topology_from_text_and_file(tmp_path):
    text = "# ring\nEDGE 0 1\n\nEDGE 1 2  # middle\nEDGE 2 0\n"
    assert gateset_rigetti19(text).n_qubits == 3
    path = tmp_path / "ring.topology"
    path.write_text(text)
    assert len(gateset_rigetti19(path).allowed_pairs) == 6


@pytest.mark.parametrize(
    "text, line",
    [("EDGE 0 1\nEDGE 1\n", 2), ("EDGE 0 x\n", 1), ("NODE 3\n", 1), ("EDGE 2 2\n", 1), ("\n\nEDGE -1 0\n", 3)],
)
def test_topology_errors_carry_line(text, line):
    with pytest.raises(TopologyParseError) as e:
        parse_topology(text)
    assert e.value.lineno == line


def test_restrict_relabels():
    gs = gateset_ibmqx4().restrict([2, 3, 4])
    assert gs.n_qubits == 3
    assert gs.allowed_pairs == {(1, 0), (0, 2), (1, 2)}


def test_gateset_by_name():
    assert gateset_by_name("ideal", 3).n_qubits == 3
    assert gateset_by_name("ibmqx4").name == "ibmqx4"
    with pytest.raises(InvalidResourcesError):
        gateset_by_name("d-wave")


def test_rz_zero_is_identity():
    assert np.allclose(rigetti_fixed_gate("RZ", 0.0), np.eye(2))


def test_s_pulse_squared():
    ss = rigetti_fixed_gate("S") @ rigetti_fixed_gate("S")
    assert np.allclose(ss, -1j * np.array([[0, 1], [1, 0]]))
    assert np.allclose(np.abs(ss), [[0, 1], [1, 0]])


def test_swaptest_gates():
    g = rigetti_swaptest_oneq_gates()
    assert len(g) == 22
    S, Sd = S_PULSE, S_PULSE.conj().T
    assert np.allclose(g[3], Sd @ rz(np.pi / 4) @ S @ rz(np.pi / 2))
    assert np.allclose(g[7], S)
    assert np.allclose(g[0], g[1])
    assert np.allclose(g[13], Sd)
    for m in g:
        assert np.max(np.abs(m.conj().T @ m - np.eye(2))) < 1e-12


def test_alphas_match_stated_digits():
    expect = np.array([-0.6544, 0.7857, 0.1544, 0.2143]) * np.pi
    assert np.allclose(RIGETTI_ALPHAS, expect, atol=1e-3)


def test_aba_rigetti_gates():
    g = rigetti_aba_oneq_gates()
    assert len(g) == 10
    assert equal_up_to_phase(g[8], rx(np.pi / 4))
    T = np.diag([1, np.exp(0.25j * np.pi)])
    assert equal_up_to_phase(g[3], rx(-np.pi / 4) @ T)
    for m in g:
        assert np.max(np.abs(m.conj().T @ m - np.eye(2))) < 1e-12


def test_equal_up_to_phase():
    assert equal_up_to_phase(np.exp(0.7j) * np.eye(2), np.eye(2))
    assert not equal_up_to_phase(np.diag([1, -1]), np.eye(2))
