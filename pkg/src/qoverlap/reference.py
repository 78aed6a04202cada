"""Known overlap circuits at arbitrary size, an exact overlap oracle, and noisy runs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import qsim
from .algospec import (
    Algorithm,
    Circuit,
    InvalidInputError,
    PostProcessing,
    Resources,
    pair_density,
)
from .hardware import gateset_ibmqx4, gateset_rigetti19
from .qsim import GateInstance, GateKind, cnot, fixed_matrix, gate, zyz_angles
from .rewrite import fuse_single_qubit_runs, map_to_gateset, toffoli

NAMES = (
    "SWAP_TEST",
    "SWAP_TEST_IBM",
    "SWAP_TEST_RIGETTI",
    "ABA",
    "ABA_IBM",
    "ABA_RIGETTI",
    "BBA",
    "BBA_TOFFOLI",
)

Z_EXPECTATION = PostProcessing((1, -1))


class InvalidCutError(ValueError):
    pass


@dataclass(frozen=True)
class NamedAlgorithm:
    name: str
    n: int
    algorithm: Algorithm

    @property
    def circuit(self) -> Circuit:
        return self.algorithm.circuit


def overlap_oracle(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Tr(rho sigma) by direct matrix product."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    if sigma.ndim == 1:
        sigma = np.outer(sigma, sigma.conj())
    if rho.shape != sigma.shape:
        raise InvalidInputError(f"dimension mismatch {rho.shape} vs {sigma.shape}")
    return float(np.einsum("ij,ji->", rho, sigma).real)


def _u(q: int, mat: np.ndarray) -> GateInstance:
    return GateInstance(GateKind.U, (q,), zyz_angles(mat))


_H = fixed_matrix(GateKind.H)
_T = fixed_matrix(GateKind.T)
_TDG = fixed_matrix(GateKind.TDG)
ABA_U = _TDG @ _H  # U = T^dagger H


def build_swap_test(n: int) -> NamedAlgorithm:
    """Ancilla-controlled SWAP per qubit pair, each as CNOT-Toffoli-CNOT."""
    _check_n(n)
    anc = 2 * n
    gates = [gate(GateKind.H, anc)]
    for k in range(n):
        p, q = 2 * k, 2 * k + 1
        gates += [cnot(q, p), *toffoli(anc, p, q), cnot(q, p)]
    gates.append(gate(GateKind.H, anc))
    circuit = fuse_single_qubit_runs(gates)
    alg = Algorithm(Resources.measure_ancilla(n), circuit, Z_EXPECTATION)
    return NamedAlgorithm("SWAP_TEST", n, alg)


def aba_gates(pairs: Sequence[tuple[int, int]], anc: int) -> list[GateInstance]:
    """Ancilla-based overlap circuit: two boundary gates plus six gates per pair."""
    gates = [_u(anc, _H @ _T @ _H)]
    for p, q in pairs:
        gates += [
            cnot(p, q),
            cnot(anc, p),
            _u(anc, ABA_U),
            cnot(q, anc),
            _u(anc, ABA_U.conj().T),
            cnot(anc, p),
        ]
    gates.append(_u(anc, _H @ _TDG @ _H))
    return gates


def build_aba(n: int) -> NamedAlgorithm:
    _check_n(n)
    pairs = [(2 * k, 2 * k + 1) for k in range(n)]
    circuit = Circuit(tuple(aba_gates(pairs, 2 * n)))
    alg = Algorithm(Resources.measure_ancilla(n), circuit, Z_EXPECTATION)
    return NamedAlgorithm("ABA", n, alg)


def bba_gates(n: int) -> list[GateInstance]:
    gates = []
    for k in range(n):
        gates += [cnot(2 * k, 2 * k + 1), gate(GateKind.H, 2 * k)]
    return gates


def build_bba(n: int) -> NamedAlgorithm:
    """CNOT then Hadamard per pair, every qubit measured, c = (1,1,1,-1)^n."""
    _check_n(n)
    res = Resources(2 * n, 0, tuple(range(2 * n)))
    alg = Algorithm(res, Circuit(tuple(bba_gates(n))), PostProcessing.from_kron((1, 1, 1, -1), n))
    return NamedAlgorithm("BBA", n, alg)


def build_bba_toffoli(n: int) -> NamedAlgorithm:
    """BBA with its post-processing replaced by Toffolis onto one ancilla."""
    _check_n(n)
    anc = 2 * n
    gates = bba_gates(n)
    for k in range(n):
        gates += toffoli(2 * k, 2 * k + 1, anc)
    circuit = fuse_single_qubit_runs(gates)
    alg = Algorithm(Resources.measure_ancilla(n), circuit, Z_EXPECTATION)
    return NamedAlgorithm("BBA_TOFFOLI", n, alg)


def build_aba_ibm() -> NamedAlgorithm:
    """ABA on ibmqx4 qubits 0-2: one CNOT reversed, its spare Hadamards absorbed or pruned."""
    # pair orientation (P, Q) = (1, 0) makes three of the four CNOTs native
    base = Circuit(tuple(aba_gates([(1, 0)], 2)))
    circuit = map_to_gateset(base, gateset_ibmqx4(), measured=(2,))
    alg = Algorithm(Resources.measure_ancilla(1), circuit, Z_EXPECTATION)
    return NamedAlgorithm("ABA_IBM", 1, alg)


def chain_aba_gates(p: int, q: int, anc: int) -> list[GateInstance]:
    """Overlap via T-phases on the ancilla, using only p-anc and p-q couplings.

    The ancilla accumulates the phase pi/4 (t - t^p - t^q + t^p^q) over
    parities fed through the middle qubit ``p``.
    """
    H, T, Tdg = GateKind.H, GateKind.T, GateKind.TDG
    return [
        gate(H, anc), gate(T, anc),
        cnot(p, q), gate(H, p),
        cnot(p, anc), gate(Tdg, anc),
        cnot(q, p), cnot(p, anc), gate(Tdg, anc),
        cnot(q, p), cnot(p, anc), gate(T, anc),
        gate(H, anc),
    ]


def build_aba_rigetti(topology=None) -> NamedAlgorithm:
    """CZ-native ABA on a linear chain 0-1-2 with the ancilla at the end."""
    gs = gateset_rigetti19(topology)
    base = Circuit(tuple(chain_aba_gates(1, 0, 2)))
    circuit = map_to_gateset(base, gs, measured=(2,))
    alg = Algorithm(Resources.measure_ancilla(1), circuit, Z_EXPECTATION)
    return NamedAlgorithm("ABA_RIGETTI", 1, alg)


def build_swap_test_ibm() -> NamedAlgorithm:
    base = build_swap_test(1).circuit
    circuit = map_to_gateset(base, gateset_ibmqx4(), measured=(2,))
    alg = Algorithm(Resources.measure_ancilla(1), circuit, Z_EXPECTATION)
    return NamedAlgorithm("SWAP_TEST_IBM", 1, alg)


def build_swap_test_rigetti(topology=None) -> NamedAlgorithm:
    base = build_swap_test(1).circuit
    circuit = map_to_gateset(base, gateset_rigetti19(topology), measured=(2,))
    alg = Algorithm(Resources.measure_ancilla(1), circuit, Z_EXPECTATION)
    return NamedAlgorithm("SWAP_TEST_RIGETTI", 1, alg)


_FIXED_SIZE = {
    "SWAP_TEST_IBM": build_swap_test_ibm,
    "SWAP_TEST_RIGETTI": build_swap_test_rigetti,
    "ABA_IBM": build_aba_ibm,
    "ABA_RIGETTI": build_aba_rigetti,
}
_SCALABLE = {
    "SWAP_TEST": build_swap_test,
    "ABA": build_aba,
    "BBA": build_bba,
    "BBA_TOFFOLI": build_bba_toffoli,
}


def build_named(name: str, n: int = 1) -> NamedAlgorithm:
    key = name.upper()
    if key in _SCALABLE:
        return _SCALABLE[key](n)
    if key in _FIXED_SIZE:
        if n != 1:
            raise ValueError(f"{key} is defined for single-qubit inputs only")
        return _FIXED_SIZE[key]()
    raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(NAMES)}")


def _check_n(n: int) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")


# ---------------------------------------------------------------------------
# Schmidt rank
# ---------------------------------------------------------------------------


def operator_schmidt_coefficients(u: np.ndarray, cut: Sequence[int], n_qubits: int) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    a = sorted(set(int(q) for q in cut))
    if u.shape != (2**n_qubits, 2**n_qubits):
        raise InvalidCutError(f"matrix of shape {u.shape} is not a {n_qubits}-qubit operator")
    if not a or len(a) >= n_qubits or a[0] < 0 or a[-1] >= n_qubits:
        raise InvalidCutError(f"cut {cut} is not a proper subset of {n_qubits} qubits")
    b = [q for q in range(n_qubits) if q not in a]
    t = u.reshape((2,) * (2 * n_qubits))
    ax = lambda qs: [n_qubits - 1 - q for q in qs]  # noqa: E731
    rows_a, rows_b = ax(a), ax(b)
    perm = rows_a + [n_qubits + x for x in rows_a] + rows_b + [n_qubits + x for x in rows_b]
    m = np.transpose(t, perm).reshape(4 ** len(a), 4 ** len(b))
    return np.linalg.svd(m, compute_uv=False)


def schmidt_rank(u: np.ndarray, cut: Sequence[int], n_qubits: int | None = None, rel_tol: float = 1e-8) -> int:
    """Operator Schmidt rank of ``u`` across ``cut`` versus the remaining qubits."""
    u = np.asarray(u)
    if n_qubits is None:
        n_qubits = u.shape[0].bit_length() - 1
        if u.shape[0] != 2**n_qubits:
            raise InvalidCutError(f"dimension {u.shape[0]} is not a power of two")
    s = operator_schmidt_coefficients(u, cut, n_qubits)
    return int(np.sum(s > rel_tol * s[0]))


def controlled_swap_unitary() -> np.ndarray:
    """Controlled-SWAP on 3 qubits: control 2, swapping qubits 0 and 1."""
    u = np.zeros((8, 8))
    for b in range(8):
        if b >> 2:
            b2 = (b & 4) | ((b & 1) << 1) | ((b >> 1) & 1)
        else:
            b2 = b
        u[b2, b] = 1.0
    return u


# ---------------------------------------------------------------------------
# single-qubit experiment with depolarizing noise
# ---------------------------------------------------------------------------


def alpha_state_pair(alpha: float) -> tuple[np.ndarray, np.ndarray]:
    psi = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2)
    phi = np.array([1.0, np.exp(1j * alpha)], dtype=complex) / math.sqrt(2)
    return psi, phi


def noisy_output_probs(alg: Algorithm, rho_data: np.ndarray, noise_p: float) -> np.ndarray:
    """Measured-outcome probabilities with depolarizing noise after every gate."""
    n = alg.n_total
    n_anc = alg.resources.n_ancilla
    anc = np.zeros((2**n_anc, 2**n_anc))
    anc[0, 0] = 1.0
    rho = np.kron(anc, rho_data)
    for g in alg.circuit:
        m = g.matrix()
        rho = qsim.apply_matrix(rho, m, g.qubits, n)
        rho = qsim.apply_matrix(rho.conj().T, m, g.qubits, n).conj().T
        rho = qsim.depolarize_array(rho, g.qubits, noise_p, n)
    probs = np.clip(np.diag(rho).real, 0.0, None)
    return qsim.marginal(probs, alg.resources.measured, n)


@dataclass(frozen=True)
class Fig8Row:
    alpha: float
    estimate: float
    ideal: float

    @property
    def abs_error(self) -> float:
        return abs(self.estimate - self.ideal)


@dataclass(frozen=True)
class Fig8Result:
    name: str
    rows: tuple[Fig8Row, ...]

    @property
    def rms(self) -> float:
        return float(np.sqrt(np.mean([(r.estimate - r.ideal) ** 2 for r in self.rows])))

    @property
    def max_abs_error(self) -> float:
        return max(r.abs_error for r in self.rows)

    def to_csv(self) -> str:
        lines = ["alpha,estimate,ideal,abs_error"]
        for r in self.rows:
            lines.append(f"{r.alpha:.17g},{r.estimate:.17g},{r.ideal:.17g},{r.abs_error:.17g}")
        return "\n".join(lines) + "\n"


def default_alpha_grid(points: int = 21) -> np.ndarray:
    return np.linspace(0.0, 2.0 * np.pi, points)


def fig8_experiment(
    named: NamedAlgorithm,
    alphas: Sequence[float] | None = None,
    shots: int | None = 49152,
    noise_p: float = 0.0,
    seed=0,
) -> Fig8Result:
    """Estimate |<Phi|Psi>|^2 over an alpha grid; ``shots=None`` gives exact expectations."""
    if named.n != 1:
        raise ValueError("the two-state experiment uses single-qubit inputs")
    if not 0.0 <= noise_p < 1.0:
        raise ValueError("noise_p must be in [0, 1)")
    if shots is not None and shots < 1:
        raise ValueError("shots must be >= 1")
    alphas = default_alpha_grid() if alphas is None else np.asarray(alphas, dtype=float)
    rng = np.random.default_rng(seed)
    alg = named.algorithm
    rows = []
    for alpha in alphas:
        psi, phi = alpha_state_pair(alpha)
        rho = pair_density(np.outer(psi, psi.conj()), np.outer(phi, phi.conj()))
        probs = noisy_output_probs(alg, rho, noise_p)
        if shots is None:
            est = float(alg.post.as_array() @ probs)
        else:
            outcomes = qsim.sample_shots(probs, shots, rng)
            est = float(np.mean(alg.post.coefficients_for(outcomes)))
        rows.append(Fig8Row(float(alpha), est, math.cos(alpha / 2) ** 2))
    return Fig8Result(named.name, tuple(rows))
