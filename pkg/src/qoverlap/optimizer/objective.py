"""Cost functions over circuits, with cheap single-gate restrictions.

``local(circuit, i)`` freezes every gate except the one-qubit gate at
position ``i`` and returns the cost as a function of that gate's matrix,
evaluated on a stack of shape (B, 2, 2).  The environment is contracted
once, so each call afterwards costs O(B N) instead of a full simulation.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .. import qsim
from ..algospec import Algorithm, Circuit, Resources
from ..training import TrainingSet

LocalCost = Callable[[np.ndarray], np.ndarray]


def _outcome_index(n_total: int, measured: Sequence[int]) -> np.ndarray:
    b = np.arange(2**n_total)
    idx = np.zeros_like(b)
    for i, q in enumerate(measured):
        idx |= ((b >> q) & 1) << i
    return idx


def _split(arr: np.ndarray, q: int, n: int) -> np.ndarray:
    """View a (2**n, ...) array as (hi, 2, lo, ...) around qubit q."""
    return arr.reshape((2 ** (n - 1 - q), 2, 2**q) + arr.shape[1:])


class OverlapObjective:
    """Sum of squared errors between outputs c.p and the training targets."""

    def __init__(self, resources: Resources, data: TrainingSet, coeffs: Sequence[int] | None = None):
        self.resources = resources
        self.n = resources.n_total
        inputs = data.inputs()
        if inputs.shape[0] != 2**resources.n_data:
            raise ValueError("training data does not match the data register")
        self.X = np.zeros((2**self.n, inputs.shape[1]), dtype=complex)
        self.X[: inputs.shape[0]] = inputs
        self.targets = np.asarray(data.targets, dtype=float)
        self._outcome = _outcome_index(self.n, resources.measured)
        self.weights = np.zeros(2**self.n)
        if coeffs is not None:
            self.set_post(coeffs)

    def set_post(self, coeffs: Sequence[int]) -> None:
        self.weights = np.asarray(coeffs, dtype=float)[self._outcome]

    def outputs(self, circuit: Circuit) -> np.ndarray:
        Y = qsim.apply_gates(self.X, circuit.gates, self.n)
        return self.weights @ (Y.real**2 + Y.imag**2)

    def value(self, circuit: Circuit) -> float:
        r = self.targets - self.outputs(circuit)
        return float(r @ r)

    def local(self, circuit: Circuit, i: int) -> LocalCost:
        g = circuit.gates[i]
        q = g.qubits[0]
        n = self.n
        left = qsim.apply_gates(self.X, circuit.gates[:i], n)
        R = qsim.circuit_unitary(circuit.gates[i + 1 :], n)
        O = R.conj().T @ (self.weights[:, None] * R)
        a = _split(left, q, n)  # (h, s, l, i)
        N = a.shape[-1]
        # column (T, S, i) holds a[:, S, :, i] placed at qubit value T
        emb = np.zeros(a.shape[:3] + (2, 2, N), dtype=complex)
        for T in (0, 1):
            emb[:, T, :, T] = a.transpose(0, 2, 1, 3)
        emb = emb.reshape(2**n, 4 * N)
        O_emb = (O @ emb).reshape(-1, 4, N)
        emb = emb.reshape(-1, 4, N)
        # K[i, ab] with y_i = sum_ab conj(v_a) K[i, a, b] v_b, v = vec(U)
        K = np.einsum("xai,xbi->iab", emb.conj(), O_emb).reshape(N, 16).T.copy()
        targets = self.targets

        def f(us: np.ndarray) -> np.ndarray:
            v = us.reshape(-1, 4)
            y = ((v.conj()[:, :, None] * v[:, None, :]).reshape(-1, 16) @ K).real
            r = targets - y
            return np.einsum("bi,bi->b", r, r)

        return f


class MatchObjective:
    """1 - |Tr(W^dagger V)| / 2^q between the circuit unitary W and a target V."""

    def __init__(self, target: np.ndarray):
        self.target = np.asarray(target, dtype=complex)
        self.dim = self.target.shape[0]
        self.n = self.dim.bit_length() - 1

    def value(self, circuit: Circuit) -> float:
        W = qsim.circuit_unitary(circuit.gates, self.n)
        return float(1.0 - abs(np.vdot(W, self.target)) / self.dim)

    def local(self, circuit: Circuit, i: int) -> LocalCost:
        g = circuit.gates[i]
        q = g.qubits[0]
        n = self.n
        L = qsim.circuit_unitary(circuit.gates[:i], n)
        R = qsim.circuit_unitary(circuit.gates[i + 1 :], n)
        E = R.conj().T @ self.target @ L.conj().T
        hi, lo = 2 ** (n - 1 - q), 2**q
        E_red = np.einsum("htlhsl->ts", E.reshape(hi, 2, lo, hi, 2, lo))
        dim = self.dim

        e = E_red.reshape(4)

        def f(us: np.ndarray) -> np.ndarray:
            return 1.0 - np.abs(us.reshape(-1, 4).conj() @ e) / dim

        return f


def overlap_objective(alg: Algorithm, data: TrainingSet) -> OverlapObjective:
    return OverlapObjective(alg.resources, data, alg.post.coeffs)
