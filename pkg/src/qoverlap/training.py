"""Haar-random training data and the squared-error cost."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algospec import Algorithm, InvalidInputError, evaluate_batch, pair_batch
from .qsim import StateVector

ZERO_COST = 1e-6


def haar_vector(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    v = rng.standard_normal(2**n_qubits) + 1j * rng.standard_normal(2**n_qubits)
    return v / np.linalg.norm(v)


def haar_state(n_qubits: int, seed) -> StateVector:
    """Normalized complex Gaussian vector; Haar distributed over pure states."""
    return StateVector(n_qubits, haar_vector(n_qubits, np.random.default_rng(seed)))


def auto_size(n: int) -> int:
    # 2^(2 n_D) with n_D = 2n data qubits
    return 2 ** (4 * n)


@dataclass(frozen=True)
class TrainingSet:
    """2N Haar pairs; the first N train, the remaining N test."""

    n: int
    psis: np.ndarray
    phis: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        for a in (self.psis, self.phis, self.targets):
            a.setflags(write=False)

    def __len__(self) -> int:
        return len(self.targets)

    @property
    def N(self) -> int:
        return len(self.targets) // 2

    @property
    def train(self) -> "TrainingSet":
        return self._slice(slice(0, self.N))

    @property
    def test(self) -> "TrainingSet":
        return self._slice(slice(self.N, 2 * self.N))

    def _slice(self, s: slice) -> "TrainingSet":
        return TrainingSet(self.n, self.psis[s].copy(), self.phis[s].copy(), self.targets[s].copy())

    def inputs(self) -> np.ndarray:
        """Joint data-register states as columns, pairs interleaved qubit by qubit."""
        return pair_batch(self.psis, self.phis)

    def to_text(self) -> str:
        lines = []
        for psi, phi, t in zip(self.psis, self.phis, self.targets):
            a = " ".join(f"{z.real:.17g} {z.imag:.17g}" for z in psi)
            b = " ".join(f"{z.real:.17g} {z.imag:.17g}" for z in phi)
            lines.append(f"PAIR {a} | {b} | {t:.17g}")
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "TrainingSet":
        psis, phis, targets = [], [], []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if not line.startswith("PAIR"):
                raise ValueError(f"line {lineno}: expected PAIR record")
            parts = line[4:].split("|")
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: PAIR needs two states and a target separated by '|'")
            try:
                vecs = []
                for chunk in parts[:2]:
                    nums = [float(x) for x in chunk.split()]
                    if len(nums) % 2:
                        raise ValueError
                    vecs.append(np.array(nums[0::2]) + 1j * np.array(nums[1::2]))
                target = float(parts[2])
            except ValueError:
                raise ValueError(f"line {lineno}: malformed numbers") from None
            psis.append(vecs[0])
            phis.append(vecs[1])
            targets.append(target)
        if not targets:
            raise ValueError("no PAIR records")
        dim = len(psis[0])
        n = dim.bit_length() - 1
        if dim != 2**n or any(len(v) != dim for v in psis + phis):
            raise ValueError("states must share a power-of-two dimension")
        return cls(n, np.array(psis), np.array(phis), np.array(targets))

    @classmethod
    def load(cls, path: str | Path) -> "TrainingSet":
        return cls.from_text(Path(path).read_text())


def make_training_set(n: int, N: int | str = "auto", seed=0) -> TrainingSet:
    """2N Haar pairs of n-qubit states with exact targets |<psi|phi>|^2."""
    if N == "auto":
        N = auto_size(n)
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    rng = np.random.default_rng(seed)
    dim = 2**n
    psis = np.empty((2 * N, dim), dtype=complex)
    phis = np.empty((2 * N, dim), dtype=complex)
    for i in range(2 * N):
        psis[i] = haar_vector(n, rng)
        phis[i] = haar_vector(n, rng)
    targets = np.abs(np.einsum("ij,ij->i", psis.conj(), phis)) ** 2
    return TrainingSet(n, psis, phis, targets)


def cost(alg: Algorithm, data: TrainingSet) -> float:
    """Sum over pairs of (target - output)^2, summed in index order."""
    if alg.resources.n_data != 2 * data.n:
        raise InvalidInputError(
            f"algorithm has {alg.resources.n_data} data qubits, data needs {2 * data.n}"
        )
    y = evaluate_batch(alg, data.inputs())
    r = data.targets - y
    return float(np.sum(r * r))
