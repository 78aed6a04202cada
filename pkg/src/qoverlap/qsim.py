"""Dense state-vector and density-matrix simulation.

Basis index ``b`` stores qubit ``q`` in bit ``(b >> q) & 1``; qubit 0 is the
least significant bit.  Gate matrices for two-qubit gates are written in the
basis ``|first second>`` with the first listed qubit as the high bit, so
``CNOT`` acting on ``(control, target)`` has the textbook matrix.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

MAX_QUBITS = 12

SQRT1_2 = 1.0 / np.sqrt(2.0)


class InvalidGateError(ValueError):
    pass


class InvalidMeasurementError(ValueError):
    pass


class GateKind(enum.Enum):
    CNOT = "CNOT"
    CZ = "CZ"
    H = "H"
    T = "T"
    TDG = "TDG"
    X = "X"
    SPULSE = "SPULSE"
    RZ = "RZ"
    RX = "RX"
    U = "U"

    @property
    def n_qubits(self) -> int:
        return 2 if self in (GateKind.CNOT, GateKind.CZ) else 1

    @property
    def n_params(self) -> int:
        return _N_PARAMS.get(self, 0)


_N_PARAMS = {GateKind.RZ: 1, GateKind.RX: 1, GateKind.U: 3}

TWO_QUBIT_KINDS = frozenset({GateKind.CNOT, GateKind.CZ})


def rz(angle: float) -> np.ndarray:
    """exp(-i angle Z / 2)."""
    return np.array(
        [[np.exp(-0.5j * angle), 0.0], [0.0, np.exp(0.5j * angle)]], dtype=complex
    )


def ry(angle: float) -> np.ndarray:
    c, s = np.cos(0.5 * angle), np.sin(0.5 * angle)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rx(angle: float) -> np.ndarray:
    c, s = np.cos(0.5 * angle), np.sin(0.5 * angle)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def one_qubit_unitary(params: Sequence[float]) -> np.ndarray:
    """Return Rz(p3) Ry(p2) Rz(p1) for ``params = (p1, p2, p3)``."""
    a, b, c = params
    ca, sa = np.cos(0.5 * b), np.sin(0.5 * b)
    # closed form of the ZYZ product, avoids two matmuls in the hot loop
    return np.array(
        [
            [np.exp(-0.5j * (a + c)) * ca, -np.exp(0.5j * (a - c)) * sa],
            [np.exp(-0.5j * (a - c)) * sa, np.exp(0.5j * (a + c)) * ca],
        ],
        dtype=complex,
    )


def one_qubit_unitaries(params: np.ndarray) -> np.ndarray:
    """Stack of :func:`one_qubit_unitary` for params of shape (B, 3)."""
    p = np.asarray(params, dtype=float)
    half = 0.5 * p
    ca, sa = np.cos(half[:, 1]), np.sin(half[:, 1])
    ep = np.exp(-1j * (half[:, 0] + half[:, 2]))
    em = np.exp(-1j * (half[:, 0] - half[:, 2]))
    return np.stack([ep * ca, -em.conj() * sa, em * sa, ep.conj() * ca], axis=1).reshape(-1, 2, 2)


def zyz_angles(u: np.ndarray) -> tuple[float, float, float]:
    """Inverse of :func:`one_qubit_unitary`, up to global phase."""
    u = np.asarray(u, dtype=complex)
    det = np.linalg.det(u)
    v = u / np.sqrt(det)  # now in SU(2)
    b = 2.0 * np.arctan2(abs(v[1, 0]), abs(v[0, 0]))
    if abs(v[0, 0]) < 1e-14:
        # a + c undetermined; put everything in a - c
        a_minus_c = -2.0 * np.angle(v[1, 0])
        return float(a_minus_c), float(b), 0.0
    if abs(v[1, 0]) < 1e-14:
        a_plus_c = -2.0 * np.angle(v[0, 0])
        return float(a_plus_c), float(b), 0.0
    a_plus_c = -2.0 * np.angle(v[0, 0])
    a_minus_c = -2.0 * np.angle(v[1, 0])
    a = 0.5 * (a_plus_c + a_minus_c)
    c = 0.5 * (a_plus_c - a_minus_c)
    return float(a), float(b), float(c)


_FIXED = {
    GateKind.CNOT: np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    GateKind.H: SQRT1_2 * np.array([[1, 1], [1, -1]], dtype=complex),
    GateKind.T: np.diag([1, np.exp(0.25j * np.pi)]),
    GateKind.TDG: np.diag([1, np.exp(-0.25j * np.pi)]),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.SPULSE: rx(0.5 * np.pi),
}
for _m in _FIXED.values():
    _m.setflags(write=False)


def fixed_matrix(kind: GateKind) -> np.ndarray:
    return _FIXED[kind]


@dataclass(frozen=True)
class GateInstance:
    kind: GateKind
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.qubits) != self.kind.n_qubits:
            raise InvalidGateError(
                f"{self.kind.value} acts on {self.kind.n_qubits} qubit(s), got {self.qubits}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise InvalidGateError(f"repeated qubit in {self.kind.value}{self.qubits}")
        if min(self.qubits) < 0:
            raise InvalidGateError(f"negative qubit index in {self.qubits}")
        if len(self.params) != self.kind.n_params:
            raise InvalidGateError(
                f"{self.kind.value} takes {self.kind.n_params} angle(s), got {len(self.params)}"
            )

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT_KINDS

    @property
    def is_parametric(self) -> bool:
        return self.kind is GateKind.U

    def matrix(self) -> np.ndarray:
        if self.kind is GateKind.U:
            return one_qubit_unitary(self.params)
        if self.kind is GateKind.RZ:
            return rz(self.params[0])
        if self.kind is GateKind.RX:
            return rx(self.params[0])
        return _FIXED[self.kind]


def U(q: int, params=(0.0, 0.0, 0.0)) -> GateInstance:
    return GateInstance(GateKind.U, (q,), tuple(params))


def cnot(c: int, t: int) -> GateInstance:
    return GateInstance(GateKind.CNOT, (c, t))


def cz(a: int, b: int) -> GateInstance:
    return GateInstance(GateKind.CZ, (a, b))


def gate(kind: str | GateKind, *qubits: int, params=()) -> GateInstance:
    return GateInstance(GateKind(kind), qubits, params)


# ---------------------------------------------------------------------------
# raw array kernels
# ---------------------------------------------------------------------------


def apply_matrix(arr: np.ndarray, mat: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Apply ``mat`` to the leading ``2**n`` axis of ``arr`` (extra trailing axes allowed)."""
    k = len(qubits)
    extra = arr.shape[1:]
    if k == 1:
        t = arr.reshape(2 ** (n - 1 - qubits[0]), 2, -1)
        return (mat @ t).reshape(arr.shape)
    t = arr.reshape((2,) * n + (-1,))
    axes = [n - 1 - q for q in qubits]
    t = np.moveaxis(t, axes, list(range(k)))
    moved_shape = t.shape
    t = (mat @ t.reshape(2**k, -1)).reshape(moved_shape)
    t = np.moveaxis(t, list(range(k)), axes)
    return t.reshape((2**n,) + extra)


def _check_gate(g: GateInstance, n: int) -> None:
    if max(g.qubits) >= n:
        raise InvalidGateError(f"gate {g.kind.value}{g.qubits} out of range for {n} qubits")


@functools.lru_cache(maxsize=None)
def _cnot_perm(c: int, t: int, n: int) -> np.ndarray:
    b = np.arange(2**n)
    return b ^ (((b >> c) & 1) << t)


@functools.lru_cache(maxsize=None)
def _cz_sign(a: int, b: int, n: int) -> np.ndarray:
    i = np.arange(2**n)
    return 1 - 2 * (((i >> a) & (i >> b)) & 1)


def apply_gates(arr: np.ndarray, gates: Sequence[GateInstance], n: int) -> np.ndarray:
    for g in gates:
        _check_gate(g, n)
        if g.kind is GateKind.CNOT:
            arr = arr[_cnot_perm(g.qubits[0], g.qubits[1], n)]
        elif g.kind is GateKind.CZ:
            sign = _cz_sign(g.qubits[0], g.qubits[1], n)
            arr = arr * sign.reshape((-1,) + (1,) * (arr.ndim - 1))
        else:
            arr = apply_matrix(arr, g.matrix(), g.qubits, n)
    return arr


def depolarize_array(rho: np.ndarray, qubits: Sequence[int], p: float, n: int) -> np.ndarray:
    """rho -> (1-p) rho + p (I/d_S (x) Tr_S rho) on the listed qubits."""
    if p == 0.0:
        return rho
    t = rho.reshape((2,) * (2 * n))
    rows = [chr(ord("a") + i) for i in range(n)]
    cols = [chr(ord("A") + i) for i in range(n)]
    s_axes = [n - 1 - q for q in qubits]
    rest = [i for i in range(n) if i not in s_axes]
    traced_cols = [rows[i] if i in s_axes else cols[i] for i in range(n)]
    rest_str = "".join(rows[i] for i in rest) + "".join(cols[i] for i in rest)
    reduced = np.einsum("".join(rows) + "".join(traced_cols) + "->" + rest_str, t)
    k = len(qubits)
    eye = np.eye(2**k).reshape((2,) * (2 * k)) / 2**k
    eye_str = "".join(rows[i] for i in s_axes) + "".join(cols[i] for i in s_axes)
    mixed = np.einsum(
        f"{eye_str},{rest_str}->" + "".join(rows) + "".join(cols), eye, reduced
    ).reshape(rho.shape)
    return (1.0 - p) * rho + p * mixed


# ---------------------------------------------------------------------------
# state types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.n_qubits < 1 or self.n_qubits > MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(f"expected {2**self.n_qubits} amplitudes, got {amps.shape[0]}")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state not normalized (norm^2 = {norm})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.n_qubits, np.outer(self.amplitudes, self.amplitudes.conj()))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class DensityMatrix:
    n_qubits: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        dim = 2**self.n_qubits
        if self.n_qubits < 1 or self.n_qubits > MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        if m.shape != (dim, dim):
            raise ValueError(f"expected {dim}x{dim} matrix, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise ValueError("density matrix not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise ValueError("density matrix trace != 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityMatrix":
        return cls(n_qubits, np.eye(2**n_qubits) / 2**n_qubits)

    def probabilities(self) -> np.ndarray:
        return np.clip(np.diag(self.matrix).real, 0.0, None)


State = Union[StateVector, DensityMatrix]


@dataclass(frozen=True)
class ProbabilityVector:
    measured_qubits: tuple[int, ...]
    probs: np.ndarray = field(repr=False)


def apply_gate(state: State, g: GateInstance) -> State:
    """Return the state after ``g`` (``U rho U^dagger`` for density matrices)."""
    n = state.n_qubits
    _check_gate(g, n)
    m = g.matrix()
    if isinstance(state, StateVector):
        return StateVector(n, apply_matrix(state.amplitudes, m, g.qubits, n))
    rho = apply_matrix(state.matrix, m, g.qubits, n)
    rho = apply_matrix(rho.conj().T, m, g.qubits, n).conj().T
    return DensityMatrix(n, rho)


def apply_circuit(state: State, gates: Sequence[GateInstance]) -> State:
    n = state.n_qubits
    if isinstance(state, StateVector):
        return StateVector(n, apply_gates(state.amplitudes, gates, n))
    rho = np.array(state.matrix)
    for g in gates:
        _check_gate(g, n)
        m = g.matrix()
        rho = apply_matrix(rho, m, g.qubits, n)
        rho = apply_matrix(rho.conj().T, m, g.qubits, n).conj().T
    return DensityMatrix(n, rho)


def circuit_unitary(gates: Sequence[GateInstance], n_qubits: int) -> np.ndarray:
    """Dense matrix of ``gates[-1] ... gates[0]``."""
    return apply_gates(np.eye(2**n_qubits, dtype=complex), gates, n_qubits)


def _check_measured(measured: Sequence[int], n: int) -> tuple[int, ...]:
    qs = tuple(int(q) for q in measured)
    if not qs:
        raise InvalidMeasurementError("no qubits to measure")
    if len(set(qs)) != len(qs):
        raise InvalidMeasurementError(f"duplicate measured qubit in {qs}")
    if min(qs) < 0 or max(qs) >= n:
        raise InvalidMeasurementError(f"measured qubit out of range in {qs}")
    return tuple(sorted(qs))


def marginal(probs: np.ndarray, measured: Sequence[int], n: int) -> np.ndarray:
    """Marginal over ``measured`` (sorted) from a full probability array.

    Trailing batch axes of ``probs`` are kept.
    """
    extra = probs.shape[1:]
    t = probs.reshape((2,) * n + extra)
    drop = tuple(n - 1 - q for q in range(n) if q not in measured)
    if drop:
        t = t.sum(axis=drop)
    return t.reshape((2 ** len(measured),) + extra)


def measure_probs(state: State, measured_qubits: Sequence[int]) -> ProbabilityVector:
    measured = _check_measured(measured_qubits, state.n_qubits)
    p = marginal(state.probabilities(), measured, state.n_qubits)
    return ProbabilityVector(measured, p)


def _clean(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def sample_outcomes(state: State, measured_qubits: Sequence[int], shots: int, rng_seed) -> np.ndarray:
    """Histogram of ``shots`` measurement outcomes, indexed like :func:`measure_probs`."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    pv = measure_probs(state, measured_qubits)
    rng = np.random.default_rng(rng_seed)
    return rng.multinomial(shots, _clean(pv.probs))


def sample_shots(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Individual outcome indices, one per shot."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    return rng.choice(len(probs), size=shots, p=_clean(probs))
