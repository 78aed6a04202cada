"""Gate sets with connectivity, and the fixed one-qubit gates of Rigetti circuits."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .qsim import GateInstance, GateKind, rx, rz

PI = np.pi


class InvalidResourcesError(ValueError):
    pass


class TopologyParseError(ValueError):
    def __init__(self, lineno: int, reason: str):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason


@dataclass(frozen=True)
class GateSet:
    """Allowed gates: parametric one-qubit gates plus one directed two-qubit kind."""

    name: str
    n_qubits: int
    two_qubit_kind: GateKind
    allowed_pairs: frozenset[tuple[int, int]]
    one_qubit_slots: frozenset[int]

    def __post_init__(self):
        if self.two_qubit_kind not in (GateKind.CNOT, GateKind.CZ):
            raise InvalidResourcesError(f"unsupported two-qubit kind {self.two_qubit_kind}")
        for j, k in self.allowed_pairs:
            if j == k or not (0 <= j < self.n_qubits and 0 <= k < self.n_qubits):
                raise InvalidResourcesError(f"bad pair ({j}, {k}) for {self.n_qubits} qubits")
        if set(self.one_qubit_slots) != set(range(self.n_qubits)):
            raise InvalidResourcesError("every qubit must admit a parametric one-qubit gate")

    def sorted_pairs(self) -> list[tuple[int, int]]:
        return sorted(self.allowed_pairs)

    def allows(self, g: GateInstance) -> bool:
        if g.is_two_qubit:
            return g.kind is self.two_qubit_kind and tuple(g.qubits) in self.allowed_pairs
        return g.kind is GateKind.U and g.qubits[0] in self.one_qubit_slots

    def restrict(self, qubits: Iterable[int]) -> "GateSet":
        """Gate set on a subset of qubits, relabelled to 0..k-1 in sorted order."""
        qs = sorted(qubits)
        index = {q: i for i, q in enumerate(qs)}
        pairs = frozenset(
            (index[a], index[b]) for a, b in self.allowed_pairs if a in index and b in index
        )
        return GateSet(f"{self.name}|{qs}", len(qs), self.two_qubit_kind, pairs, frozenset(range(len(qs))))

    def neighbours(self, q: int) -> set[int]:
        return {b for a, b in self.allowed_pairs if a == q} | {a for a, b in self.allowed_pairs if b == q}


def gateset_ideal(n_qubits: int) -> GateSet:
    """Full connectivity with CNOT in both directions between all qubits."""
    if n_qubits < 2:
        raise InvalidResourcesError(f"need at least 2 qubits, got {n_qubits}")
    pairs = frozenset((j, k) for j in range(n_qubits) for k in range(n_qubits) if j != k)
    return GateSet("ideal", n_qubits, GateKind.CNOT, pairs, frozenset(range(n_qubits)))


IBMQX4_PAIRS = frozenset({(1, 0), (2, 0), (2, 1), (3, 2), (2, 4), (3, 4)})


def gateset_ibmqx4() -> GateSet:
    return GateSet("ibmqx4", 5, GateKind.CNOT, IBMQX4_PAIRS, frozenset(range(5)))


def parse_topology(text: str) -> list[tuple[int, int]]:
    """Parse ``EDGE j k`` lines into undirected edges."""
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] != "EDGE":
            raise TopologyParseError(lineno, f"unknown record {parts[0]!r}")
        if len(parts) != 3:
            raise TopologyParseError(lineno, "EDGE takes exactly two qubit indices")
        try:
            j, k = int(parts[1]), int(parts[2])
        except ValueError:
            raise TopologyParseError(lineno, "qubit indices must be integers") from None
        if j < 0 or k < 0:
            raise TopologyParseError(lineno, "negative qubit index")
        if j == k:
            raise TopologyParseError(lineno, "self-loop edge")
        edges.append((j, k))
    if not edges:
        raise TopologyParseError(0, "topology has no edges")
    return edges


def default_topology_text() -> str:
    return resources.files("qoverlap.data").joinpath("rigetti_line.topology").read_text()


def gateset_rigetti19(topology: str | Path | None = None) -> GateSet:
    """CZ gate set whose connectivity comes from a topology file.

    ``topology`` may be a path or the file contents; ``None`` loads the
    shipped default (a linear chain).
    """
    if topology is None:
        text = default_topology_text()
    elif isinstance(topology, Path) or (isinstance(topology, str) and "\n" not in topology and Path(topology).exists()):
        text = Path(topology).read_text()
    else:
        text = str(topology)
    edges = parse_topology(text)
    n = max(max(e) for e in edges) + 1
    pairs = frozenset(edges) | frozenset((k, j) for j, k in edges)
    return GateSet("rigetti19", n, GateKind.CZ, pairs, frozenset(range(n)))


def gateset_by_name(name: str, n_qubits: int | None = None, topology=None) -> GateSet:
    if name == "ideal":
        return gateset_ideal(n_qubits if n_qubits is not None else 2)
    if name == "ibmqx4":
        return gateset_ibmqx4()
    if name == "rigetti19":
        return gateset_rigetti19(topology)
    raise InvalidResourcesError(f"unknown hardware {name!r}")


# ---------------------------------------------------------------------------
# Rigetti fixed gates
# ---------------------------------------------------------------------------

S_PULSE = rx(PI / 2)  # exp(-i pi/4 X)
S_PULSE_DG = S_PULSE.conj().T

# stored to the digits available; comparisons against them use 1e-3
RIGETTI_ALPHAS = (-0.6544 * PI, 0.7857 * PI, 0.1544 * PI, 0.2143 * PI)


def rigetti_fixed_gate(kind: str, alpha: float | None = None) -> np.ndarray:
    """``"RZ"`` with an angle, or ``"S"`` / ``"SDG"`` for the X pulse."""
    if kind == "RZ":
        if alpha is None:
            raise ValueError("RZ needs an angle")
        return rz(alpha)
    if kind == "S":
        return S_PULSE.copy()
    if kind == "SDG":
        return S_PULSE_DG.copy()
    raise ValueError(f"unknown Rigetti gate {kind!r}")


def _prod(*mats: np.ndarray) -> np.ndarray:
    out = np.eye(2, dtype=complex)
    for m in mats:
        out = out @ m
    return out


def rigetti_swaptest_oneq_gates() -> list[np.ndarray]:
    """The 22 one-qubit gates U_1..U_22 of the compiled Rigetti Swap Test (index 0 is U_1)."""
    S, Sd, R = S_PULSE, S_PULSE_DG, rz
    a1, a2, a3, a4 = RIGETTI_ALPHAS
    g = {}
    g[1] = g[2] = _prod(S, R(-3 * PI / 4), S)
    g[3] = _prod(S, R(-PI / 2))
    g[4] = _prod(Sd, R(PI / 4), S, R(PI / 2))
    g[5] = _prod(S, R(a1), S, R(-PI / 2))
    g[6] = _prod(Sd, R(a2), S, R(3 * PI / 4))
    g[7] = _prod(Sd, R(-PI / 2))
    g[8] = g[9] = g[12] = S
    g[14] = g[18] = g[21] = Sd
    g[10] = _prod(Sd, R(PI / 4), S, R(-PI / 2))
    g[11] = _prod(Sd, R(a3), S)
    g[13] = _prod(Sd, R(a4))
    g[15] = _prod(S, R(PI / 4), Sd, R(PI))
    g[16] = _prod(S, R(-3 * PI / 4), S, R(PI / 2))
    g[17] = _prod(S, R(-PI / 4))
    g[19] = g[20] = _prod(S, R(PI))
    g[22] = _prod(R(-PI / 2), S, R(PI / 4))
    return [np.array(g[i]) for i in range(1, 23)]


def rigetti_aba_oneq_gates() -> list[np.ndarray]:
    """One-qubit gates U_1..U_10 listed for the Rigetti-adapted ancilla algorithm."""
    H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    T = np.diag([1, np.exp(0.25j * PI)])
    Tdg = T.conj()
    XH = X @ H
    g = {}
    g[1] = g[8] = H
    g[2] = g[3] = XH
    g[6] = g[7] = XH.conj().T
    g[4] = rx(-PI / 4) @ T
    g[5] = Tdg @ H @ T
    g[9] = rx(PI / 4)
    g[10] = rx(-3 * PI / 4)
    return [np.array(g[i]) for i in range(1, 11)]


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-12) -> bool:
    d = a.shape[0]
    return abs(abs(np.trace(a.conj().T @ b)) - d) <= tol * d
