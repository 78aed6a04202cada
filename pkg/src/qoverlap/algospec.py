"""Algorithms as (gate sequence, angles, post-processing vector) plus resources.

Input convention: two n-qubit states are interleaved on the data register,
the first state on even qubits (0, 2, ...) and the second on odd qubits, so
the k-th qubit pair is ``(2k, 2k+1)``.  Ancillas follow the data qubits and
start in ``|0>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import qsim
from .qsim import DensityMatrix, GateInstance, GateKind, State, StateVector


class InvalidInputError(ValueError):
    pass


class InvalidAlgorithmError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, lineno: int, reason: str):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason


@dataclass(frozen=True)
class Resources:
    n_data: int
    n_ancilla: int
    measured: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "measured", tuple(sorted(int(q) for q in self.measured)))
        if self.n_data < 1 or self.n_ancilla < 0:
            raise InvalidAlgorithmError("need n_data >= 1 and n_ancilla >= 0")
        if not self.measured:
            raise InvalidAlgorithmError("measured set is empty")
        if len(set(self.measured)) != len(self.measured):
            raise InvalidAlgorithmError("duplicate measured qubit")
        if self.measured[0] < 0 or self.measured[-1] >= self.n_total:
            raise InvalidAlgorithmError(f"measured qubits {self.measured} out of range")

    @property
    def n_total(self) -> int:
        return self.n_data + self.n_ancilla

    @property
    def ancillas(self) -> tuple[int, ...]:
        return tuple(range(self.n_data, self.n_total))

    @classmethod
    def measure_ancilla(cls, n: int, n_ancilla: int = 1) -> "Resources":
        return cls(2 * n, n_ancilla, (2 * n,))

    @classmethod
    def measure_all(cls, n: int, n_ancilla: int = 1) -> "Resources":
        return cls(2 * n, n_ancilla, tuple(range(2 * n + n_ancilla)))


@dataclass(frozen=True)
class Circuit:
    gates: tuple[GateInstance, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __getitem__(self, i):
        return self.gates[i]

    @property
    def n_cnot(self) -> int:
        return sum(1 for g in self.gates if g.kind is GateKind.CNOT)

    @property
    def n_two_qubit(self) -> int:
        return sum(1 for g in self.gates if g.is_two_qubit)

    def qubits(self) -> set[int]:
        return {q for g in self.gates for q in g.qubits}

    def replace(self, i: int, g: GateInstance) -> "Circuit":
        gates = list(self.gates)
        gates[i] = g
        return Circuit(tuple(gates))

    def unitary(self, n_qubits: int) -> np.ndarray:
        return qsim.circuit_unitary(self.gates, n_qubits)

    def adjacency_violations(self) -> list[int]:
        """Indices of one-qubit gates whose previous gate on that wire is also one-qubit."""
        last: dict[int, GateInstance] = {}
        bad = []
        for i, g in enumerate(self.gates):
            if not g.is_two_qubit:
                prev = last.get(g.qubits[0])
                if prev is not None and not prev.is_two_qubit:
                    bad.append(i)
            for q in g.qubits:
                last[q] = g
        return bad

    def is_reduced(self) -> bool:
        return not self.adjacency_violations()

    def layers(self) -> list[list[GateInstance]]:
        """Greedy ASAP layering into sets of gates with disjoint support."""
        depth: dict[int, int] = {}
        layers: list[list[GateInstance]] = []
        for g in self.gates:
            lvl = max((depth.get(q, 0) for q in g.qubits), default=0)
            if lvl == len(layers):
                layers.append([])
            layers[lvl].append(g)
            for q in g.qubits:
                depth[q] = lvl + 1
        return layers


@dataclass(frozen=True)
class PostProcessing:
    """Coefficients over measurement outcomes, entries in {-1, 0, 1}.

    ``kron`` optionally records a tensor-factored form ``(factor, repeats)``
    meaning ``factor`` (length 4) raised to the ``repeats``-th tensor power
    over consecutive measured-qubit pairs.
    """

    coeffs: tuple[int, ...]
    kron: tuple[tuple[int, ...], int] | None = field(default=None, compare=False)

    def __post_init__(self):
        c = tuple(int(x) for x in self.coeffs)
        if any(x not in (-1, 0, 1) for x in c):
            raise InvalidAlgorithmError("post-processing coefficients must be in {-1, 0, 1}")
        n = len(c)
        if n < 2 or n & (n - 1):
            raise InvalidAlgorithmError(f"post-processing length {n} is not a power of two >= 2")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_kron(cls, factor: Sequence[int], repeats: int) -> "PostProcessing":
        factor = tuple(int(x) for x in factor)
        if len(factor) != 4 or repeats < 1:
            raise InvalidAlgorithmError("kron post-processing needs a length-4 factor and repeats >= 1")
        dense = np.array([1])
        f = np.array(factor)
        for _ in range(repeats):
            dense = np.kron(f, dense)
        return cls(tuple(int(x) for x in dense), (factor, repeats))

    @property
    def n_measured(self) -> int:
        return len(self.coeffs).bit_length() - 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    def coefficients_for(self, outcomes: np.ndarray) -> np.ndarray:
        """Coefficient of each outcome index; O(pairs) per outcome for kron forms."""
        outcomes = np.asarray(outcomes, dtype=np.int64)
        if self.kron is None:
            return self.as_array()[outcomes]
        factor, repeats = self.kron
        f = np.asarray(factor, dtype=float)
        out = np.ones(outcomes.shape)
        for k in range(repeats):
            out *= f[(outcomes >> (2 * k)) & 3]
        return out

    def with_coeffs(self, coeffs: Sequence[int]) -> "PostProcessing":
        return PostProcessing(tuple(coeffs))


@dataclass(frozen=True)
class Algorithm:
    resources: Resources
    circuit: Circuit
    post: PostProcessing

    def __post_init__(self):
        n = self.resources.n_total
        for g in self.circuit:
            if max(g.qubits) >= n:
                raise qsim.InvalidGateError(f"gate {g.kind.value}{g.qubits} out of range for {n} qubits")
        if len(self.post.coeffs) != 2 ** len(self.resources.measured):
            raise InvalidAlgorithmError(
                f"post vector has {len(self.post.coeffs)} entries, "
                f"expected {2 ** len(self.resources.measured)}"
            )

    @property
    def n_total(self) -> int:
        return self.resources.n_total

    def with_circuit(self, circuit: Circuit) -> "Algorithm":
        return Algorithm(self.resources, circuit, self.post)

    def with_post(self, post: PostProcessing) -> "Algorithm":
        return Algorithm(self.resources, self.circuit, post)


# ---------------------------------------------------------------------------
# input helpers
# ---------------------------------------------------------------------------


def _interleave_axes(n: int) -> list[int]:
    # outer product axes: [psi qubits n-1..0, phi qubits n-1..0]; target order
    # is joint qubits 2n-1..0 where joint 2k <- psi k and 2k+1 <- phi k
    order = []
    for j in reversed(range(2 * n)):
        k = j // 2
        order.append((n + (n - 1 - k)) if j % 2 else (n - 1 - k))
    return order


def pair_vector(psi: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Joint amplitudes with ``psi`` on even qubits and ``phi`` on odd qubits."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    phi = np.asarray(phi, dtype=complex).reshape(-1)
    n = psi.size.bit_length() - 1
    if psi.size != phi.size or psi.size != 2**n:
        raise InvalidInputError("input states must have equal power-of-two dimension")
    t = np.multiply.outer(psi.reshape((2,) * n), phi.reshape((2,) * n))
    return np.transpose(t, _interleave_axes(n)).reshape(-1)


def pair_batch(psis: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Columns are joint states for each pair; shape (4**n, N)."""
    psis = np.asarray(psis, dtype=complex)
    phis = np.asarray(phis, dtype=complex)
    N, dim = psis.shape
    n = dim.bit_length() - 1
    t = np.einsum("ia,ib->abi", psis, phis).reshape((2,) * (2 * n) + (N,))
    axes = _interleave_axes(n) + [2 * n]
    return np.transpose(t, axes).reshape(dim * dim, N)


def pair_density(rho: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Joint density matrix with ``rho`` on even qubits and ``sigma`` on odd ones."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    d = rho.shape[0]
    n = d.bit_length() - 1
    if sigma.shape != rho.shape or d != 2**n:
        raise InvalidInputError("input states must have equal power-of-two dimension")
    t = np.multiply.outer(rho.reshape((2,) * (2 * n)), sigma.reshape((2,) * (2 * n)))
    # axes: rho rows(n), rho cols(n), sigma rows(n), sigma cols(n)
    perm_rows = _interleave_axes(n)
    rows = [a if a < n else a + n for a in perm_rows]
    cols = [a + n for a in rows]
    return np.transpose(t, rows + cols).reshape(d * d, d * d)


def _as_joint(alg: Algorithm, state: State | np.ndarray) -> State:
    n_data = alg.resources.n_data
    if isinstance(state, np.ndarray):
        if state.shape[0] != 2**n_data:
            raise InvalidInputError(f"input has dimension {state.shape[0]}, algorithm expects {2**n_data}")
        state = StateVector(n_data, state) if state.ndim == 1 else DensityMatrix(n_data, state)
    if state.n_qubits != n_data:
        raise InvalidInputError(f"input has {state.n_qubits} qubits, algorithm expects {n_data}")
    n_anc = alg.resources.n_ancilla
    if not n_anc:
        return state
    if isinstance(state, StateVector):
        anc = np.zeros(2**n_anc)
        anc[0] = 1.0
        return StateVector(alg.n_total, np.kron(anc, state.amplitudes))
    anc = np.zeros((2**n_anc, 2**n_anc))
    anc[0, 0] = 1.0
    return DensityMatrix(alg.n_total, np.kron(anc, state.matrix))


def output_probs(alg: Algorithm, state: State | np.ndarray) -> np.ndarray:
    joint = _as_joint(alg, state)
    out = qsim.apply_circuit(joint, alg.circuit.gates)
    return qsim.measure_probs(out, alg.resources.measured).probs


def evaluate(alg: Algorithm, state: State | np.ndarray) -> float:
    """c . p for the data-register input ``state``; never clamped."""
    return float(alg.post.as_array() @ output_probs(alg, state))


def evaluate_batch(alg: Algorithm, inputs: np.ndarray) -> np.ndarray:
    """Outputs for pure data-register inputs given as columns of ``inputs``."""
    n_data, n_anc = alg.resources.n_data, alg.resources.n_ancilla
    if inputs.shape[0] != 2**n_data:
        raise InvalidInputError(f"inputs have dimension {inputs.shape[0]}, expected {2**n_data}")
    X = np.zeros((2**alg.n_total, inputs.shape[1]), dtype=complex)
    X[: 2**n_data] = inputs  # ancilla |0...0> occupies the high bits
    X = qsim.apply_gates(X, alg.circuit.gates, alg.n_total)
    p = qsim.marginal(np.abs(X) ** 2, alg.resources.measured, alg.n_total)
    return alg.post.as_array() @ p


def evaluate_sampled(alg: Algorithm, state: State | np.ndarray, shots: int, seed) -> float:
    """Mean of per-shot coefficients over ``shots`` sampled outcomes."""
    probs = output_probs(alg, state)
    rng = np.random.default_rng(seed)
    outcomes = qsim.sample_shots(probs, shots, rng)
    return float(np.mean(alg.post.coefficients_for(outcomes)))


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

_TEXT_KINDS = {k.value: k for k in GateKind}


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def serialize(alg: Algorithm) -> str:
    r = alg.resources
    lines = [f"QUBITS {r.n_total}", f"DATA {r.n_data}"]
    for g in alg.circuit:
        parts = ["GATE", g.kind.value, *map(str, g.qubits), *map(_fmt, g.params)]
        lines.append(" ".join(parts))
    lines.append("MEASURE " + " ".join(map(str, r.measured)))
    if alg.post.kron is not None and alg.post.kron[1] > 1:
        factor, repeats = alg.post.kron
        lines.append("POSTKRON " + " ".join(map(str, factor)) + f" {repeats}")
    else:
        lines.append("POST " + " ".join(map(str, alg.post.coeffs)))
    return "\n".join(lines) + "\n"


def _ints(tokens: Iterable[str], lineno: int, what: str) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(lineno, f"{what} must be integers") from None


def parse(text: str, n_data: int | None = None) -> Algorithm:
    """Parse the line format written by :func:`serialize`.

    ``DATA`` is optional; without it ``n_data`` must be given or is taken
    as the largest even number not exceeding ``QUBITS``.
    """
    n_total = None
    data_line = None
    gates: list[GateInstance] = []
    measured = None
    post = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if n_total is None and head != "QUBITS":
            raise ParseError(lineno, "first record must be QUBITS")
        if head == "QUBITS":
            if n_total is not None:
                raise ParseError(lineno, "duplicate QUBITS record")
            vals = _ints(rest, lineno, "QUBITS")
            if len(vals) != 1 or not 1 <= vals[0] <= qsim.MAX_QUBITS:
                raise ParseError(lineno, f"QUBITS takes one count in [1, {qsim.MAX_QUBITS}]")
            n_total = vals[0]
        elif head == "DATA":
            vals = _ints(rest, lineno, "DATA")
            if len(vals) != 1 or not 1 <= vals[0] <= n_total:
                raise ParseError(lineno, "DATA takes one count in [1, QUBITS]")
            data_line = vals[0]
        elif head == "GATE":
            if not rest:
                raise ParseError(lineno, "GATE needs a kind")
            kind = _TEXT_KINDS.get(rest[0])
            if kind is None:
                raise ParseError(lineno, f"unknown gate kind {rest[0]!r}")
            nq, npar = kind.n_qubits, kind.n_params
            args = rest[1:]
            if len(args) != nq + npar:
                raise ParseError(lineno, f"{kind.value} takes {nq} qubit(s) and {npar} angle(s)")
            qs = _ints(args[:nq], lineno, "qubit indices")
            try:
                ps = [float(a) for a in args[nq:]]
            except ValueError:
                raise ParseError(lineno, "angles must be real numbers") from None
            if max(qs) >= n_total or min(qs) < 0:
                raise ParseError(lineno, f"qubit index out of range for {n_total} qubits")
            try:
                gates.append(GateInstance(kind, tuple(qs), tuple(ps)))
            except qsim.InvalidGateError as e:
                raise ParseError(lineno, str(e)) from None
        elif head == "MEASURE":
            qs = _ints(rest, lineno, "measured qubits")
            if not qs:
                raise ParseError(lineno, "MEASURE needs at least one qubit")
            if any(b <= a for a, b in zip(qs, qs[1:])):
                raise ParseError(lineno, "MEASURE indices must be strictly ascending")
            if qs[0] < 0 or qs[-1] >= n_total:
                raise ParseError(lineno, "measured qubit out of range")
            measured = tuple(qs)
        elif head == "POST":
            try:
                post = PostProcessing(tuple(_ints(rest, lineno, "POST coefficients")))
            except InvalidAlgorithmError as e:
                raise ParseError(lineno, str(e)) from None
        elif head == "POSTKRON":
            vals = _ints(rest, lineno, "POSTKRON entries")
            if len(vals) != 5:
                raise ParseError(lineno, "POSTKRON takes four coefficients and a repeat count")
            try:
                post = PostProcessing.from_kron(vals[:4], vals[4])
            except InvalidAlgorithmError as e:
                raise ParseError(lineno, str(e)) from None
        else:
            raise ParseError(lineno, f"unknown record {head!r}")
    if n_total is None:
        raise ParseError(0, "missing QUBITS record")
    if measured is None:
        raise ParseError(0, "missing MEASURE record")
    if post is None:
        raise ParseError(0, "missing POST or POSTKRON record")
    if len(post.coeffs) != 2 ** len(measured):
        raise ParseError(0, f"post vector needs {2 ** len(measured)} entries for {len(measured)} measured qubits")
    nd = data_line if data_line is not None else n_data
    if nd is None:
        nd = n_total - (n_total % 2)
    if nd > n_total or nd < 1:
        raise ParseError(0, f"data register of {nd} qubits does not fit in {n_total}")
    return Algorithm(Resources(nd, n_total - nd, measured), Circuit(tuple(gates)), post)
