"""Random proposals for the discrete part of an algorithm: gate sequence and c."""

from __future__ import annotations

import numpy as np

from ..algospec import Circuit, PostProcessing
from ..hardware import GateSet
from ..qsim import GateInstance, GateKind

MAX_REPAIR_ATTEMPTS = 100
STRUCTURAL_MOVES = ("type", "support", "move", "swap")


def draw_move_size(d: int, p: float, rng: np.random.Generator) -> int:
    """Geometric(p) on {1, 2, ...}, truncated to [1, d] by redrawing."""
    while True:
        m = int(rng.geometric(p))
        if m <= d:
            return m


def random_angles(rng: np.random.Generator) -> tuple[float, float, float]:
    a, b, c = rng.uniform(0.0, 2 * np.pi, 3)
    return (float(a), float(b), float(c))


def random_one_qubit(gs: GateSet, rng: np.random.Generator, exclude: int | None = None) -> GateInstance:
    slots = sorted(q for q in gs.one_qubit_slots if q != exclude)
    q = slots[rng.integers(len(slots))]
    return GateInstance(GateKind.U, (q,), random_angles(rng))


def random_two_qubit(gs: GateSet, rng: np.random.Generator, exclude=None) -> GateInstance:
    pairs = [p for p in gs.sorted_pairs() if p != exclude]
    if not pairs:
        pairs = gs.sorted_pairs()
    return GateInstance(gs.two_qubit_kind, pairs[rng.integers(len(pairs))])


def random_gate(gs: GateSet, rng: np.random.Generator) -> GateInstance:
    if gs.allowed_pairs and rng.random() < 0.5:
        return random_two_qubit(gs, rng)
    return random_one_qubit(gs, rng)


def random_circuit(d: int, gs: GateSet, rng: np.random.Generator) -> Circuit:
    """d gates drawn from ``gs``, redrawn locally to keep the adjacency rule."""
    gates: list[GateInstance] = []
    last_is_one: dict[int, bool] = {}
    for _ in range(d):
        while True:
            g = random_gate(gs, rng)
            if g.is_two_qubit or not last_is_one.get(g.qubits[0], False):
                break
        gates.append(g)
        for q in g.qubits:
            last_is_one[q] = not g.is_two_qubit
    return Circuit(tuple(gates))


def _mutate(gates: list[GateInstance], i: int, kind: str, gs: GateSet, rng: np.random.Generator) -> None:
    g = gates[i]
    if kind == "type":
        if g.is_two_qubit:
            gates[i] = random_one_qubit(gs, rng)
        elif gs.allowed_pairs:
            gates[i] = random_two_qubit(gs, rng)
    elif kind == "support":
        if g.is_two_qubit:
            gates[i] = random_two_qubit(gs, rng, exclude=tuple(g.qubits))
        elif gs.n_qubits > 1:
            gates[i] = GateInstance(g.kind, (random_one_qubit(gs, rng, exclude=g.qubits[0]).qubits[0],), g.params)
    elif kind == "move":
        j = int(rng.integers(len(gates) - 1))
        j += j >= i
        gates.insert(j, gates.pop(i))
    else:
        j = int(rng.integers(len(gates) - 1))
        j += j >= i
        gates[i], gates[j] = gates[j], gates[i]


def propose_structural_update(
    circuit: Circuit, gateset: GateSet, rng: np.random.Generator, p: float = 0.5
) -> Circuit:
    """Change the gate sequence, preferring moves that touch few gates.

    The result has the same length, uses only gates from ``gateset`` and
    satisfies the adjacency rule.  After ``MAX_REPAIR_ATTEMPTS`` failed
    draws the input is returned unchanged.
    """
    d = len(circuit)
    if d == 0:
        return circuit
    kinds = STRUCTURAL_MOVES if d > 1 else STRUCTURAL_MOVES[:2]
    for _ in range(MAX_REPAIR_ATTEMPTS):
        m = draw_move_size(d, p, rng)
        gates = list(circuit.gates)
        for i in rng.choice(d, size=m, replace=False):
            _mutate(gates, int(i), kinds[rng.integers(len(kinds))], gateset, rng)
        out = Circuit(tuple(gates))
        if out.is_reduced() and out != circuit:
            return out
    return circuit


def propose_post_update(post: PostProcessing, rng: np.random.Generator, p: float = 0.5) -> PostProcessing:
    """Redraw m ~ Geometric(p) coefficients, each to one of the other two values."""
    c = np.array(post.coeffs, dtype=int)
    m = draw_move_size(len(c), p, rng)
    for i in rng.choice(len(c), size=m, replace=False):
        others = [v for v in (-1, 0, 1) if v != c[i]]
        c[i] = others[rng.integers(2)]
    return PostProcessing(tuple(int(v) for v in c))
