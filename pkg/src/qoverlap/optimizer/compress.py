"""Peephole re-synthesis of short gate windows with fewer gates."""

from __future__ import annotations

import numpy as np

from ..algospec import Circuit
from ..hardware import GateSet, equal_up_to_phase, gateset_ideal
from ..qsim import GateInstance, GateKind, circuit_unitary, zyz_angles
from ..rewrite import fuse_single_qubit_runs
from .config import OptimizerConfig
from .objective import MatchObjective

MATCH_TOL = 1e-8
MAX_WINDOW = 8
MAX_WINDOW_QUBITS = 3
# longer windows only get the closed-form checks
MAX_SEARCH_WINDOW = 4
MAX_SEARCH_QUBITS = 2
SYNTH_ITERS = 20


def _relabel(gates, mapping) -> list[GateInstance]:
    return [GateInstance(g.kind, tuple(mapping[q] for q in g.qubits), g.params) for g in gates]


def _split_qubit(V: np.ndarray, j: int, n: int):
    """Write V = a (x) rest with a acting on qubit j; None if V is entangling there."""
    t = V.reshape((2,) * (2 * n))
    oj, ij = n - 1 - j, 2 * n - 1 - j
    rest = [k for k in range(2 * n) if k not in (oj, ij)]
    M = t.transpose([oj, ij] + rest).reshape(4, -1)
    u, s, vh = np.linalg.svd(M, full_matrices=False)
    if s.size > 1 and s[1] > 1e-9 * s[0]:
        return None
    a = u[:, 0].reshape(2, 2)
    a = a / np.sqrt(abs(np.linalg.det(a)))
    return a


def _local_synthesis(V: np.ndarray, n: int) -> list[GateInstance] | None:
    """Gates for V when it is a product of one-qubit unitaries (identities omitted)."""
    out = []
    for j in range(n):
        a = _split_qubit(V, j, n)
        if a is None:
            return None
        if not equal_up_to_phase(a, np.eye(2), 1e-10):
            out.append(GateInstance(GateKind.U, (j,), zyz_angles(a)))
    return out


def match_cost(gates, V: np.ndarray) -> float:
    return MatchObjective(V).value(Circuit(tuple(gates)))


def _one_entangler_synthesis(V: np.ndarray, gs: GateSet) -> list[GateInstance] | None:
    """Shortest of [locals, G] or [G, locals] equal to V for a single gate G in ``gs``."""
    n = V.shape[0].bit_length() - 1
    best = None
    for pair in gs.sorted_pairs():
        g = GateInstance(gs.two_qubit_kind, pair)
        G = circuit_unitary([g], n)
        for rest, order in ((V @ G.conj().T, "after"), (G.conj().T @ V, "before")):
            loc = _local_synthesis(rest, n)
            if loc is None:
                continue
            cand = [g] + loc if order == "after" else loc + [g]
            if best is None or len(cand) < len(best):
                best = cand
    return best


def resynthesize(
    V: np.ndarray, max_gates: int, gs: GateSet, config: OptimizerConfig, rng: np.random.Generator,
    search: bool = True,
) -> list[GateInstance] | None:
    """At most ``max_gates`` gates from ``gs`` implementing V up to phase, or None.

    Products of one-qubit gates and a single two-qubit gate dressed by them
    are recognised in closed form; otherwise (if ``search``) a short
    annealing run on the unitary-matching cost is tried.
    """
    n = V.shape[0].bit_length() - 1
    for cand in (_local_synthesis(V, n), _one_entangler_synthesis(V, gs) if n >= 2 else None):
        if cand is not None and len(cand) <= max_gates and match_cost(cand, V) <= MATCH_TOL:
            return cand
    if not search or n < 2 or max_gates < 2 or not gs.allowed_pairs:
        return None
    from .search import anneal  # deferred: search imports this module

    result = anneal(
        MatchObjective(V), gs, max_gates, config.replace(max_iters=SYNTH_ITERS), rng,
        threshold=MATCH_TOL, use_compression=False,
    )
    if result.cost <= MATCH_TOL:
        return list(result.circuit.gates)
    return None


def compress(
    circuit: Circuit, gateset: GateSet | None = None, config: OptimizerConfig | None = None,
    rng: np.random.Generator | int | None = 0,
) -> Circuit:
    """Shorter circuit with the same unitary up to phase (or the input itself).

    Windows of 2 to 8 consecutive gates are scanned shortest first; a window
    is replaced as soon as it can be rewritten with fewer gates, and the scan
    restarts.  Only windows touching at most three qubits are tried, and the
    annealing re-synthesis only runs on two-qubit windows of up to four
    gates holding at least two two-qubit gates.
    """
    config = config or OptimizerConfig()
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    if gateset is None:
        n = max((max(g.qubits) for g in circuit), default=0) + 1
        gateset = gateset_ideal(max(n, 2))
    named = any(not g.is_two_qubit and not g.is_parametric for g in circuit)
    gates = list(circuit.gates)
    changed = True
    while changed:
        changed = False
        for w in range(2, min(MAX_WINDOW, len(gates)) + 1):
            for start in range(len(gates) - w + 1):
                window = gates[start : start + w]
                qs = sorted({q for g in window for q in g.qubits})
                if len(qs) > MAX_WINDOW_QUBITS:
                    continue
                local = {q: i for i, q in enumerate(qs)}
                V = circuit_unitary(_relabel(window, local), len(qs))
                if len(qs) == 1:
                    sub = _local_synthesis(V, 1)
                else:
                    n2 = sum(g.is_two_qubit for g in window)
                    search = w <= MAX_SEARCH_WINDOW and n2 >= 2 and len(qs) <= MAX_SEARCH_QUBITS
                    sub = resynthesize(V, w - 1, gateset.restrict(qs), config, rng, search=search)
                if sub is None or len(sub) >= w:
                    continue
                new = gates[:start] + _relabel(sub, dict(enumerate(qs))) + gates[start + w :]
                gates = list(fuse_single_qubit_runs(new, named=named).gates)
                changed = True
                break
            if changed:
                break
    return Circuit(tuple(gates))


def refill(circuit: Circuit, d: int, gs: GateSet, rng: np.random.Generator) -> Circuit | None:
    """Pad with identity one-qubit gates to length d, keeping the adjacency rule."""
    gates = list(circuit.gates)
    while len(gates) < d:
        spots = []
        for pos in range(len(gates) + 1):
            for q in sorted(gs.one_qubit_slots):
                before = next((g for g in reversed(gates[:pos]) if q in g.qubits), None)
                after = next((g for g in gates[pos:] if q in g.qubits), None)
                if (before is None or before.is_two_qubit) and (after is None or after.is_two_qubit):
                    spots.append((pos, q))
        if not spots:
            return None
        pos, q = spots[rng.integers(len(spots))]
        gates.insert(pos, GateInstance(GateKind.U, (q,), (0.0, 0.0, 0.0)))
    return Circuit(tuple(gates))
