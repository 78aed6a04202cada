"""Semantics-preserving circuit rewrites and mapping onto restricted gate sets."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

import numpy as np

from .algospec import Circuit
from .hardware import GateSet, equal_up_to_phase
from .qsim import GateInstance, GateKind, cnot, cz, fixed_matrix, gate, zyz_angles

_NAMED_ONE_QUBIT = (GateKind.H, GateKind.T, GateKind.TDG, GateKind.X)


def one_qubit_gate_for(mat: np.ndarray, q: int, named: bool = True) -> GateInstance | None:
    """Gate implementing ``mat`` on ``q`` up to phase; ``None`` for the identity."""
    if equal_up_to_phase(mat, np.eye(2), 1e-13):
        return None
    if named:
        for kind in _NAMED_ONE_QUBIT:
            if equal_up_to_phase(mat, fixed_matrix(kind), 1e-13):
                return gate(kind, q)
    return GateInstance(GateKind.U, (q,), zyz_angles(mat))


def fuse_single_qubit_runs(circuit: Circuit | Sequence[GateInstance], named: bool = True) -> Circuit:
    """Merge consecutive one-qubit gates on each wire into one gate; drop identities."""
    pending: dict[int, np.ndarray] = {}
    out: list[GateInstance] = []

    def flush(q: int) -> None:
        mat = pending.pop(q, None)
        if mat is not None:
            g = one_qubit_gate_for(mat, q, named)
            if g is not None:
                out.append(g)

    for g in circuit:
        if g.is_two_qubit:
            for q in g.qubits:
                flush(q)
            out.append(g)
        else:
            q = g.qubits[0]
            pending[q] = g.matrix() @ pending.get(q, np.eye(2, dtype=complex))
    for q in sorted(pending):
        flush(q)
    return Circuit(tuple(out))


def prune_unobserved(circuit: Circuit, measured: Iterable[int]) -> Circuit:
    """Drop gates outside the backward light cone of the measured qubits."""
    live = set(measured)
    kept = []
    for g in reversed(circuit.gates):
        if live.intersection(g.qubits):
            kept.append(g)
            live.update(g.qubits)
    return Circuit(tuple(reversed(kept)))


def toffoli(a: int, b: int, t: int) -> list[GateInstance]:
    """Toffoli with controls a, b and target t using 6 CNOTs and T gates."""
    H, T, Tdg = GateKind.H, GateKind.T, GateKind.TDG
    return [
        gate(H, t), cnot(b, t), gate(Tdg, t), cnot(a, t), gate(T, t), cnot(b, t),
        gate(Tdg, t), cnot(a, t), gate(T, b), gate(T, t), gate(H, t),
        cnot(a, b), gate(T, a), gate(Tdg, b), cnot(a, b),
    ]


def swap(a: int, b: int) -> list[GateInstance]:
    return [cnot(a, b), cnot(b, a), cnot(a, b)]


def _shortest_path(gs: GateSet, src: int, dst: int) -> list[int]:
    prev = {src: None}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            break
        for v in sorted(gs.neighbours(u)):
            if v not in prev:
                prev[v] = u
                queue.append(v)
    if dst not in prev:
        raise ValueError(f"qubits {src} and {dst} are not connected in {gs.name}")
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    return path[::-1]


def _native_cnot(c: int, t: int, gs: GateSet) -> list[GateInstance]:
    H = GateKind.H
    if gs.two_qubit_kind is GateKind.CZ:
        if (c, t) in gs.allowed_pairs or (t, c) in gs.allowed_pairs:
            return [gate(H, t), cz(c, t) if (c, t) in gs.allowed_pairs else cz(t, c), gate(H, t)]
    else:
        if (c, t) in gs.allowed_pairs:
            return [cnot(c, t)]
        if (t, c) in gs.allowed_pairs:
            return [gate(H, c), gate(H, t), cnot(t, c), gate(H, c), gate(H, t)]
    return []


def map_to_gateset(circuit: Circuit, gs: GateSet, measured: Iterable[int] | None = None) -> Circuit:
    """Rewrite onto ``gs``: reverse or route CNOTs, translate to CZ, fuse, prune.

    One-qubit gates come out as named gates where possible and parametric
    ``U`` otherwise.  Non-adjacent CNOTs are routed with SWAPs along a
    shortest path and swapped back.
    """
    out: list[GateInstance] = []
    for g in circuit:
        if g.kind is GateKind.CZ:
            a, b = g.qubits
            if gs.two_qubit_kind is GateKind.CZ and ((a, b) in gs.allowed_pairs or (b, a) in gs.allowed_pairs):
                out.append(cz(a, b) if (a, b) in gs.allowed_pairs else cz(b, a))
                continue
            g_seq = [gate(GateKind.H, b), cnot(a, b), gate(GateKind.H, b)]
        elif g.kind is GateKind.CNOT:
            g_seq = [g]
        else:
            out.append(g)
            continue
        for h in g_seq:
            if not h.is_two_qubit:
                out.append(h)
                continue
            c, t = h.qubits
            native = _native_cnot(c, t, gs)
            if native:
                out.extend(native)
                continue
            path = _shortest_path(gs, c, t)
            moves: list[GateInstance] = []
            for u, v in zip(path[:-2], path[1:-1]):
                moves.extend(swap(u, v))
            # each native CNOT block is self-inverse, so undo = blocks in reverse
            for m in moves:
                out.extend(_native_cnot(*m.qubits, gs))
            out.extend(_native_cnot(path[-2], t, gs))
            for m in reversed(moves):
                out.extend(_native_cnot(*m.qubits, gs))
    fused = fuse_single_qubit_runs(out)
    if measured is not None:
        fused = prune_unobserved(fused, measured)
    return fused
