"""Gate-by-gate steepest descent over the angles of parametric one-qubit gates."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..algospec import Algorithm, Circuit
from ..qsim import GateInstance, one_qubit_unitaries
from ..training import TrainingSet
from .config import OptimizerConfig
from .objective import overlap_objective

MAX_DESCENT_STEPS = 50
MAX_PASSES = 100
MAX_HALVINGS = 31
MAX_DOUBLINGS = 10
COST_FLOOR = 1e-24
# random angle triples scored alongside the current ones before each descent;
# identity gates sit on a stationary point that plain descent cannot leave
PROBES = 8


Batched = Callable[[np.ndarray], np.ndarray]

# step sizes tried by the line search: 1, 1/2, 1/4, ... plus 2, 4, ... for
# flat (quartic) minima where unit steps crawl
_STEPS = 2.0 ** np.arange(MAX_DOUBLINGS, -MAX_HALVINGS, -1)


def fd_gradient(f: Batched, theta: np.ndarray, h: float) -> np.ndarray:
    """Central finite-difference gradient; ``f`` maps (B, k) points to (B,) values."""
    k = theta.size
    pts = np.concatenate([theta + h * np.eye(k), theta - h * np.eye(k)])
    v = f(pts)
    return (v[:k] - v[k:]) / (2 * h)


def descend(
    f: Batched, theta: np.ndarray, fd_step: float, max_steps: int = MAX_DESCENT_STEPS, rel_tol: float = 0.0
) -> tuple[np.ndarray, float]:
    """Steepest descent with a halving line search starting at step 1.

    All candidate step sizes are evaluated in one batch and the one with the
    lowest cost is taken; plain first-improvement backtracking zigzags
    around curved minima.
    Stops early once a step gains less than ``rel_tol`` relative to the cost.
    """
    theta = np.asarray(theta, dtype=float)
    fx = float(f(theta[None])[0])
    for _ in range(max_steps):
        g = fd_gradient(f, theta, fd_step)
        if not np.any(g):
            break
        trials = theta - _STEPS[:, None] * g
        vals = f(trials)
        k = int(np.argmin(vals))
        if not vals[k] < fx:
            break
        gain = fx - vals[k]
        theta, fx = trials[k], float(vals[k])
        if gain < rel_tol * max(fx, 1e-12):
            break
    return theta, fx


def best_start(f: Batched, theta: np.ndarray, rng: np.random.Generator, probes: int = PROBES) -> np.ndarray:
    """Lowest-cost point among ``theta`` and ``probes`` uniform random angle sets."""
    theta = np.asarray(theta, dtype=float)
    if probes <= 0:
        return theta
    pts = np.vstack([theta, rng.uniform(-np.pi, np.pi, (probes, theta.size))])
    return pts[int(np.argmin(f(pts)))]


def sweep_circuit(objective, circuit: Circuit, config: OptimizerConfig, rng: np.random.Generator) -> tuple[Circuit, float]:
    """Optimise all parametric gates of ``circuit`` under ``objective``."""
    cost = initial = objective.value(circuit)
    idx = [i for i, g in enumerate(circuit.gates) if g.is_parametric]
    if not idx:
        return circuit, cost
    gates = list(circuit.gates)
    for _ in range(MAX_PASSES):
        start = cost
        for i in rng.permutation(idx):
            g = gates[i]
            local = objective.local(Circuit(tuple(gates)), int(i))
            f = lambda t: local(one_qubit_unitaries(t))  # noqa: E731
            theta, fx = descend(f, best_start(f, g.params, rng), config.fd_step, rel_tol=config.sweep_tol)
            if fx < cost:
                gates[i] = GateInstance(g.kind, g.qubits, tuple(float(t) for t in theta))
                cost = fx
        if start - cost < config.sweep_tol * max(start, 1e-12) or cost < COST_FLOOR:
            break
    out = Circuit(tuple(gates))
    # recompute exactly; the local form can differ in the last bits
    final = objective.value(out)
    if final > initial:
        return circuit, initial
    return out, final


def continuous_sweep(
    alg: Algorithm, data: TrainingSet, config: OptimizerConfig | None = None, rng: np.random.Generator | int | None = 0
) -> Algorithm:
    """Return ``alg`` with its one-qubit angles reoptimised on ``data``."""
    config = config or OptimizerConfig()
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    circuit, _ = sweep_circuit(overlap_objective(alg, data), alg.circuit, config, rng)
    return alg.with_circuit(circuit)

