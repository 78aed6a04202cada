"""Simulated-annealing search over gate sequences and post-processing vectors."""

from __future__ import annotations

import copy
import io
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from ..algospec import Algorithm, Circuit, PostProcessing, Resources
from ..hardware import GateSet, InvalidResourcesError
from ..training import ZERO_COST, TrainingSet
from .compress import compress, refill
from .config import OptimizerConfig
from .moves import propose_post_update, propose_structural_update, random_circuit
from .objective import OverlapObjective
from .sweep import sweep_circuit


def anneal_accept(C: float, C_best: float, temperature: float, rng: np.random.Generator) -> bool:
    """Metropolis rule against the incumbent cost."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if C < C_best:
        return True
    return bool(rng.random() < math.exp(-(C - C_best) / temperature))


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    cost: float
    accepted: bool
    temperature: float
    best_cost: float


@dataclass
class Trace:
    rows: list[TraceRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def best_costs(self) -> np.ndarray:
        return np.array([r.best_cost for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("iteration,cost,accepted,temperature\n")
        for r in self.rows:
            buf.write(f"{r.iteration},{r.cost:.17g},{int(r.accepted)},{r.temperature:.17g}\n")
        return buf.getvalue()


@dataclass
class OptimizerState:
    """Incumbent and current point of one annealing run."""

    current: Circuit
    current_post: tuple[int, ...] | None
    current_cost: float
    best: Circuit
    best_post: tuple[int, ...] | None
    C_best: float
    temperature: float
    iteration: int
    rng: np.random.Generator

    def accept(self, circuit: Circuit, post, cost: float) -> None:
        self.current, self.current_post, self.current_cost = circuit, post, cost
        if cost < self.C_best:
            self.best, self.best_post, self.C_best = circuit, post, cost


class AnnealResult(NamedTuple):
    circuit: Circuit
    post: tuple[int, ...] | None
    cost: float
    trace: Trace


def _with_post(objective, post):
    if post is None:
        return objective
    o = copy.copy(objective)
    o.set_post(post)
    return o


def anneal(
    objective,
    gs: GateSet,
    d: int,
    config: OptimizerConfig,
    rng: np.random.Generator,
    post: Sequence[int] | None = None,
    threshold: float = ZERO_COST,
    use_compression: bool = True,
    initial: Circuit | None = None,
    deadline: float | None = None,
) -> AnnealResult:
    """One annealing run with a fixed gate count ``d``.

    ``post`` is the initial c vector; ``None`` means the objective has no
    post-processing (unitary matching) and only the gate sequence moves.
    ``initial`` replaces the random starting circuit.  The run also ends once
    ``time.monotonic()`` passes ``deadline``.
    """
    p = config.move_geometric_p
    post = None if post is None else tuple(int(c) for c in post)
    start = initial if initial is not None else random_circuit(d, gs, rng)
    circuit, cost = sweep_circuit(_with_post(objective, post), start, config, rng)
    T0 = config.T0 if config.T0 is not None else max(0.1 * cost, 1e-12)
    state = OptimizerState(circuit, post, cost, circuit, post, cost, T0, 0, rng)
    trace = Trace()
    for it in range(config.max_iters):
        if state.C_best < threshold:
            break
        if deadline is not None and time.monotonic() > deadline:
            break
        state.iteration = it
        state.temperature = T0 * config.temp_decay**it
        new_c, new_p = state.current, state.current_post
        r = rng.random()
        if post is None or r < 0.5 or r >= 0.75:
            new_c = propose_structural_update(new_c, gs, rng, p)
        if post is not None and r >= 0.5:
            new_p = propose_post_update(PostProcessing(new_p), rng, p).coeffs
        obj = _with_post(objective, new_p)
        new_c, new_cost = sweep_circuit(obj, new_c, config, rng)
        accepted = anneal_accept(new_cost, state.C_best, state.temperature, rng)
        if accepted:
            state.accept(new_c, new_p, new_cost)
        trace.rows.append(TraceRow(it, new_cost, accepted, state.temperature, state.C_best))
        if use_compression and (it + 1) % config.compress_every == 0:
            short = compress(state.current, gs, config, rng)
            if len(short) < len(state.current):
                filled = refill(short, d, gs, rng)
                if filled is not None:
                    obj = _with_post(objective, state.current_post)
                    filled, c2 = sweep_circuit(obj, filled, config, rng)
                    if c2 <= state.current_cost:
                        state.accept(filled, state.current_post, c2)
    return AnnealResult(state.best, state.best_post, state.C_best, trace)


class DiscoveryResult(NamedTuple):
    algorithm: Algorithm
    cost: float
    trace: Trace


def _fit_gateset(resources: Resources, gs: GateSet) -> GateSet:
    n = resources.n_total
    if gs.n_qubits < n:
        raise InvalidResourcesError(f"gate set {gs.name} has {gs.n_qubits} qubits, need {n}")
    return gs if gs.n_qubits == n else gs.restrict(range(n))


def discover(
    resources: Resources,
    gateset: GateSet,
    d: int,
    data: TrainingSet,
    config: OptimizerConfig | None = None,
    seed=0,
    deadline: float | None = None,
) -> DiscoveryResult:
    """Single seeded search for a d-gate algorithm fitting ``data``."""
    config = config or OptimizerConfig()
    if d < 1:
        raise ValueError("d must be >= 1")
    gs = _fit_gateset(resources, gateset)
    rng = np.random.default_rng(seed)
    post0 = rng.integers(-1, 2, size=2 ** len(resources.measured))
    objective = OverlapObjective(resources, data)
    res = anneal(objective, gs, d, config.replace(d=d), rng, post=post0, deadline=deadline)
    alg = Algorithm(resources, res.circuit, PostProcessing(res.post))
    return DiscoveryResult(alg, res.cost, res.trace)


class SearchResult(NamedTuple):
    best: DiscoveryResult
    costs: list[float]

    @property
    def cost(self) -> float:
        return self.best.cost


def restart_seeds(seed, restarts: int) -> list[int]:
    ss = np.random.SeedSequence(seed)
    return [int(s.generate_state(1)[0]) for s in ss.spawn(restarts)]


def search(
    resources: Resources,
    gateset: GateSet,
    d: int,
    data: TrainingSet,
    config: OptimizerConfig | None = None,
    seed=0,
    stop_early: bool = True,
    deadline: float | None = None,
) -> SearchResult:
    """Up to ``config.restarts`` independent runs; stops at the first success.

    ``deadline`` is a ``time.monotonic()`` value that ends the search early.
    """
    config = config or OptimizerConfig()
    best: DiscoveryResult | None = None
    costs = []
    for s in restart_seeds(seed, config.restarts):
        if deadline is not None and costs and time.monotonic() > deadline:
            break
        r = discover(resources, gateset, d, data, config, s, deadline)
        costs.append(r.cost)
        if best is None or r.cost < best.cost:
            best = r
        if stop_early and r.cost < ZERO_COST:
            break
    return SearchResult(best, costs)


@dataclass
class ScanResult:
    rows: list[tuple[int, float]]
    results: dict[int, SearchResult]

    @property
    def d_min(self) -> int | None:
        return next((d for d, c in self.rows if c < ZERO_COST), None)

    def to_csv(self) -> str:
        return "d,best_cost\n" + "".join(f"{d},{c:.17g}\n" for d, c in self.rows)


def cost_vs_depth_scan(
    resources: Resources,
    gateset: GateSet,
    d_range: Iterable[int],
    data: TrainingSet,
    config: OptimizerConfig | None = None,
    seed=0,
    stop_at_d_min: bool = False,
) -> ScanResult:
    """Best final cost over restarts for each gate count."""
    rows, results = [], {}
    for d in d_range:
        r = search(resources, gateset, d, data, config, seed)
        rows.append((d, r.cost))
        results[d] = r
        if stop_at_d_min and r.cost < ZERO_COST:
            break
    return ScanResult(rows, results)
