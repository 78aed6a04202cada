"""Acceptance criteria, one test each; every test prints a PASS or FAIL line.

The stochastic rediscovery runs dominate the run time.  The d=8 ancilla
search stops at the first restart that reaches zero cost.  The n=2 stretch
scans only report their outcome and run under a wall-clock budget set by
QOVERLAP_STRETCH_SECONDS (default 300 s each, 0 skips them).
"""

import math
import os
import time

import numpy as np
import pytest
from scipy import stats

from conftest import ACCEPTANCE_LINES
from qoverlap import qsim
from qoverlap.algospec import Resources, evaluate_batch, pair_batch
from qoverlap.hardware import gateset_ideal
from qoverlap.optimizer.compress import compress, match_cost
from qoverlap.optimizer.config import OptimizerConfig
from qoverlap.optimizer.moves import random_circuit
from qoverlap.optimizer.objective import OverlapObjective
from qoverlap.optimizer.search import anneal_accept, discover, search
from qoverlap.optimizer.sweep import sweep_circuit
from qoverlap.reference import (
    build_aba,
    build_bba,
    build_bba_toffoli,
    build_named,
    controlled_swap_unitary,
    default_alpha_grid,
    fig8_experiment,
    overlap_oracle,
    schmidt_rank,
)
from qoverlap.rewrite import toffoli
from qoverlap.training import ZERO_COST, haar_vector, make_training_set

# schedule for the long rediscovery runs: the default 0.995 decay freezes the
# walk after ~1500 iterations, far short of the 50,000-iteration budget
REDISCOVERY = OptimizerConfig(max_iters=50_000, restarts=20, T0=0.1, temp_decay=0.99995)
BELOW_DMIN = OptimizerConfig(max_iters=2_000, restarts=20)
STRETCH_SECONDS = float(os.environ.get("QOVERLAP_STRETCH_SECONDS", "300"))

TRACES = []


def report(tag, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def haar_pairs(n, count, rng):
    psis = np.array([haar_vector(n, rng) for _ in range(count)])
    phis = np.array([haar_vector(n, rng) for _ in range(count)])
    return psis, phis


@pytest.fixture(scope="module")
def data():
    return make_training_set(1, "auto", seed=0).train


def test_c1_oracle_exactness():
    t = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    cases = [(name, n) for n in (1, 2, 3) for name in ("SWAP_TEST", "ABA", "BBA", "BBA_TOFFOLI")]
    cases += [("ABA_IBM", 1), ("ABA_RIGETTI", 1)]
    for name, n in cases:
        psis, phis = haar_pairs(n, 100, rng)
        got = evaluate_batch(build_named(name, n).algorithm, pair_batch(psis, phis))
        expect = np.array([overlap_oracle(a, b) for a, b in zip(psis, phis)])
        worst = max(worst, float(np.max(np.abs(got - expect))))
    dt = time.perf_counter() - t
    report("C1 oracle exactness", worst < 1e-10 and dt < 10, f"max error {worst:.2e}, {dt:.1f} s")


def test_c2_gate_counts():
    ok = True
    for n in (1, 2, 3):
        aba, bba = build_aba(n).circuit, build_bba(n).circuit
        ok &= aba.n_cnot == 4 * n and len(aba) == 6 * n + 2
        ok &= len(bba) == 2 * n and len(bba.layers()) == 2
    ok &= len(build_aba(1).circuit) == 8 and len(build_aba(2).circuit) == 14
    report("C2 gate counts", ok, "ABA 4n CNOT / 6n+2 gates, BBA 2n gates in 2 layers, ABA 8 and 14")


def test_c3_schmidt_ranks():
    cs = schmidt_rank(controlled_swap_unitary(), [2])
    aba = schmidt_rank(build_aba(1).circuit.unitary(3), [2])
    report("C3 Schmidt ranks", cs == 2 and aba == 3, f"controlled-SWAP {cs}, ABA {aba}")


def test_c4_toffoli_equivalence():
    rng = np.random.default_rng(4)
    worst = 0.0
    for n in (1, 2):
        psis, phis = haar_pairs(n, 100, rng)
        x = pair_batch(psis, phis)
        a = evaluate_batch(build_bba(n).algorithm, x)
        b = evaluate_batch(build_bba_toffoli(n).algorithm, x)
        worst = max(worst, float(np.max(np.abs(a - b))))
    T = qsim.circuit_unitary(toffoli(2, 1, 0), 3)
    Z0 = np.diag([(-1.0) ** (b & 1) for b in range(8)])
    CZ = np.diag([(-1.0) ** ((b >> 1) & (b >> 2) & 1) for b in range(8)])
    ident = float(np.max(np.abs(T @ Z0 @ T - Z0 @ CZ)))
    report("C4 Toffoli equivalence", worst < 1e-10 and ident < 1e-12, f"BBA gap {worst:.2e}, identity {ident:.2e}")


def test_c5_measure_all_d2(data):
    t = time.perf_counter()
    cfg = OptimizerConfig(max_iters=2_000, restarts=20)
    r = search(Resources.measure_all(1), gateset_ideal(3), 2, data, cfg, seed=0)
    dt = time.perf_counter() - t
    TRACES.append(r.best.trace)
    report(
        "C5a rediscovery d=2 measure-all",
        r.cost < ZERO_COST and dt < 60,
        f"cost {r.cost:.2e} after {len(r.costs)} restart(s), {dt:.1f} s",
    )


def test_c5_measure_ancilla_d8(data):
    t = time.perf_counter()
    r = search(Resources.measure_ancilla(1), gateset_ideal(3), 8, data, REDISCOVERY, seed=0)
    dt = time.perf_counter() - t
    TRACES.append(r.best.trace)
    report(
        "C5b rediscovery d=8 measure-ancilla",
        r.cost < ZERO_COST,
        f"cost {r.cost:.2e} after {len(r.costs)} restart(s), {dt:.0f} s",
    )


def _stretch(resources, d, n):
    if STRETCH_SECONDS <= 0:
        return None, 0
    data = make_training_set(n, "auto", seed=0).train
    deadline = time.monotonic() + STRETCH_SECONDS
    r = search(resources, gateset_ideal(resources.n_total), d, data, REDISCOVERY, seed=0, deadline=deadline)
    return r.cost, len(r.costs)


@pytest.mark.parametrize("label, resources, d, n", [
    ("n=2 measure-all d=4", Resources.measure_all(2), 4, 2),
    ("n=2 measure-ancilla d=14", Resources.measure_ancilla(2), 14, 2),
])
def test_c5_stretch(label, resources, d, n):
    best, runs = _stretch(resources, d, n)
    if best is None:
        line = f"[SKIP] C5 stretch {label}: disabled"
    else:
        status = "PASS" if best < ZERO_COST else "INFO"
        line = f"[{status}] C5 stretch {label}: best cost {best:.2e} in {runs} run(s), {STRETCH_SECONDS:.0f} s budget (reported only)"
    print(line)
    ACCEPTANCE_LINES.append(line)


def test_c6_below_dmin(data):
    worst = math.inf
    for res in (Resources.measure_ancilla(1), Resources.measure_all(1)):
        r = search(res, gateset_ideal(3), 1, data, BELOW_DMIN, seed=0, stop_early=False)
        worst = min(worst, min(r.costs))
        TRACES.append(r.best.trace)
    report("C6 d=1 stays above 1e-2", worst >= 1e-2, f"lowest cost over 40 restarts {worst:.3g}")


def test_c7_shot_noise():
    res = fig8_experiment(build_bba(1), default_alpha_grid(21), shots=49152, noise_p=0.0, seed=0)
    report("C7 BBA shot noise", res.max_abs_error <= 0.02, f"max error {res.max_abs_error:.4f}")


def test_c8_noise_ordering():
    t = time.perf_counter()
    grid = default_alpha_grid(21)
    names = ("BBA", "ABA", "SWAP_TEST")
    exact = [fig8_experiment(build_named(k), grid, shots=None, noise_p=0.01).rms for k in names]
    shots = [fig8_experiment(build_named(k), grid, shots=49152, noise_p=0.01, seed=8).rms for k in names]
    dt = time.perf_counter() - t
    ok = exact[0] < exact[1] < exact[2] and shots[0] < shots[1] < shots[2] and dt < 60
    detail = (
        f"exact RMS {exact[0]:.4f} < {exact[1]:.4f} < {exact[2]:.4f}; "
        f"49152 shots {shots[0]:.4f} < {shots[1]:.4f} < {shots[2]:.4f}; {dt:.1f} s"
    )
    report("C8 noise ordering", ok, detail)


def test_c9_haar_statistics():
    data = make_training_set(1, 50_000, seed=9)
    t = data.targets
    ks = stats.kstest(t, "uniform").statistic
    sigma = t.std() / math.sqrt(len(t))
    ok = len(t) == 100_000 and ks < 0.01 and abs(t.mean() - 0.5) < 5 * sigma
    report("C9 Haar statistics", ok, f"KS {ks:.4f}, mean {t.mean():.4f} (sigma {sigma:.1e})")


def test_c10_optimizer_properties(data):
    rng = np.random.default_rng(10)
    gs = gateset_ideal(3)
    res = Resources.measure_ancilla(1)
    cfg = OptimizerConfig(max_iters=200)
    traces = list(TRACES)
    for s in range(3):
        traces.append(discover(res, gs, 5, data, cfg, seed=s).trace)
    monotone = all(np.all(np.diff(tr.best_costs()) <= 0) for tr in traces)

    sweep_ok = True
    for _ in range(50):
        obj = OverlapObjective(res, data, rng.integers(-1, 2, 2))
        c = random_circuit(6, gs, rng)
        sweep_ok &= sweep_circuit(obj, c, cfg, rng)[1] <= obj.value(c)

    worst_match = 0.0
    for _ in range(20):
        c = random_circuit(8, gs, rng)
        worst_match = max(worst_match, match_cost(compress(c, gs, cfg, rng).gates, c.unitary(3)))

    arng = np.random.default_rng(11)
    rate = float(np.mean([anneal_accept(1.0 + 0.2, 1.0, 0.2, arng) for _ in range(100_000)]))
    ok = monotone and sweep_ok and worst_match < 1e-8 and abs(rate - math.exp(-1)) < 0.01
    detail = (
        f"{len(traces)} monotone traces {monotone}, sweep monotone {sweep_ok}, "
        f"compression match {worst_match:.1e}, accept rate {rate:.4f}"
    )
    report("C10 optimizer properties", ok, detail)
