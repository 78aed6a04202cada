"""Command-line entry point.

Exit codes: 0 success, 1 usage or parse error, 2 search budget exhausted
without reaching the zero-cost threshold, 3 verification failed.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algospec import Algorithm, ParseError, Resources, evaluate_batch, pair_batch, parse, serialize
from .hardware import InvalidResourcesError, TopologyParseError, gateset_by_name
from .optimizer.compress import compress
from .optimizer.config import ConfigError, OptimizerConfig, load_config
from .optimizer.search import cost_vs_depth_scan
from .reference import NAMES, build_named, default_alpha_grid, fig8_experiment
from .training import ZERO_COST, TrainingSet, cost, haar_vector, make_training_set

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BUDGET = 2
EXIT_VERIFY = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def write_manifest(out: Path, command: str, seed, settings: dict, started: str) -> Path:
    """``key = value`` record written next to ``out``."""
    path = out.with_name(out.name + ".manifest")
    lines = [
        f"command = {command}",
        f"seed = {seed}",
        f"version = {__version__}",
        f"start = {started}",
        f"end = {_now()}",
    ]
    lines += [f"{k} = {v}" for k, v in settings.items()]
    path.write_text("\n".join(lines) + "\n")
    return path


def _gates_range(text: str) -> list[int]:
    try:
        if "-" in text:
            lo, hi = (int(x) for x in text.split("-", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"--gates expects an integer or a range like 2-8, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise UsageError(f"bad gate range {text!r}")
    return list(range(lo, hi + 1))


def _read_algorithm(path: str, n: int | None = None) -> Algorithm:
    text = Path(path).read_text()
    return parse(text, None if n is None else 2 * n)


def cmd_discover(args) -> int:
    started = _now()
    config = OptimizerConfig()
    if args.config:
        config = load_config(args.config, config)
    overrides = {k: v for k, v in (("max_iters", args.max_iters), ("restarts", args.restarts)) if v is not None}
    config = config.replace(**overrides)
    d_range = _gates_range(args.gates)
    if args.measure == "all":
        resources = Resources.measure_all(args.n, args.ancilla)
    else:
        if args.ancilla < 1:
            raise UsageError("--measure ancilla needs --ancilla >= 1")
        resources = Resources.measure_ancilla(args.n, args.ancilla)
    gs = gateset_by_name(args.hardware, resources.n_total, topology=args.topology)
    if args.train in (None, "auto"):
        data = make_training_set(args.n, "auto", seed=args.seed).train
    elif args.train.isdigit():
        data = make_training_set(args.n, int(args.train), seed=args.seed).train
    else:
        data = TrainingSet.load(args.train)
        if data.n != args.n:
            raise UsageError(f"training file holds {data.n}-qubit states, --n is {args.n}")

    scan = cost_vs_depth_scan(resources, gs, d_range, data, config, seed=args.seed, stop_at_d_min=True)
    d_best = scan.d_min if scan.d_min is not None else min(scan.rows, key=lambda r: r[1])[0]
    best = scan.results[d_best].best

    out = Path(args.out)
    out.write_text(serialize(best.algorithm))
    trace_path = out.with_name(out.name + ".trace.csv")
    trace_path.write_text(best.trace.to_csv())
    if len(d_range) > 1:
        out.with_name(out.name + ".scan.csv").write_text(scan.to_csv())
    settings = {
        "hardware": args.hardware, "topology": args.topology or "default", "n": args.n, "ancilla": args.ancilla, "measure": args.measure,
        "gates": args.gates, "train": args.train or "auto", "final_cost": f"{best.cost:.17g}", "d": d_best,
    }
    settings.update({f"config.{line.split(' = ')[0]}": line.split(" = ")[1] for line in config.to_text().splitlines()})
    write_manifest(out, "discover", args.seed, settings, started)
    print(f"d={d_best} cost={best.cost:.6g}")
    return EXIT_OK if best.cost < ZERO_COST else EXIT_BUDGET


def cmd_verify(args) -> int:
    alg = _read_algorithm(args.circuit, args.n)
    if alg.resources.n_data != 2 * args.n:
        raise UsageError(f"circuit has {alg.resources.n_data} data qubits, --n {args.n} needs {2 * args.n}")
    rng = np.random.default_rng(args.seed)
    psis = np.array([haar_vector(args.n, rng) for _ in range(args.trials)])
    phis = np.array([haar_vector(args.n, rng) for _ in range(args.trials)])
    exact = np.abs(np.einsum("ij,ij->i", psis.conj(), phis)) ** 2
    err = float(np.max(np.abs(evaluate_batch(alg, pair_batch(psis, phis)) - exact)))
    print(f"max_abs_error = {err:.3e}")
    return EXIT_OK if err <= args.tol else EXIT_VERIFY


def cmd_compress(args) -> int:
    started = _now()
    alg = _read_algorithm(args.circuit)
    short = compress(alg.circuit, None, OptimizerConfig(), np.random.default_rng(args.seed))
    out = Path(args.out)
    out.write_text(serialize(alg.with_circuit(short)))
    write_manifest(out, "compress", args.seed, {"input": args.circuit, "gates_in": len(alg.circuit), "gates_out": len(short)}, started)
    print(f"{len(alg.circuit)} -> {len(short)} gates")
    return EXIT_OK


def cmd_cost(args) -> int:
    data = TrainingSet.load(args.train)
    alg = _read_algorithm(args.circuit, data.n)
    print(f"{cost(alg, data):.17g}")
    return EXIT_OK


def cmd_make_data(args) -> int:
    started = _now()
    N = "auto" if args.N == "auto" else int(args.N)
    data = make_training_set(args.n, N, seed=args.seed)
    out = Path(args.out)
    data.save(out)
    write_manifest(out, "make-data", args.seed, {"n": args.n, "N": args.N}, started)
    return EXIT_OK


def cmd_experiment(args) -> int:
    started = _now()
    named = build_named(args.algorithm, 1)
    shots = None if args.shots == 0 else args.shots
    res = fig8_experiment(named, default_alpha_grid(args.points), shots, args.noise, args.seed)
    out = Path(args.out)
    out.write_text(res.to_csv())
    write_manifest(
        out, "experiment fig8", args.seed,
        {"algorithm": named.name, "shots": args.shots, "noise": args.noise, "points": args.points}, started,
    )
    print(f"{named.name}: rms={res.rms:.4g} max_abs_error={res.max_abs_error:.4g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qoverlap", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    d = sub.add_parser("discover", help="search for an overlap algorithm")
    d.add_argument("--hardware", choices=("ideal", "ibmqx4", "rigetti19"), default="ideal")
    d.add_argument("--topology", help="EDGE-list file for the rigetti19 gate set")
    d.add_argument("--n", type=int, required=True, help="qubits per input state")
    d.add_argument("--ancilla", type=int, default=1)
    d.add_argument("--measure", choices=("ancilla", "all"), default="ancilla")
    d.add_argument("--gates", required=True, help="gate count d or a range lo-hi")
    d.add_argument("--train", default="auto", help="auto, a pair count, or a training file")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--config")
    d.add_argument("--max-iters", type=int, dest="max_iters")
    d.add_argument("--restarts", type=int)
    d.add_argument("--threads", type=int, default=1, help="accepted for compatibility; runs are sequential")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_discover)

    v = sub.add_parser("verify", help="compare a circuit with the exact overlap")
    v.add_argument("--circuit", required=True)
    v.add_argument("--n", type=int, required=True)
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("compress", help="shorten a circuit without changing its unitary")
    c.add_argument("--circuit", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_compress)

    k = sub.add_parser("cost", help="squared-error cost of a circuit on a training file")
    k.add_argument("--circuit", required=True)
    k.add_argument("--train", required=True)
    k.set_defaults(func=cmd_cost)

    m = sub.add_parser("make-data", help="write a Haar training file")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--N", default="auto")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_make_data)

    e = sub.add_parser("experiment", help="simulated hardware experiments")
    esub = e.add_subparsers(dest="experiment", parser_class=_Parser)
    f = esub.add_parser("fig8", help="overlap of two one-qubit states over an angle grid")
    f.add_argument("--algorithm", required=True, type=str.upper, choices=NAMES)
    f.add_argument("--shots", type=int, default=49152, help="0 for exact expectations")
    f.add_argument("--noise", type=float, default=0.0, help="depolarizing probability per gate")
    f.add_argument("--points", type=int, default=21)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_experiment)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            raise UsageError("missing subcommand")
        return args.func(args)
    except (UsageError, ParseError, ConfigError, TopologyParseError, InvalidResourcesError, ValueError, OSError) as e:
        print(f"qoverlap: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
