"""Command-line front end: ``centrex optimize | verify | experiment``.

All randomness comes from ``--seed`` through ``numpy.random.SeedSequence``:
the root sequence spawns one child each for target sampling, the algorithm,
and the metrics block, so results never depend on the thread count.

Exit codes: 0 success, 1 failed verification, 2 invalid input, 3 guard refusal.
"""

import argparse
import csv
import io
import logging
import os
import sys
import time
from pathlib import Path

import networkx as nx
import numpy as np

from centrex import verify
from centrex.baselines import high_acc, high_degree, random_edges
from centrex.bus import SamplePlan, run_bus
from centrex.coverage import ALL_PAIRS, group_coverage, read_pair_file
from centrex.errors import EdgeListError, GuardError, ValidationError
from centrex.ges import run_ges
from centrex.graph import from_networkx, read_edge_list, read_token_pairs, with_edges
from centrex.metrics import metric_block
from centrex.problem import ProblemInstance, Setting, validate
from centrex.report import build_report, dumps, read_instance

log = logging.getLogger("centrex")

ALGORITHMS = ("ges", "bus", "high-acc", "high-degree", "random")
DEFAULT_ACC_SAMPLES = 1000


class UsageError(ValidationError):
    """Bad flag combination; reported with exit code 2."""


def _streams(seed):
    """Child generators for targets, algorithm, metrics."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]


def _split(text):
    return [t for t in text.replace(",", " ").split() if t]


def _set_threads(threads):
    if threads is not None:
        os.environ["CENTREX_THREADS"] = str(threads)


def load_instance(args, rng):
    if args.instance:
        p = read_instance(args.instance)
        return p if args.k is None else p.with_k(args.k)
    if not args.graph:
        raise UsageError(["--graph or --instance is required"])
    if args.k is None:
        raise UsageError(["--k is required"])
    g = read_edge_list(args.graph, directed=args.directed)
    if args.target_nodes:
        try:
            targets = [g.node(t) for t in _split(args.target_nodes)]
        except KeyError as exc:
            raise UsageError([str(exc.args[0])]) from None
    elif args.target_random:
        if args.target_random >= g.n:
            raise UsageError([f"--target-random {args.target_random} needs fewer than n={g.n}"])
        targets = sorted(int(v) for v in rng.choice(g.n, size=args.target_random, replace=False))
    else:
        raise UsageError(["a target set is required: --target-nodes LIST or --target-random INT"])
    pairs = ALL_PAIRS
    if args.pairs != "all":
        if not args.pairs.startswith("file:"):
            raise UsageError([f"--pairs must be 'all' or 'file:PATH', got {args.pairs!r}"])
        pairs = read_pair_file(args.pairs[5:], g)
    cand = args.candidates
    if cand.startswith("file:"):
        with open(cand[5:], "rb") as fh:
            edges = [(g.node(a), g.node(b)) for _, a, b in read_token_pairs(fh)]
        setting = Setting.parse(args.setting or "S1", g.directed)
        return ProblemInstance.build(g, targets, args.k, setting, candidates=edges, pairs=pairs)
    try:
        setting = Setting.parse(cand, g.directed)
    except ValueError:
        raise UsageError([f"--candidates must be auto-s1, auto-s0 or file:PATH, got {cand!r}"]) from None
    try:
        return ProblemInstance.build(g, targets, args.k, setting, pairs=pairs)
    except ValueError as exc:
        raise ValidationError([str(exc)]) from None


def sample_plan(args, p):
    """Sampling plan for BUS from the sizing flags."""
    if args.samples is not None:
        return SamplePlan.manual(args.samples)
    if args.exhaustive:
        return SamplePlan.exhaustive()
    if args.preset == "paper-cg":
        return SamplePlan.paper_cg(p.k)
    if args.epsilon is None:
        raise UsageError(["bus needs a sample size: --epsilon (with optional --opt-bound), "
                          "--samples, --exhaustive or --preset paper-cg"])
    try:
        if args.opt_bound is not None:
            m_u = group_coverage(p.graph, p.targets, p.pairs).uncovered
            return SamplePlan.thm4(m_u, args.confidence_l, p.k, len(p.candidates), args.epsilon,
                                   args.opt_bound)
        return SamplePlan.cor3(args.confidence_l, p.k, len(p.candidates), args.epsilon)
    except ValueError as exc:
        raise UsageError([str(exc)]) from None


def run_algorithm(p, algo, rng, seed, args):
    if algo == "ges":
        return run_ges(p, stop_on_zero_gain=getattr(args, "stop_on_zero", False))
    if algo == "bus":
        return run_bus(p, sample_plan(args, p), rng, seed=seed)
    if algo == "high-acc":
        q = args.samples if args.samples is not None else DEFAULT_ACC_SAMPLES
        return high_acc(p, q, rng, seed=seed)
    if algo == "high-degree":
        return high_degree(p, rng, seed=seed)
    return random_edges(p, rng, seed=seed)


def cmd_optimize(args):
    start = time.perf_counter()
    r_targets, r_algo, r_metrics = _streams(args.seed)
    p = load_instance(args, r_targets)
    errors = validate(p)
    if errors:
        raise ValidationError(errors)
    rep = run_algorithm(p, args.algo, r_algo, args.seed, args)
    if rep.seed is None:
        rep.seed = args.seed
    metrics = None
    if args.metrics:
        pairs = "exhaustive" if args.distance_pairs == 0 else args.distance_pairs
        metrics = metric_block(p.graph, with_edges(p.graph, rep.selected), p.targets, r_metrics,
                               distance_pairs=pairs, ic_p=args.ic_p, ic_trials=args.ic_trials)
    doc = build_report(p, rep, metrics=metrics, timings=args.timings)
    text = dumps(doc)
    if args.report == "-":
        sys.stdout.write(text)
    else:
        Path(args.report).write_text(text)
    wall = time.perf_counter() - start
    before, after = rep.coverage_before.covered, rep.coverage_after.covered
    print(f"{rep.algorithm} k={p.k} coverage {before} -> {after} (+{after - before}) "
          f"in {wall:.2f}s", file=sys.stderr if args.report == "-" else sys.stdout)
    return 0


def cmd_verify(args):
    suite = args.suite
    fn = verify.SUITES[suite]
    kw = {"seed": args.seed}
    if suite in ("approx-ratio", "bus-ges") and args.instances is not None:
        kw["instances"] = args.instances
    if suite in ("submodularity", "concentration") and args.trials is not None:
        kw["trials"] = args.trials
    if suite == "oracle-equivalence" and args.instances is not None:
        kw["graphs"] = args.instances
    if suite == "unbiasedness" and args.trials is not None:
        kw["resamples"] = args.trials
    if suite == "witness":
        kw.update(setting=args.setting, max_tries=args.max_tries, require_s2=args.require_s2)
    result = fn(**kw)
    text = dumps(result)
    if args.output:
        Path(args.output).write_text(text)
    sys.stdout.write(text)
    return 0 if result["passed"] else 1


def _parse_generator(spec):
    kind, _, rest = spec.partition(":")
    params = {}
    for part in _split(rest):
        key, _, value = part.partition("=")
        params[key] = float(value) if "." in value else int(value)
    if kind not in ("ba", "er") or "n" not in params:
        raise UsageError([f"bad generator {spec!r}; use ba:n=2000,m=3 or er:n=500,p=0.01"])
    return kind, params


def _generate(kind, params, seed, directed):
    if kind == "ba":
        return from_networkx(nx.barabasi_albert_graph(params["n"], params.get("m", 3), seed=seed))
    return from_networkx(nx.gnp_random_graph(params["n"], params.get("p", 0.01), seed=seed,
                                             directed=directed))


def _parse_sweep(spec):
    key, _, values = spec.partition("=")
    if key not in ("k", "q") or not values:
        raise UsageError([f"bad sweep {spec!r}; use k=5,10,20 or q=250,500,1000"])
    return key, [int(v) for v in _split(values)]


def cmd_experiment(args):
    algos = _split(args.algos)
    bad = [a for a in algos if a not in ALGORITHMS]
    if bad:
        raise UsageError([f"unknown algorithm {a!r}" for a in bad])
    key, values = _parse_sweep(args.sweep) if args.sweep else ("k", [args.k])
    gen = _parse_generator(args.generator) if args.generator else None
    if gen is None and not args.graph:
        raise UsageError(["--generator or --graph is required"])
    header = ["config", "rep", "seed", "algorithm", "k", "q", "gain", "coverage_before",
              "coverage_after"]
    if args.timings:
        header.append("time_s")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    fixed = None if gen else read_edge_list(args.graph, directed=args.directed)
    root = np.random.SeedSequence(args.seed)
    for rep, rep_seq in enumerate(root.spawn(args.reps)):
        graph_seq, target_seq, algo_seq = rep_seq.spawn(3)
        graph_seed = int(graph_seq.generate_state(1)[0])
        g = fixed if fixed is not None else _generate(*gen, graph_seed, args.directed)
        t_rng = np.random.default_rng(target_seq)
        targets = sorted(int(v) for v in t_rng.choice(g.n, size=args.targets, replace=False))
        base = ProblemInstance.build(g, targets, 1, args.setting)
        algo_seqs = iter(algo_seq.spawn(len(values) * len(algos)))
        for value in values:
            k = value if key == "k" else args.k
            q = value if key == "q" else args.samples
            p = base.with_k(k)
            errors = validate(p)
            if errors:
                raise ValidationError(errors)
            for algo in algos:
                rng = np.random.default_rng(next(algo_seqs))
                ns = argparse.Namespace(samples=q, exhaustive=False, preset=None, epsilon=None,
                                        opt_bound=None, confidence_l=1)
                t0 = time.perf_counter()
                rep_out = run_algorithm(p, algo, rng, args.seed, ns)
                dt = time.perf_counter() - t0
                row = [f"{key}={value}", rep, args.seed, algo, k,
                       q if algo in ("bus", "high-acc") else "",
                       rep_out.gain, rep_out.coverage_before.covered,
                       rep_out.coverage_after.covered]
                if args.timings:
                    row.append(f"{dt:.4f}")
                w.writerow(row)
    if args.output:
        Path(args.output).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="centrex",
                                 description="Edge additions for group coverage centrality.")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker threads (default: $CENTREX_THREADS or CPU count)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    o = sub.add_parser("optimize", help="select k edges for a target set")
    o.add_argument("--graph", help="edge list, one 'u v' pair per line")
    o.add_argument("--instance", help="JSON instance file (replaces --graph/targets/candidates)")
    o.add_argument("--directed", action="store_true")
    o.add_argument("--algo", choices=ALGORITHMS, required=True)
    o.add_argument("--k", type=int)
    o.add_argument("--target-nodes", help="comma-separated node labels")
    o.add_argument("--target-random", type=int, help="draw this many targets from --seed")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--candidates", default="auto-s1", help="auto-s1 | auto-s0 | file:PATH")
    o.add_argument("--setting", help="setting for a candidate file (S0/S1/S3/S4)")
    o.add_argument("--pairs", default="all", help="all | file:PATH")
    o.add_argument("--epsilon", type=float)
    o.add_argument("--confidence-l", type=int, default=1)
    o.add_argument("--opt-bound", type=float, help="lower bound on OPT for the OPT-aware size")
    o.add_argument("--samples", type=int, help="explicit sample size q")
    o.add_argument("--exhaustive", action="store_true", help="bus: use every uncovered pair once")
    o.add_argument("--preset", choices=["paper-cg"], help="paper-cg: q = 256 k")
    o.add_argument("--stop-on-zero", action="store_true", help="ges: stop when no gain is left")
    o.add_argument("--report", default="centrex-report.json", help="report path, '-' for stdout")
    o.add_argument("--timings", action="store_true", help="include wall times in the report")
    o.add_argument("--metrics", action="store_true", help="add distance/closeness/cascade block")
    o.add_argument("--distance-pairs", type=int, default=0, help="0 = all pairs")
    o.add_argument("--ic-p", type=float, default=0.1)
    o.add_argument("--ic-trials", type=int, default=1000)
    o.set_defaults(func=cmd_optimize)

    v = sub.add_parser("verify", help="run a property suite")
    v.add_argument("suite", choices=sorted(verify.SUITES))
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int)
    v.add_argument("--instances", type=int)
    v.add_argument("--setting", default="S1")
    v.add_argument("--max-tries", type=int, default=10**5)
    v.add_argument("--require-s2", action="store_true")
    v.add_argument("--output")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("experiment", help="desk-scale sweep, CSV output")
    e.add_argument("--generator", help="ba:n=2000,m=3 or er:n=500,p=0.01")
    e.add_argument("--graph")
    e.add_argument("--directed", action="store_true")
    e.add_argument("--algos", default="bus,high-acc,high-degree,random")
    e.add_argument("--sweep", help="k=5,10,15 or q=250,500,1000")
    e.add_argument("--k", type=int, default=10)
    e.add_argument("--samples", type=int, default=1000)
    e.add_argument("--targets", type=int, default=5)
    e.add_argument("--setting", default="S1")
    e.add_argument("--reps", type=int, default=10)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--timings", action="store_true", help="add a time_s column")
    e.add_argument("--output")
    e.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    _set_threads(args.threads)
    try:
        return args.func(args)
    except (ValidationError, UsageError) as exc:
        for msg in exc.errors:
            print(f"error: {msg}", file=sys.stderr)
        return 2
    except EdgeListError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GuardError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
