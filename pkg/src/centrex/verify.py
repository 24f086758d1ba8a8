"""Property suites run by ``centrex verify``.

Each suite takes a seed and trial counts and returns a dict with ``suite``,
``passed`` and the statistics it observed.
"""

import itertools
import math

import networkx as nx
import numpy as np

from centrex.bus import SamplePlan, estimate_gain, run_bus, sample_size_cor3
from centrex.coverage import group_coverage, sample_uncovered_pairs
from centrex.ges import run_ges
from centrex.graph import Graph, from_networkx, with_edges
from centrex.oracle import (brute_force_opt, certify_instance_s2, dag_coverage,
                            find_non_submodular_witness)
from centrex.problem import ProblemInstance, Setting, build_candidates
from centrex.report import instance_to_dict

GREEDY_BOUND = 1 - 1 / math.e


def random_graph(rng, n, directed=False, density=None):
    density = rng.uniform(0.1, 0.45) if density is None else density
    if directed:
        pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    else:
        pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < density
    return Graph(n, [e for e, k in zip(pairs, keep) if k], directed=directed)


def random_tree(rng, n):
    return Graph(n, [(int(rng.integers(0, v)), v) for v in range(1, n)])


def random_s1_instance(rng, max_nodes=12, max_candidates=8, max_k=3):
    n = int(rng.integers(6, max_nodes + 1))
    g = random_tree(rng, n) if rng.random() < 0.5 else random_graph(rng, n)
    targets = [int(rng.integers(n))]
    cands = build_candidates(g, targets, Setting.S1)
    m = min(len(cands), int(rng.integers(3, max_candidates + 1)))
    idx = sorted(int(i) for i in rng.choice(len(cands), size=m, replace=False))
    k = min(m, int(rng.integers(1, max_k + 1)))
    return ProblemInstance.build(g, targets, k, Setting.S1, candidates=[cands[i] for i in idx])


def certified_instances(rng, count, *, positive=True, max_draws=10**6):
    """Random small S1 instances that pass S2 certification (and have OPT > 0 if ``positive``)."""
    out = []
    draws = 0
    while len(out) < count:
        draws += 1
        if draws > max_draws:
            raise RuntimeError("could not draw enough certified instances")
        try:
            p = random_s1_instance(rng)
        except ValueError:
            continue
        if len(p.candidates) < 3 or not certify_instance_s2(p):
            continue
        if positive and brute_force_opt(p)[1] <= 0:
            continue
        out.append(p)
    return out, draws


def approx_ratio(instances=100, seed=0):
    rng = np.random.default_rng(seed)
    batch, draws = certified_instances(rng, instances)
    ratios = []
    for p in batch:
        opt = brute_force_opt(p)[1]
        ratios.append(run_ges(p).gain / opt)
    worst = min(ratios)
    return {"suite": "approx-ratio", "passed": bool(worst >= GREEDY_BOUND), "instances": instances,
            "draws": draws, "min_ratio": worst, "mean_ratio": float(np.mean(ratios)),
            "bound": GREEDY_BOUND}


def submodularity(trials=200, seed=0):
    """Diminishing returns and monotonicity on random triples ``E_a < E_b``, ``e`` outside E_b."""
    rng = np.random.default_rng(seed)
    batch, draws = certified_instances(rng, trials, positive=False)
    violations = negatives = 0
    for p in batch:
        cands = list(p.candidates)
        order = [cands[i] for i in rng.permutation(len(cands))]
        e, rest = order[0], order[1:]
        nb = int(rng.integers(0, len(rest) + 1))
        larger = rest[:nb]
        smaller = larger[:int(rng.integers(0, nb + 1))]

        def f(edges):
            return group_coverage(with_edges(p.graph, edges), p.targets, p.pairs).covered

        d_small = f(smaller + [e]) - f(smaller)
        d_large = f(larger + [e]) - f(larger)
        violations += d_small < d_large
        negatives += (d_small < 0) + (d_large < 0)
    return {"suite": "submodularity", "passed": violations == 0 and negatives == 0,
            "trials": trials, "draws": draws, "violations": int(violations),
            "negative_gains": int(negatives)}


def witness(setting="S1", seed=0, max_tries=10**5, require_s2=False):
    rng = np.random.default_rng(seed)
    setting = Setting.parse(setting)
    w = find_non_submodular_witness(setting, rng, max_tries, require_s2=require_s2)
    found = w is not None
    out = {"suite": "witness", "setting": setting.value, "require_s2": require_s2,
           "found": found, "passed": found != require_s2, "max_tries": max_tries}
    if found:
        out.update(tries=w.tries, instance=instance_to_dict(w.instance),
                   smaller=[list(e) for e in w.smaller], larger=[list(e) for e in w.larger],
                   edge=list(w.edge), values=w.values)
    return out


def fixed_estimator_instance():
    """Small BA graph, one low-degree target, three edges to the hubs."""
    g = from_networkx(nx.barabasi_albert_graph(40, 2, seed=11))
    x = min(range(g.n), key=lambda v: (g.degree(v), -v))
    p = ProblemInstance.build(g, [x], 3, Setting.S1)
    hubs = sorted((v for v in range(g.n) if v != x and not g.has_edge(x, v)),
                  key=lambda v: (-g.degree(v), v))[:3]
    return p, [(x, v) for v in hubs]


def unbiasedness(resamples=10_000, q=100, seed=0):
    rng = np.random.default_rng(seed)
    p, gamma = fixed_estimator_instance()
    before = group_coverage(p.graph, p.targets)
    truth = group_coverage(with_edges(p.graph, gamma), p.targets).covered - before.covered
    est = np.empty(resamples)
    for i in range(resamples):
        sample = sample_uncovered_pairs(p.graph, p.targets, p.pairs, q, rng)
        est[i] = estimate_gain(sample, p.graph, gamma, p.targets, m_u=before.uncovered)
    rel = abs(est.mean() - truth) / truth
    return {"suite": "unbiasedness", "passed": bool(truth >= 5 and rel <= 0.02), "f": truth,
            "mean_estimate": float(est.mean()), "relative_error": float(rel),
            "resamples": resamples, "q": q, "m_u": before.uncovered}


def concentration(trials=1000, epsilon=0.3, l=1, seed=0):
    """Empirical P(|f^q - f| >= eps m_u) at the sample size independent of OPT."""
    rng = np.random.default_rng(seed)
    p, _ = fixed_estimator_instance()
    gamma_size = len(p.candidates)
    q = sample_size_cor3(l, p.k, gamma_size, epsilon)
    before = group_coverage(p.graph, p.targets)
    subsets = [list(run_ges(p).selected),
               [p.candidates[int(i)] for i in rng.choice(gamma_size, p.k, replace=False)]]
    truths = [group_coverage(with_edges(p.graph, s), p.targets).covered - before.covered
              for s in subsets]
    failures = 0
    worst = 0.0
    for _ in range(trials):
        sample = sample_uncovered_pairs(p.graph, p.targets, p.pairs, q, rng)
        for s, f in zip(subsets, truths):
            dev = abs(estimate_gain(sample, p.graph, s, p.targets, m_u=before.uncovered) - f)
            worst = max(worst, dev / before.uncovered)
            failures += dev >= epsilon * before.uncovered
    rate = failures / (trials * len(subsets))
    bound = 2 * gamma_size ** (-l)
    return {"suite": "concentration", "passed": bool(rate <= bound), "q": q, "trials": trials,
            "failures": int(failures), "rate": rate, "bound": bound,
            "max_relative_deviation": worst, "gamma_size": gamma_size}


def bus_ges(instances=50, seed=0):
    """Exhaustive-sample BUS and GES must pick identical edges under S1."""
    rng = np.random.default_rng(seed)
    mismatches, done = [], 0
    while done < instances:
        try:
            p = random_s1_instance(rng)
        except ValueError:
            continue
        if group_coverage(p.graph, p.targets).uncovered == 0:
            continue
        a = run_ges(p).selected
        b = run_bus(p, SamplePlan.exhaustive(), rng).selected
        if a != b:
            mismatches.append({"instance": instance_to_dict(p), "ges": a, "bus": b})
        done += 1
    return {"suite": "bus-ges", "passed": not mismatches, "instances": instances,
            "mismatches": len(mismatches), "examples": mismatches[:3]}


def oracle_equivalence(graphs=100, seed=0):
    rng = np.random.default_rng(seed)
    bad = []
    for i in range(graphs):
        n = int(rng.integers(2, 21))
        g = random_graph(rng, n, directed=bool(i % 2))
        size = int(rng.integers(1, max(2, n // 3) + 1))
        targets = sorted(int(x) for x in rng.choice(n, size=min(size, n - 1), replace=False))
        a, b = dag_coverage(g, targets), group_coverage(g, targets).covered
        if a != b:
            bad.append({"n": n, "directed": g.directed, "targets": targets, "dag": a, "fast": b})
    return {"suite": "oracle-equivalence", "passed": not bad, "graphs": graphs,
            "mismatches": len(bad), "examples": bad[:3]}


SUITES = {
    "approx-ratio": approx_ratio,
    "submodularity": submodularity,
    "witness": witness,
    "unbiasedness": unbiasedness,
    "concentration": concentration,
    "bus-ges": bus_ges,
    "oracle-equivalence": oracle_equivalence,
}
