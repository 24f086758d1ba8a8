import math

import numpy as np
import pytest

from centrex import ALL_PAIRS
from centrex.bus import (SamplePlan, estimate_coverage, estimate_gain, run_bus,
                         sample_size_cor3, sample_size_thm4, score_candidate, score_candidates)
from centrex.coverage import SampleSet, group_coverage, sample_uncovered_pairs
from centrex.ges import run_ges
from centrex.graph import Graph, with_edges
from centrex.oracle import brute_force_opt
from centrex.problem import ProblemInstance, Setting
from centrex.verify import certified_instances, random_graph, random_s1_instance


def test_cor3_sizes():
    assert sample_size_cor3(1, 10, 50, 0.3) == 5738
    assert sample_size_cor3(1, 20, 100, 0.3) == 12895


def test_thm4_size_and_cancellation():
    assert sample_size_thm4(1000, 1, 10, 50, 0.3, 1000) == 5738
    assert sample_size_thm4(777, 2, 5, 40, 0.2, 777) == sample_size_cor3(2, 5, 40, 0.2)


def test_halving_epsilon_quadruples_q():
    a = 12 * 11 * math.log(50) / 0.3**2
    assert sample_size_cor3(1, 10, 50, 0.15) == math.ceil(4 * a)


@pytest.mark.parametrize("args", [(1, 10, 1, 0.3), (1, 10, 50, 1.0), (0, 10, 50, 0.3)])
def test_sizing_rejects_bad_input(args):
    with pytest.raises(ValueError):
        sample_size_cor3(*args)


def test_thm4_rejects_bound_above_m_u():
    with pytest.raises(ValueError):
        sample_size_thm4(10, 1, 1, 5, 0.3, 11)


def test_paper_cg_preset():
    assert [SamplePlan.paper_cg(k).q for k in (10, 15, 20)] == [2560, 3840, 5120]


def _toy_sample(q, flags):
    pairs = np.zeros((q, 2), dtype=np.int64)
    d = np.zeros((q, 3), dtype=np.int32)
    return SampleSet(pairs, d, d.copy(), np.array(flags, dtype=bool), 100, True)


def test_estimate_coverage_arithmetic():
    assert estimate_coverage(_toy_sample(4, [True, False, False, False])) == 25.0
    assert estimate_coverage(_toy_sample(4, [False] * 4)) == 0


def test_exhaustive_estimate_is_exact(c6):
    sample = sample_uncovered_pairs(c6, [0], ALL_PAIRS, 1, None, exhaustive=True)
    edges = [(0, 2), (0, 3)]
    truth = group_coverage(with_edges(c6, edges), [0]).covered - 3
    assert estimate_gain(sample, c6, edges, [0]) == truth


def test_score_p4(p4):
    sample = sample_uncovered_pairs(p4, [0], ALL_PAIRS, 1, None, exhaustive=True)
    assert score_candidate(sample, (0, 3), [0], Setting.S1) == 1
    assert score_candidate(sample, (0, 2), [0], Setting.S1) == 0


def test_score_zero_for_unreachable_edge():
    g = Graph(6, [(0, 1), (1, 2), (3, 4)])
    sample = sample_uncovered_pairs(g, [5], ALL_PAIRS, 1, None, exhaustive=True)
    keep = np.array([i for i, (s, t) in enumerate(sample.pairs.tolist()) if s < 3 and t < 3])
    sub = SampleSet(sample.pairs[keep], sample.ds[keep], sample.dt[keep],
                    sample.covered[keep], 3, True)
    assert score_candidate(sub, (5, 3), [5], Setting.S1) == 0


def test_equal_length_path_counts():
    # P5 0-1-2-3-4, X = {0}, edge (0, 3): 1-0-3 ties d(1, 3) = 2 and 1-0-3-4 ties d(1, 4) = 3
    g = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    sample = sample_uncovered_pairs(g, [0], ALL_PAIRS, 1, None, exhaustive=True)
    assert score_candidate(sample, (0, 3), [0], Setting.S1) == 2


def test_exhaustive_bus_matches_ges_on_p4(p4):
    p = ProblemInstance.build(p4, [0], 1, Setting.S1, candidates=[(0, 2), (0, 3)])
    rep = run_bus(p, SamplePlan.exhaustive(), np.random.default_rng(0))
    assert rep.selected == [(0, 3)] and rep.gains == [1.0]


def test_exhaustive_bus_matches_ges_gains():
    rng = np.random.default_rng(21)
    for _ in range(20):
        p = random_s1_instance(rng)
        if group_coverage(p.graph, p.targets).uncovered == 0:
            continue
        a = run_ges(p)
        b = run_bus(p, SamplePlan.exhaustive(), rng)
        assert a.selected == b.selected
        assert [float(x) for x in a.gains] == b.gains


def test_single_sample_is_legal():
    rng = np.random.default_rng(3)
    g = random_graph(rng, 15, density=0.2)
    p = ProblemInstance.build(g, [0], 3, Setting.S1)
    rep = run_bus(p, SamplePlan.manual(1), rng)
    assert len(rep.selected) == 3 and len(set(rep.selected)) == 3


def test_flags_only_grow_and_report_is_exact():
    rng = np.random.default_rng(4)
    g = random_graph(rng, 40, density=0.08)
    p = ProblemInstance.build(g, [0, 1], 5, Setting.S1)
    rep = run_bus(p, SamplePlan.manual(300), rng)
    est = rep.details["estimated_gain"]
    assert all(b >= a for a, b in zip(est, est[1:]))
    assert rep.coverage_after == group_coverage(with_edges(g, rep.selected), p.targets)
    assert rep.plan["m_u"] == rep.coverage_before.uncovered
    assert rep.plan["log_base"] == "e"


def test_general_setting_marks_heuristic():
    rng = np.random.default_rng(5)
    g = random_graph(rng, 12, density=0.25)
    p = ProblemInstance.build(g, [0], 2, Setting.S0)
    rep = run_bus(p, SamplePlan.manual(50), rng)
    assert any("heuristic" in n for n in rep.notes)


def test_deterministic_across_workers():
    g = random_graph(np.random.default_rng(6), 200, density=0.02)
    p = ProblemInstance.build(g, [0, 1, 2], 4, Setting.S1)
    a = run_bus(p, SamplePlan.manual(400), np.random.default_rng(1), workers=1)
    b = run_bus(p, SamplePlan.manual(400), np.random.default_rng(1), workers=8)
    assert a.selected == b.selected and a.gains == b.gains and a.plan == b.plan


def test_end_to_end_guarantee():
    # f(BUS) >= (1 - 1/e) OPT - eps m_u in at least 1 - 2/|Gamma| of seeded runs
    rng = np.random.default_rng(8)
    batch, _ = certified_instances(rng, 20)
    eps = 0.3
    ok = total = 0
    worst_bound = 1.0
    for p in batch:
        opt = brute_force_opt(p)[1]
        m_u = group_coverage(p.graph, p.targets).uncovered
        plan = SamplePlan.cor3(1, p.k, len(p.candidates), eps)
        worst_bound = min(worst_bound, 1 - 2 / len(p.candidates))
        for _ in range(10):
            rep = run_bus(p, plan, rng)
            total += 1
            ok += rep.gain >= (1 - 1 / math.e) * opt - eps * m_u
    assert ok / total >= worst_bound
