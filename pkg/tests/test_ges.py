import numpy as np
import pytest

from centrex import ALL_PAIRS
from centrex.coverage import PairUniverse, group_coverage
from centrex.errors import GuardError
from centrex.ges import marginal_gain_exact, run_ges
from centrex.graph import Graph, with_edges
from centrex.oracle import dag_coverage
from centrex.problem import ProblemInstance, Setting
from centrex.verify import random_graph, random_s1_instance

from conftest import star_graph


def p4_instance(p4, k=1):
    return ProblemInstance.build(p4, [0], k, Setting.S1, candidates=[(0, 2), (0, 3)])


def test_p4_picks_far_end(p4):
    rep = run_ges(p4_instance(p4))
    assert rep.selected == [(0, 3)] and rep.gains == [1] and rep.gain == 1


def test_marginal_gains_p4(p4):
    assert marginal_gain_exact(p4, [0], ALL_PAIRS, 0, (0, 2)) == 0
    assert marginal_gain_exact(p4, [0], ALL_PAIRS, 0, (0, 3)) == 1


def test_marginal_gain_can_be_negative():
    # the leaf pair loses its only shortest path through the centre
    g = star_graph(4)
    assert marginal_gain_exact(g, [0], ALL_PAIRS, 6, (1, 2)) == -1


def test_saturated_coverage_gives_zero_gain():
    # star centre 0 with leaves 1..4, node 5 hangs off leaf 1; X = {0, 1} covers every pair
    g = Graph(6, [(0, 1), (0, 2), (0, 3), (0, 4), (1, 5)])
    state = group_coverage(g, [0, 1])
    assert state.uncovered == 0
    assert marginal_gain_exact(g, [0, 1], ALL_PAIRS, state.covered, (0, 5)) == 0


def test_budget_equal_to_candidates_takes_all(p4):
    rep = run_ges(p4_instance(p4, k=2))
    assert sorted(rep.selected) == [(0, 2), (0, 3)]
    assert rep.coverage_after == group_coverage(with_edges(p4, [(0, 2), (0, 3)]), [0])


def test_walkthrough_like_fixture():
    # nodes a..f = 0..5, edges b-c, c-d, c-e, e-f, a isolated, X = {d, f}
    g = Graph(6, [(1, 2), (2, 3), (2, 4), (4, 5)])
    p = ProblemInstance.build(g, [3, 5], 2, Setting.S1, candidates=[(3, 0), (3, 1), (5, 1)])
    rep = run_ges(p)
    assert rep.selected == [(3, 0), (5, 1)]
    assert rep.gains == [3, 1]


def test_zero_gain_rounds_take_lowest_index():
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 2), (1, 3)])
    p = ProblemInstance.build(g, [0], 1, Setting.S1, candidates=[(0, 3)])
    rep = run_ges(p)
    assert rep.selected == [(0, 3)]
    assert rep.gains == [0]
    stopped = run_ges(p, stop_on_zero_gain=True)
    assert stopped.selected == [] and stopped.notes


def test_gains_telescope_to_exact_coverage():
    rng = np.random.default_rng(9)
    for directed in (False, True):
        for _ in range(10):
            g = random_graph(rng, int(rng.integers(5, 14)), directed=directed)
            X = [int(rng.integers(g.n))]
            setting = Setting.S4 if directed else Setting.S1
            try:
                p = ProblemInstance.build(g, X, 3, setting)
            except ValueError:
                continue
            if len(p.candidates) < 3:
                continue
            rep = run_ges(p)
            assert sum(rep.gains) == rep.gain
            assert rep.gain == dag_coverage(with_edges(g, rep.selected), X) - dag_coverage(g, X)
            assert all(x >= 0 for x in rep.gains)


def test_general_setting_and_explicit_pairs():
    rng = np.random.default_rng(10)
    g = random_graph(rng, 10)
    z = PairUniverse.explicit([(1, 2), (3, 4), (5, 6), (2, 7)])
    p = ProblemInstance.build(g, [0], 3, Setting.S0, pairs=z)
    rep = run_ges(p)
    assert sum(rep.gains) == rep.gain
    assert rep.coverage_after.total == 4


def test_tie_break_is_candidate_order():
    # leaf 0 of a star: its three candidate edges are symmetric
    g = Graph(5, [(0, 1), (1, 2), (1, 3), (1, 4)])
    p = ProblemInstance.build(g, [0], 1, Setting.S1)
    base = group_coverage(g, [0]).covered
    assert len({marginal_gain_exact(g, [0], ALL_PAIRS, base, e) for e in p.candidates}) == 1
    p_rev = p.with_candidates(tuple(reversed(p.candidates)))
    a, b = run_ges(p), run_ges(p_rev)
    assert a.selected[0] == p.candidates[0] and b.selected[0] == p_rev.candidates[0]


def test_guard():
    g = Graph(30, [(i, i + 1) for i in range(29)])
    p = ProblemInstance.build(g, [0], 1, Setting.S1)
    with pytest.raises(GuardError):
        run_ges(p, max_nodes=20)


def test_thread_count_does_not_change_result():
    rng = np.random.default_rng(11)
    for _ in range(5):
        p = random_s1_instance(rng)
        a, b = run_ges(p, workers=1), run_ges(p, workers=4)
        assert a.selected == b.selected and a.gains == b.gains
