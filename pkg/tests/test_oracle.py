import itertools

import numpy as np
import pytest

from centrex.coverage import group_coverage
from centrex.errors import GuardError
from centrex.graph import Graph, with_edges
from centrex.oracle import (brute_force_opt, certify_instance_s2, certify_s2, covered_pairs,
                            dag_coverage, find_non_submodular_witness)
from centrex.problem import ProblemInstance, Setting
from centrex.report import instance_from_dict, instance_to_dict

from conftest import star_graph


def test_dag_fixtures(p5, c6):
    assert dag_coverage(p5, [2]) == 4
    assert dag_coverage(star_graph(5), [0]) == 10
    assert sorted(covered_pairs(c6, [0])) == [(1, 4), (1, 5), (2, 5)]
    assert dag_coverage(Graph(2, [(0, 1)]), [0]) == 0
    k4 = Graph(4, list(itertools.combinations(range(4), 2)))
    assert all(dag_coverage(k4, [v]) == 0 for v in range(4))


def test_dag_guard():
    with pytest.raises(GuardError):
        dag_coverage(Graph(201, [(0, 1)]), [0])


def test_brute_force_p4(p4):
    p = ProblemInstance.build(p4, [0], 1, Setting.S1, candidates=[(0, 2), (0, 3)])
    assert brute_force_opt(p) == (((0, 3),), 1)
    assert brute_force_opt(p.with_k(2))[1] == (
        dag_coverage(with_edges(p4, [(0, 2), (0, 3)]), [0]) - dag_coverage(p4, [0]))


def test_brute_force_zero_gain_returns_empty():
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 2), (1, 3)])
    p = ProblemInstance.build(g, [0], 1, Setting.S1, candidates=[(0, 3)])
    assert brute_force_opt(p) == ((), 0)


def test_brute_force_guard():
    g = Graph(40, [(i, i + 1) for i in range(39)])
    p = ProblemInstance.build(g, [0], 30, Setting.S1)
    with pytest.raises(GuardError):
        brute_force_opt(p)


def test_certify_tree_with_separated_candidates():
    # path 0-1-2-3-4-5-6, X = {3}; edges to the two ends act on disjoint pair sets
    g = Graph(7, [(i, i + 1) for i in range(6)])
    p = ProblemInstance.build(g, [3], 2, Setting.S1, candidates=[(3, 0), (3, 6)])
    assert certify_s2(p, [(3, 0), (3, 6)])
    assert certify_instance_s2(p)


def test_certify_rejects_two_edge_path():
    # 1-2 and 4-5 far apart on a path; X = {0} isolated. Adding (0,2) and (0,4)
    # gives 1-2-0-4-5 a shortest path through X that needs both edges
    g = Graph(6, [(1, 2), (2, 3), (3, 4), (4, 5)])
    g = Graph(8, [(1, 2), (2, 3), (3, 6), (6, 7), (7, 4), (4, 5)])
    p = ProblemInstance.build(g, [0], 2, Setting.S1, candidates=[(0, 2), (0, 4)])
    assert not certify_s2(p, [(0, 2), (0, 4)])
    assert not certify_instance_s2(p)


def test_certify_empty_subset(p4):
    p = ProblemInstance.build(p4, [0], 1, Setting.S1, candidates=[(0, 2), (0, 3)])
    assert certify_s2(p, [])


@pytest.mark.parametrize("setting", [Setting.S1, Setting.S4])
def test_witness_found_and_replays(setting):
    w = find_non_submodular_witness(setting, np.random.default_rng(0), 10**4)
    assert w is not None
    p = instance_from_dict(instance_to_dict(w.instance))
    assert p.graph == w.instance.graph

    def f(edges):
        return group_coverage(with_edges(p.graph, edges), p.targets).covered

    small, large, e = list(w.smaller), list(w.larger), w.edge
    assert set(small) < set(large) or (not small and large)
    assert f(small + [e]) - f(small) < f(large + [e]) - f(large)


def test_no_witness_on_certified_instances():
    assert find_non_submodular_witness(Setting.S1, np.random.default_rng(1), 3000,
                                       require_s2=True) is None
