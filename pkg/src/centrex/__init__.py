"""Edge additions that raise the group coverage centrality of a target node set."""

__version__ = "0.1.0"

from centrex.coverage import ALL_PAIRS, PairUniverse, group_coverage  # noqa: E402
from centrex.graph import Graph, load_edge_list, read_edge_list, with_edges  # noqa: E402
from centrex.problem import ProblemInstance, Setting  # noqa: E402

__all__ = ["ALL_PAIRS", "Graph", "PairUniverse", "ProblemInstance", "Setting",
           "group_coverage", "load_edge_list", "read_edge_list", "with_edges"]
