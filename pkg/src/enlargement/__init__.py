"""Growing a subgraph by the open clusters of bond percolation around it.

Graph generators, counter-based percolation samplers, random walks, property
checkers at finite scale, Monte Carlo estimators and exact enumeration.
"""

from .graph import (Bipartition, Graph, GraphError, ResourceError, Subgraph, build_glued_trees,
                    build_hybrid_z2_tree, build_line_graph, build_regular_tree, build_zd_box)
from .percolation import enlarge, sample_config
from .properties import check_property
from .exact import exact_event_prob
from .estimators import EventSpec, estimate_event_prob, estimate_pc, sweep

__version__ = "0.1.0"

__all__ = ["Bipartition", "Graph", "GraphError", "ResourceError", "Subgraph",
           "build_glued_trees", "build_hybrid_z2_tree", "build_line_graph",
           "build_regular_tree", "build_zd_box", "enlarge", "sample_config", "check_property",
           "exact_event_prob", "EventSpec", "estimate_event_prob", "estimate_pc", "sweep"]
