"""
Enlarging one edge of a triangle
================================

Start from the subgraph {0, 2} of a triangle and open each edge with
probability p.  When is the enlarged subgraph connected?
"""

import numpy as np

from enlargement import EventSpec, Graph, Subgraph, estimate_event_prob, exact_event_prob

# the triangle, with the two ends of H as its boundary
g = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)], boundary=[0, 2])
h = Subgraph.from_ids(g, vertices=[0, 2])

# exact answer first: enumerate the 2^3 edge states with rational arithmetic
exact = exact_event_prob(g, h, "connected", "1/2")
print("exact P(connected) at p=1/2:", exact.probability)
print("polynomial coefficients:", exact.coefficients)

# Monte Carlo should agree within its interval
est = estimate_event_prob(EventSpec(g, h, "connected"), 0.5, trials=20000, master_seed=1)
print(f"Monte Carlo: {est.point:.4f}  95% CI [{est.ci_low:.4f}, {est.ci_high:.4f}]")

# and across a few p values
for p in np.linspace(0.1, 0.9, 5):
    e = exact_event_prob(g, h, "connected", float(p)).value
    print(f"  p={p:.1f}  exact={e:.4f}")
