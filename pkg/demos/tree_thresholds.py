"""
Spanning thresholds on regular trees
====================================

The chance that the root reaches the leaves of a depth-n tree drops sharply
near 1/(d-1).  A coupled sweep reads off the first p where it becomes likely.
"""

from enlargement import EventSpec, Subgraph, build_regular_tree, sweep

for d in (3, 4):
    g = build_regular_tree(d, depth=12)
    spec = EventSpec(g, Subgraph.from_ids(g, vertices=[0]), "spans_boundary")
    res = sweep(spec, [i / 50 for i in range(1, 50)], trials_per_p=500, master_seed=3)
    print(f"T_{d}: p_hat_c1 = {res.p_hat_c1}   (1/(d-1) = {1 / (d - 1):.3f})")
    # a handful of points on the curve
    for est in res.estimates[::8]:
        print(f"    p={est.p:.2f}  P={est.point:.3f}")

# depth 12 is shallow, so a finite tree still reaches its leaves now and then
# below 1/(d-1) and the first crossing reads low.  tree3_sweep and tree4_sweep
# in the catalog go to depth 60 and 38 with the lazy sampler.
