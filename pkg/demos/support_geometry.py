"""
Finite point sets, support functions, and hull projections
===========================================================

The library represents every set a map can return as a finite point set.
This walkthrough covers the three geometric queries everything else is
built on: support values, nearest points, and distance to the convex hull.
"""

import numpy as np

from setflow import CompactSet, dist_to_hull, dist_to_set, nearest_point, support_argmax, support_value

# a triangle in the plane
A = CompactSet([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])
print("set:", A)

# support value = farthest extent of the set along a direction
for d in ([1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [-1.0, -1.0]):
    print(f"support along {d}: {support_value(np.array(d), A)}")

# the maximizer itself; ties resolve to the lexicographically smallest point
print("argmax along (1,1):", support_argmax(np.array([1.0, 1.0]), A))

# nearest vertex vs nearest hull point can differ
p = np.array([1.0, 1.0])
print("query point:", p)
print("nearest listed point:", nearest_point(p, A))
print("distance to listed points:", dist_to_set(p, A))
print("distance to convex hull:", dist_to_hull(p, A))

# (1,1) lies on the hull edge between (2,0) and (0,2), so the hull
# distance is exactly zero while the vertex distance is 1
assert dist_to_hull(p, A) == 0.0

# a point outside the hull is at positive distance from both
q = np.array([2.0, 2.0])
print("outside point:", q, "hull distance:", dist_to_hull(q, A))
