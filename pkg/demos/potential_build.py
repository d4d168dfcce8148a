"""
Building a convex potential from chains of one map
==================================================

Every verified chain anchored at (x0, v0) contributes an affine plane;
their pointwise maximum is a convex function that vanishes at the anchor.
For the slopes of |x| the construction recovers |x| itself on the grid.
"""

import numpy as np

from setflow import (
    build_family,
    family_to_text,
    pl_subdifferential_map,
    PLConvexFunction,
    potential_value,
    sample_grid,
    subgradient_test,
    submap_contains,
    submap_select,
)

f = PLConvexFunction([[1.0], [-1.0]], [0.0, 0.0])
F = pl_subdifferential_map(f)
grid = sample_grid([-1.0], [1.0], [9])

x0 = np.array([0.0])
v0 = np.array([1.0])
family, stats = build_family(F, x0, v0, grid, max_length=3,
                             box=(np.array([-1.0]), np.array([1.0])))
print("chains grown:", stats["chains_grown"],
      " evaluations:", stats["evaluations"])
print("family size after pruning:", len(family.members))

print("\n   x     potential   |x|")
for x in grid:
    g = potential_value(family, x)
    print(f"{x[0]:+.2f}   {g:9.4f}   {abs(x[0]):.4f}")

# the anchor value is exactly zero by construction
assert potential_value(family, x0) == 0.0

# membership: which values at x are compatible with the potential so far
for x in (np.array([0.5]), np.array([-0.5])):
    picks = [v for v in F.eval(x).points
             if submap_contains(family, F, x, v, tol=1e-9)]
    print(f"compatible velocities at {x[0]:+.1f}:", picks)

# compatible pairs pass the subgradient inequality against random probes
probes = [np.array([t]) for t in np.linspace(-1.0, 1.0, 21)]
v = submap_select(family, F, np.array([0.5]), tol=1e-9)
print("selected at +0.5:", v,
      " subgradient test:", subgradient_test(family, np.array([0.5]), v, probes))

# families serialize to JSON text; the CLI writes the same format
print("\nserialized family:")
print(family_to_text(family))
