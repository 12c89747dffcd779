"""Projector calculus: build subspaces and combine them.

Every subspace here is carried by its orthogonal projector, and every
combination (complement, intersection, Minkowski sum) is a closed-form
matrix expression built from pseudoinverses, so no iterative scheme is
needed for any of the set operations themselves.
"""

import numpy as np

from splitproj import (
    AffineSubspace,
    complement,
    from_basis,
    intersect_all,
    intersect_pair,
    project,
    random_subspace,
    sum_projector,
)

rng = np.random.default_rng(7)

# two planes in R^3, each given by a couple of spanning columns
plane_a = from_basis(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]))
plane_b = from_basis(np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]))
print("dim plane_a =", plane_a.dimension(), " dim plane_b =", plane_b.dimension())

# their intersection is the x-axis
line = intersect_pair(plane_a, plane_b)
print("intersection projector:\n", np.round(line.projector, 12))
print("projection of (3, 4, 5) on it:", project(line, [3.0, 4.0, 5.0]))

# complements and sums close the calculus: plane_a + plane_b is all of R^3
everything = sum_projector(plane_a, plane_b)
print("dim(plane_a + plane_b) =", everything.dimension())
print("complement of the sum has dim", complement(everything).dimension())

# the same machinery at experiment scale: three random 5-dim subspaces of R^6
subs = [random_subspace(6, 5, rng) for _ in range(3)]
z = intersect_all(subs)
print("\nthree random 5-dim subspaces of R^6 intersect in dim", z.dimension())

x = rng.standard_normal(6)
best = project(z, x)
print("best approximation of a random point, residual per subspace:")
for i, s in enumerate(subs):
    print(f"  subspace {i}: {np.linalg.norm(project(s, best) - best):.2e}")

# affine subspaces translate the whole picture by an anchor point
offset_line = AffineSubspace(np.array([0.0, 2.0, 0.0]), line)
print("\nprojection onto the translated line:", project(offset_line, [3.0, 4.0, 5.0]))
