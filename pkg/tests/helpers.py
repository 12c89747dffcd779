"""Shared test utilities and independent oracles.

The nullspace-basis intersection oracle deliberately avoids the
Anderson-Duffin/pseudoinverse route used by the package: a point lies in
every subspace iff it is killed by every complement projector, so an
orthonormal kernel basis of the stacked complements gives the intersection
projector directly from one SVD.
"""

import numpy as np

from splitproj import MTProblem, RyuProblem, Subspace, random_subspace


def nullspace_intersection(projectors) -> np.ndarray:
    """Intersection projector from the kernel of stacked complements."""
    d = projectors[0].shape[0]
    stacked = np.vstack([np.eye(d) - p for p in projectors])
    _, s, vt = np.linalg.svd(stacked)
    # numerical zeros sit near eps while genuine directions are O(principal
    # angle); a generous relative cutoff separates them cleanly
    tol = 1e-10 * (s[0] if s.size else 1.0)
    kernel = vt[int(np.sum(s > tol)):].T
    if kernel.size == 0:
        return np.zeros((d, d))
    return kernel @ kernel.T


def random_instance(rng, d=6, dims=(5, 5, 5)):
    """Random subspaces for one experiment instance."""
    return [random_subspace(d, k, rng) for k in dims]


def random_ryu(rng, d=6, dims=(5, 5, 5)) -> RyuProblem:
    return RyuProblem(*random_instance(rng, d, dims))


def random_mt(rng, d=6, dims=None, n=3) -> MTProblem:
    if dims is None:
        dims = (5,) * n
    return MTProblem(random_instance(rng, d, dims))


def whole_space(d) -> Subspace:
    return Subspace(np.eye(d))


def frobenius(a) -> float:
    return float(np.linalg.norm(a))
