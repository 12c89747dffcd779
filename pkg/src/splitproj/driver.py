"""Relaxed fixed-point iteration, stopping rules, and rate bounds.

The governing iteration is z <- (1 - lam) z + lam T z with 0 < lam < 1.
Because the operators are (affine) linear and averaged, the iterates converge
to the image of the start under the closed-form fixed-point projector, and
the shadow sequence (the stacked forward-pass blocks) converges to copies of
the projection of a start-dependent point onto the subspace intersection.

All distances are Euclidean norms on the stacked block vectors: governing
distances in R^{(n-1)d}, shadow distances in R^{nd}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import operator_norm, spectral_radius
from .splitting import (
    RyuProblem,
    affine_lift,
    displacement,
    fix_decomposition,
    forward_blocks,
    operator_matrix,
)

STOP_DISTANCE = "distance_to_known_limit"
STOP_RESIDUAL = "successive_residual"
_STOP_RULES = (STOP_DISTANCE, STOP_RESIDUAL)


@dataclass
class IterationConfig:
    """Relaxation, tolerance, iteration budget, and stopping rule."""

    lam: float
    tol: float = 1e-6
    max_iters: int = 10_000
    stop_rule: str = STOP_DISTANCE

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"relaxation must lie in (0, 1), got {self.lam}")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.stop_rule not in _STOP_RULES:
            raise ValueError(f"stop_rule must be one of {_STOP_RULES}")


@dataclass
class IterationTrace:
    """Outcome of a governing iteration run.

    Distance histories are empty arrays when history recording was off.
    """

    iterations: int
    converged: bool
    governing_distances: np.ndarray
    shadow_distances: np.ndarray
    final_governing: np.ndarray
    final_shadow: np.ndarray


@dataclass
class RateBounds:
    """Lower (spectral radius) and upper (operator norm) rate bounds."""

    lower: float
    upper: float

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper + 1e-9:
            raise ValueError(f"need 0 <= lower <= upper, got {self.lower}, {self.upper}")


def governing_limit(problem, start) -> np.ndarray:
    """Limit of the governing iteration: the fixed-point projection of start."""
    start = np.asarray(start, dtype=float).reshape(-1)
    fix = fix_decomposition(problem.parallel())
    if problem.is_affine:
        _, fix = affine_lift(operator_matrix(problem), fix)
    return fix(start)


def shadow_limit(problem, start) -> np.ndarray:
    """Limit of the shadow sequence: n copies of the intersection projection.

    The projected point is the first start block for the three-subspace
    two-variable operator and the block average for the general-n one; for
    affine problems the projection is onto the affine intersection.
    """
    start = np.asarray(start, dtype=float).reshape(-1)
    d, n = problem.d, problem.n
    blocks = start.reshape(n - 1, d)
    p_point = blocks[0] if isinstance(problem, RyuProblem) else blocks.mean(axis=0)
    pz = problem.intersection().projector
    anchor = problem.intersection_point
    solution = anchor + pz @ (p_point - anchor)
    return np.tile(solution, n)


def shadow(problem, z) -> np.ndarray:
    """Stacked forward-pass blocks (the shadow point) at a governing z."""
    return np.concatenate(forward_blocks(problem, z))


def iterate(problem, config: IterationConfig, start, record_history: bool = True) -> IterationTrace:
    """Run the relaxed iteration until the stopping rule fires.

    With the distance rule the run stops once the governing iterate is
    within ``tol`` of its known limit; with the residual rule once
    consecutive iterates are within ``tol``.  Hitting ``max_iters`` yields
    ``converged=False`` rather than an exception.  Per-iteration distance
    histories are recorded only when requested (long runs over many
    instances would otherwise hold every trace in memory).
    """
    z = np.asarray(start, dtype=float).reshape(-1).copy()
    if z.shape[0] != problem.governing_dim:
        raise ValueError(f"start has dimension {z.shape[0]}, expected {problem.governing_dim}")
    gov_lim = governing_limit(problem, z)
    sh_lim = shadow_limit(problem, z)

    gov_hist: list = []
    sh_hist: list = []
    gov_dist = float(np.linalg.norm(z - gov_lim))
    if record_history:
        gov_hist.append(gov_dist)

    converged = config.stop_rule == STOP_DISTANCE and gov_dist <= config.tol
    k = 0
    while not converged and k < config.max_iters:
        blocks = forward_blocks(problem, z)
        if record_history:
            sh_hist.append(float(np.linalg.norm(np.concatenate(blocks) - sh_lim)))
        move = config.lam * displacement(problem, blocks)
        z = z + move
        k += 1
        gov_dist = float(np.linalg.norm(z - gov_lim))
        if record_history:
            gov_hist.append(gov_dist)
        if config.stop_rule == STOP_DISTANCE:
            converged = gov_dist <= config.tol
        else:
            converged = float(np.linalg.norm(move)) <= config.tol

    final_shadow = shadow(problem, z)
    if record_history:
        sh_hist.append(float(np.linalg.norm(final_shadow - sh_lim)))
    return IterationTrace(
        iterations=k,
        converged=converged,
        governing_distances=np.asarray(gov_hist),
        shadow_distances=np.asarray(sh_hist),
        final_governing=z,
        final_shadow=final_shadow,
    )


def iteration_counts(problem, config: IterationConfig, start) -> tuple:
    """First iterations at which governing and shadow reach ``tol``.

    Returns ``(governing_count, shadow_count)``; a sequence that never
    reaches ``tol`` within ``max_iters`` is reported as ``max_iters``
    (such runs count toward experiment medians rather than being dropped).
    """
    z = np.asarray(start, dtype=float).reshape(-1).copy()
    gov_lim = governing_limit(problem, z)
    sh_lim = shadow_limit(problem, z)
    gov = 0 if np.linalg.norm(z - gov_lim) <= config.tol else None
    sh = None
    k = 0
    while (gov is None or sh is None) and k < config.max_iters:
        blocks = forward_blocks(problem, z)
        if sh is None and np.linalg.norm(np.concatenate(blocks) - sh_lim) <= config.tol:
            sh = k
        if gov is not None and sh is not None:
            break
        z = z + config.lam * displacement(problem, blocks)
        k += 1
        if gov is None and np.linalg.norm(z - gov_lim) <= config.tol:
            gov = k
    if sh is None and np.linalg.norm(shadow(problem, z) - sh_lim) <= config.tol:
        sh = k
    return (gov if gov is not None else config.max_iters,
            sh if sh is not None else config.max_iters)


def rate_bounds(problem, lam: float) -> RateBounds:
    """Spectral-radius lower and operator-norm upper bound on the rate.

    Both bounds are for the error map of the relaxed operator,
    T_lam - P_Fix; the lower bound is sharp for the asymptotic rate.
    Requires a linear problem (affine rates equal those of the parallel
    linear problem).
    """
    if problem.is_affine:
        raise ValueError("rate bounds are defined on linear problems; use problem.parallel()")
    if not 0.0 < lam < 1.0:
        raise ValueError(f"relaxation must lie in (0, 1), got {lam}")
    t_lam = operator_matrix(problem).relaxed(lam).linear
    err = t_lam - fix_decomposition(problem).fix_projector
    return RateBounds(lower=spectral_radius(err), upper=operator_norm(err))


def tail_contraction(distances, window: int = 50) -> float:
    """Geometric mean of the last ``window`` distance ratios.

    Distances at or below zero are excluded (they carry no rate
    information once the iterate has numerically reached the limit).
    """
    d = np.asarray(distances, dtype=float)
    d = d[d > 0.0]
    if d.size < 2:
        raise ValueError("need at least two positive distances")
    w = min(window, d.size - 1)
    return float(np.exp((np.log(d[-1]) - np.log(d[-1 - w])) / w))


def asymptotic_contraction(problem, lam: float, probe, doublings: int = 20) -> float:
    """Observed long-run contraction factor of the error iteration.

    Computes the K-step average tail ratio ``||(T_lam - P_Fix)^K e||^{1/K}``
    for ``K = 2**doublings`` by repeated squaring with renormalization.
    This is the geometric mean of the exact error-recurrence tail ratios,
    free of the floating-point floor that a stepwise run hits; it is
    bounded by the operator norm and, for a generic probe, matches the
    spectral radius to high accuracy.
    """
    probe = np.asarray(probe, dtype=float).reshape(-1)
    t_lam = operator_matrix(problem).relaxed(lam).linear
    a = t_lam - fix_decomposition(problem).fix_projector
    if probe.shape[0] != a.shape[0]:
        raise ValueError(f"probe has dimension {probe.shape[0]}, expected {a.shape[0]}")
    norm0 = np.linalg.norm(probe)
    if norm0 == 0.0:
        raise ValueError("probe must be nonzero")
    steps = 1 << doublings
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return 0.0
    m = a / scale
    log_scale = float(np.log(scale))
    for _ in range(doublings):
        m = m @ m
        log_scale *= 2.0
        s = float(np.linalg.norm(m))
        if s == 0.0:
            return 0.0
        m /= s
        log_scale += np.log(s)
    image = float(np.linalg.norm(m @ probe))
    if image == 0.0:
        return 0.0
    return float(np.exp((log_scale + np.log(image) - np.log(norm0)) / steps))
