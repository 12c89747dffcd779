"""Dense real linear-algebra kernels.

Thin, tolerance-aware wrappers around LAPACK (via numpy.linalg): thin SVD,
Moore-Penrose pseudoinverse, operator norm, spectral radius, and numerical
rank.  Everything in this package that carries a dagger or a norm goes
through here, so the rank-cutoff convention lives in one place: singular
values at or below ``tol * sigma_max`` are treated as zero.

All functions are pure and accept any array-like that converts to a finite
2-D float array; they are safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Default relative cutoff for treating singular values as zero.
DEFAULT_TOL = 1e-12


class NumericalFailure(Exception):
    """The underlying eigenvalue/SVD iteration failed to converge."""


@dataclass
class SvdResult:
    """Thin singular value decomposition ``a = u @ diag(s) @ vt``.

    ``u`` has orthonormal columns, ``vt`` orthonormal rows, and
    ``singular_values`` is nonincreasing and nonnegative.
    """

    u: np.ndarray
    singular_values: np.ndarray
    vt: np.ndarray


def _as_matrix(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"{name} must be a nonempty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def svd(a) -> SvdResult:
    """Thin SVD of a dense real matrix.

    Raises
    ------
    NumericalFailure
        If the LAPACK SVD iteration does not converge within its
        internal iteration budget.
    """
    a = _as_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(
            f"SVD did not converge for {a.shape[0]}x{a.shape[1]} matrix"
        ) from exc
    return SvdResult(u=u, singular_values=s, vt=vt)


def pseudoinverse(a, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose inverse via SVD with a relative rank cutoff.

    Singular values ``sigma_i <= tol * sigma_max`` are treated as zero.
    The result satisfies the four Penrose identities to within roundoff.
    """
    a = _as_matrix(a)
    if tol <= 0:
        raise ValueError("tol must be positive")
    res = svd(a)
    s = res.singular_values
    cutoff = tol * (s[0] if s.size else 0.0)
    inv = np.zeros_like(s)
    keep = s > cutoff
    inv[keep] = 1.0 / s[keep]
    return (res.vt.T * inv) @ res.u.T


def operator_norm(a) -> float:
    """Largest singular value (the spectral norm)."""
    return float(svd(a).singular_values[0])


def spectral_radius(a) -> float:
    """Largest eigenvalue modulus of a square matrix.

    Uses the full nonsymmetric eigenvalue solver (Hessenberg reduction
    followed by shifted QR with 2x2 deflation blocks), not power
    iteration: the operators analysed in this package are nonsymmetric
    and routinely have complex conjugate eigenvalue pairs of equal
    modulus.
    """
    a = _as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"spectral_radius needs a square matrix, got {a.shape}")
    try:
        eigs = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(
            f"eigenvalue QR iteration did not converge for "
            f"{a.shape[0]}x{a.shape[1]} matrix"
        ) from exc
    return float(np.max(np.abs(eigs)))


def rank(a, tol: float = DEFAULT_TOL) -> int:
    """Number of singular values above ``tol * sigma_max``."""
    a = _as_matrix(a)
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = svd(a).singular_values
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))
