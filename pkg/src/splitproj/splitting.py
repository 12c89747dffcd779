"""Resolvent-splitting operators specialized to subspace projections.

Two operators are provided, each acting on a stacked product space and each
admitting an explicit matrix representation and a closed-form projector onto
its fixed-point set:

* the Ryu operator for exactly three subspaces, acting on R^{2d};
* the Malitsky-Tam (MT) operator for n >= 3 subspaces, acting on R^{(n-1)d}.

Iterating the relaxed operator drives the forward-pass blocks (the "shadow")
to a consensus point, which is the orthogonal projection of a start-dependent
point onto the intersection of the subspaces.  Affine problems with nonempty
intersection are handled by the same formulas with translated resolvents and
reduce internally to the parallel linear problem plus a shift.

Block vector layout: governing vectors are contiguous blocks of size d in
index order (z_1, ..., z_{n-1}); forward passes return n blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import pseudoinverse
from .subspaces import (
    AffineSubspace,
    Subspace,
    complement,
    intersect_all,
    intersect_pair,
    sum_projector,
)

_FIX_TOL = 1e-8
_AFFINE_TOL = 1e-8


class InconsistentAffineError(Exception):
    """The affine subspaces have empty intersection (unsupported)."""


@dataclass
class AffineMap:
    """A map x -> linear @ x + offset on R^m (offset zero in the linear case)."""

    linear: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        self.linear = np.asarray(self.linear, dtype=float)
        self.offset = np.asarray(self.offset, dtype=float).reshape(-1)
        m = self.linear.shape
        if len(m) != 2 or m[0] != m[1] or m[0] != self.offset.shape[0]:
            raise ValueError(f"need square linear part matching offset, got {m} and {self.offset.shape}")

    def __call__(self, x) -> np.ndarray:
        return self.linear @ np.asarray(x, dtype=float) + self.offset

    def relaxed(self, lam: float) -> "AffineMap":
        """The averaged map (1 - lam) Id + lam T."""
        m = self.linear.shape[0]
        return AffineMap((1.0 - lam) * np.eye(m) + lam * self.linear, lam * self.offset)


@dataclass
class FixDecomposition:
    """Closed-form projector onto the operator's fixed-point set.

    ``fix_projector = z_block + e_projector`` is an orthogonal
    decomposition: the z_block carries the intersection projector (the
    part that produces the solution), e_projector the start-dependent
    residual directions.  For affine problems ``shift`` translates the
    linear fixed-point projector: P_FixT(x) = fix_projector @ x + shift.
    """

    fix_projector: np.ndarray
    shift: np.ndarray
    z_block: np.ndarray
    e_projector: np.ndarray

    def __post_init__(self):
        self.fix_projector = np.asarray(self.fix_projector, dtype=float)
        self.shift = np.asarray(self.shift, dtype=float).reshape(-1)
        self.z_block = np.asarray(self.z_block, dtype=float)
        self.e_projector = np.asarray(self.e_projector, dtype=float)
        p = self.fix_projector
        m = p.shape[0]
        if np.linalg.norm(p - p.T) > _FIX_TOL * m:
            raise ValueError("fixed-point projector is not symmetric")
        if np.linalg.norm(p @ p - p) > _FIX_TOL * m:
            raise ValueError("fixed-point projector is not idempotent")
        if np.linalg.norm(self.z_block + self.e_projector - p) > _FIX_TOL * m:
            raise ValueError("z_block + e_projector does not reproduce the projector")
        if np.linalg.norm(self.z_block @ self.e_projector) > _FIX_TOL * m:
            raise ValueError("z_block and e_projector are not orthogonal")

    def __call__(self, x) -> np.ndarray:
        return self.fix_projector @ np.asarray(x, dtype=float) + self.shift


class _SplittingProblem:
    """Shared construction/validation for Ryu and MT problems."""

    def _init_common(self, subspaces, affine_anchors):
        dims = {s.ambient_dim for s in subspaces}
        if len(dims) != 1:
            raise ValueError(f"subspaces have mixed ambient dimensions: {sorted(dims)}")
        self._subspaces = tuple(subspaces)
        d = self.d
        if affine_anchors is None:
            self._anchors = None
            self._resolvent_offsets = tuple(np.zeros(d) for _ in subspaces)
            self._intersection_point = np.zeros(d)
        else:
            anchors = [np.asarray(a, dtype=float).reshape(-1) for a in affine_anchors]
            if len(anchors) != len(subspaces) or any(a.shape[0] != d for a in anchors):
                raise ValueError("need one anchor of dimension d per subspace")
            self._anchors = tuple(anchors)
            self._resolvent_offsets = tuple(
                (np.eye(d) - s.projector) @ a for s, a in zip(subspaces, anchors)
            )
            self._intersection_point = _common_point(subspaces, anchors)

    @property
    def subspaces(self) -> tuple:
        return self._subspaces

    @property
    def d(self) -> int:
        return self._subspaces[0].ambient_dim

    @property
    def n(self) -> int:
        return len(self._subspaces)

    @property
    def governing_dim(self) -> int:
        return (self.n - 1) * self.d

    @property
    def is_affine(self) -> bool:
        return self._anchors is not None

    @property
    def affine_anchors(self):
        return self._anchors

    @property
    def intersection_point(self) -> np.ndarray:
        """A point in the intersection (the origin for linear problems)."""
        return self._intersection_point

    def intersection(self) -> Subspace:
        """Projector onto the intersection of the (parallel) subspaces."""
        return intersect_all(self._subspaces)

    def resolvent(self, i: int, x: np.ndarray) -> np.ndarray:
        """Projection onto the i-th subspace (affine translate if anchored)."""
        return self._subspaces[i].projector @ x + self._resolvent_offsets[i]


class RyuProblem(_SplittingProblem):
    """Three subspaces of a common R^d, optionally translated (affine)."""

    def __init__(self, u: Subspace, v: Subspace, w: Subspace, affine_anchors=None):
        self._init_common((u, v, w), affine_anchors)

    @classmethod
    def from_affine(cls, a: AffineSubspace, b: AffineSubspace, c: AffineSubspace):
        return cls(a.direction, b.direction, c.direction,
                   affine_anchors=(a.anchor, b.anchor, c.anchor))

    def parallel(self) -> "RyuProblem":
        """The linear problem with the same direction subspaces."""
        return self if not self.is_affine else RyuProblem(*self._subspaces)


class MTProblem(_SplittingProblem):
    """n >= 3 subspaces of a common R^d, optionally translated (affine)."""

    def __init__(self, subspaces, affine_anchors=None):
        subspaces = tuple(subspaces)
        if len(subspaces) < 3:
            raise ValueError(f"need at least 3 subspaces, got {len(subspaces)}")
        self._init_common(subspaces, affine_anchors)

    @classmethod
    def from_affine(cls, affine_subspaces):
        affine_subspaces = list(affine_subspaces)
        return cls([a.direction for a in affine_subspaces],
                   affine_anchors=[a.anchor for a in affine_subspaces])

    def parallel(self) -> "MTProblem":
        return self if not self.is_affine else MTProblem(self._subspaces)


def _common_point(subspaces, anchors) -> np.ndarray:
    """Least-squares candidate for a common point of affine subspaces.

    Solves the stacked system (Id - P_i) x = (Id - P_i) a_i; rejects the
    problem when the candidate misses any of the affine subspaces.
    """
    d = subspaces[0].ambient_dim
    eye = np.eye(d)
    comps = [eye - s.projector for s in subspaces]
    stacked = np.vstack(comps)
    rhs = np.concatenate([c @ a for c, a in zip(comps, anchors)])
    x = pseudoinverse(stacked) @ rhs
    for c, a in zip(comps, anchors):
        gap = np.linalg.norm(c @ (x - a))
        if gap > _AFFINE_TOL:
            raise InconsistentAffineError(
                f"affine subspaces have empty intersection "
                f"(candidate misses one by {gap:.3e})"
            )
    return x


# ---------------------------------------------------------------------------
# Forward passes and operator steps
# ---------------------------------------------------------------------------

def ryu_forward(p: RyuProblem, x, y):
    """The three resolvent evaluations of the Ryu forward pass."""
    x = _block(p, x)
    y = _block(p, y)
    x1 = p.resolvent(0, x)
    x2 = p.resolvent(1, x1 + y)
    x3 = p.resolvent(2, x1 - x + x2 - y)
    return x1, x2, x3


def ryu_step(p: RyuProblem, x, y):
    """One application of the Ryu operator on (x, y) in R^d x R^d."""
    x = _block(p, x)
    y = _block(p, y)
    x1, x2, x3 = ryu_forward(p, x, y)
    return x + x3 - x1, y + x3 - x2


def mt_forward(p: MTProblem, z) -> np.ndarray:
    """MT forward pass: n resolvent evaluations, stacked into R^{nd}."""
    return np.concatenate(forward_blocks(p, z))


def mt_step(p: MTProblem, z) -> np.ndarray:
    """One application of the MT operator on z in R^{(n-1)d}."""
    z = _governing(p, z)
    return z + displacement(p, forward_blocks(p, z))


def forward_blocks(problem, z) -> list:
    """Forward-pass blocks [x_1, ..., x_n] at a governing point z."""
    z = _governing(problem, z)
    d = problem.d
    if isinstance(problem, RyuProblem):
        return list(ryu_forward(problem, z[:d], z[d:]))
    n = problem.n
    zs = [z[i * d:(i + 1) * d] for i in range(n - 1)]
    xs = [problem.resolvent(0, zs[0])]
    for i in range(1, n - 1):
        xs.append(problem.resolvent(i, xs[i - 1] + zs[i] - zs[i - 1]))
    xs.append(problem.resolvent(n - 1, xs[0] + xs[n - 2] - zs[n - 2]))
    return xs


def displacement(problem, blocks) -> np.ndarray:
    """T z - z expressed through the forward blocks at z."""
    if isinstance(problem, RyuProblem):
        x1, x2, x3 = blocks
        return np.concatenate([x3 - x1, x3 - x2])
    return np.concatenate([blocks[i + 1] - blocks[i] for i in range(len(blocks) - 1)])


def step(problem, z) -> np.ndarray:
    """One application of the problem's splitting operator on a stacked z."""
    z = _governing(problem, z)
    return z + displacement(problem, forward_blocks(problem, z))


# ---------------------------------------------------------------------------
# Matrix representations
# ---------------------------------------------------------------------------

def ryu_matrix(p: RyuProblem) -> AffineMap:
    """Block-matrix representation of the Ryu operator on R^{2d}.

    For affine problems the linear part is that of the parallel linear
    problem and the offset is the image of the origin.
    """
    pu, pv, pw = (s.projector for s in p.subspaces)
    d = p.d
    eye = np.eye(d)
    t11 = eye - pu + pw @ pu + pw @ pv @ pu - pw
    t12 = pw @ pv - pw
    t21 = pw @ pu + pw @ pv @ pu - pw - pv @ pu
    t22 = eye + pw @ pv - pv - pw
    linear = np.block([[t11, t12], [t21, t22]])
    offset = np.zeros(2 * d)
    if p.is_affine:
        offset = np.concatenate(ryu_step(p, np.zeros(d), np.zeros(d)))
    return AffineMap(linear, offset)


def mt_matrix(p: MTProblem) -> AffineMap:
    """Block-matrix representation of the MT operator on R^{(n-1)d}.

    Assembled programmatically from projector blocks by running the
    forward recursion on block rows, so it works for every n.
    """
    n, d = p.n, p.d
    m = (n - 1) * d
    selectors = []
    for j in range(n - 1):
        e = np.zeros((d, m))
        e[:, j * d:(j + 1) * d] = np.eye(d)
        selectors.append(e)
    projs = [s.projector for s in p.subspaces]
    rows = [projs[0] @ selectors[0]]
    for i in range(1, n - 1):
        rows.append(projs[i] @ (rows[i - 1] + selectors[i] - selectors[i - 1]))
    rows.append(projs[n - 1] @ (rows[0] + rows[n - 2] - selectors[n - 2]))
    linear = np.eye(m) + np.vstack([rows[i + 1] - rows[i] for i in range(n - 1)])
    offset = np.zeros(m)
    if p.is_affine:
        offset = mt_step(p, np.zeros(m))
    return AffineMap(linear, offset)


def operator_matrix(problem) -> AffineMap:
    return ryu_matrix(problem) if isinstance(problem, RyuProblem) else mt_matrix(problem)


# ---------------------------------------------------------------------------
# Fixed-point projectors
# ---------------------------------------------------------------------------

def ryu_fix_projector(p: RyuProblem) -> FixDecomposition:
    """Closed-form projector onto the fixed-point set of the Ryu operator.

    Fix T decomposes orthogonally as (Z x {0}) + E where Z is the
    intersection and E pairs complement directions whose sum lies in the
    third complement; E is realized as an intersection of two explicit
    projectors in R^{2d}.
    """
    if p.is_affine:
        raise ValueError("fixed-point projector is defined for linear problems; "
                         "use affine_lift for affine ones")
    pu, pv, pw = (s.projector for s in p.subspaces)
    d = p.d
    eye = np.eye(d)
    pz = p.intersection().projector

    z_block = np.zeros((2 * d, 2 * d))
    z_block[:d, :d] = pz

    left = np.zeros((2 * d, 2 * d))
    left[:d, :d] = eye - pu
    left[d:, d:] = eye - pv

    p_diag = 0.5 * np.block([[eye, eye], [eye, eye]])
    w_axis = np.zeros((2 * d, 2 * d))
    w_axis[d:, d:] = eye - pw
    right = sum_projector(complement(Subspace(p_diag)), Subspace(w_axis))

    e_proj = intersect_pair(Subspace(left), right).projector
    return FixDecomposition(z_block + e_proj, np.zeros(2 * d), z_block, e_proj)


def mt_fix_projector(p: MTProblem) -> FixDecomposition:
    """Closed-form projector onto the fixed-point set of the MT operator.

    Fix T decomposes orthogonally as D + E: D is the diagonal copy of the
    intersection (its projector averages the blocks and applies the
    intersection projector), and E is ran(Psi) cut with the last block's
    complement, where Psi is the partial-sum operator over the complement
    spaces.  ran(Psi) is realized as the range projector S S^+ of the
    block lower-triangular matrix S with (i, j) block Id - P_j for j <= i.
    """
    if p.is_affine:
        raise ValueError("fixed-point projector is defined for linear problems; "
                         "use affine_lift for affine ones")
    n, d = p.n, p.d
    m = (n - 1) * d
    eye = np.eye(d)
    pz = p.intersection().projector
    z_block = np.tile(pz, (n - 1, n - 1)) / (n - 1)

    s = np.zeros((m, m))
    for i in range(n - 1):
        for j in range(i + 1):
            s[i * d:(i + 1) * d, j * d:(j + 1) * d] = eye - p.subspaces[j].projector
    p_ran = s @ pseudoinverse(s)
    ran_psi = Subspace(0.5 * (p_ran + p_ran.T))

    last_axis = np.eye(m)
    last_axis[-d:, -d:] = eye - p.subspaces[n - 1].projector

    e_proj = intersect_pair(ran_psi, Subspace(last_axis)).projector
    return FixDecomposition(z_block + e_proj, np.zeros(m), z_block, e_proj)


def fix_decomposition(problem) -> FixDecomposition:
    return (ryu_fix_projector(problem) if isinstance(problem, RyuProblem)
            else mt_fix_projector(problem))


def affine_lift(amap: AffineMap, fix: FixDecomposition, tol: float = _AFFINE_TOL):
    """Shift turning a linear fixed-point projector into the affine one.

    For T x = L x + b with nonempty fixed-point set, a = (Id - L)^+ b
    satisfies P_FixT(x) = P_FixL(x) + a and T^k x = L^k (x - a) + a.
    A residual ``(Id - L) a != b`` beyond ``tol`` means no fixed point
    exists (empty affine intersection) and is rejected.
    """
    m = amap.linear.shape[0]
    id_minus_l = np.eye(m) - amap.linear
    a = pseudoinverse(id_minus_l) @ amap.offset
    residual = np.linalg.norm(id_minus_l @ a - amap.offset)
    if residual > tol:
        raise InconsistentAffineError(
            f"no fixed point: ||(Id - L)a - b|| = {residual:.3e} exceeds {tol:.1e} "
            "(the affine intersection is empty)"
        )
    lifted = FixDecomposition(fix.fix_projector, a, fix.z_block, fix.e_projector)
    return a, lifted


def _block(p, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != p.d:
        raise ValueError(f"block has dimension {x.shape[0]}, expected {p.d}")
    return x


def _governing(p, z) -> np.ndarray:
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.shape[0] != p.governing_dim:
        raise ValueError(
            f"governing vector has dimension {z.shape[0]}, expected {p.governing_dim}"
        )
    return z
