"""Rigidity matrix of a complete-graph framework and its link to ``A(v)``.

A realization places node ``i`` at a point ``x_i`` in ``C^tau`` (or
``R^tau``).  Taking ``x_i`` to be node ``i``'s voltage profile
``[V_i^(1), ..., V_i^(tau)]`` makes the rigidity matrix ``R(x)`` a column
permutation of ``A(v)^T``: ``A^T`` orders its columns snapshot-major,
``(k, node)``, while ``R`` orders them node-major, ``(node, k)``.  The two
therefore share rank and, once the columns are aligned, null space.

All products are plain bilinear ones (no conjugation), matching the
edge-length constraint ``(x_i - x_j) . (xdot_i - xdot_j) = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimation import CoefficientMatrix, OutOfDomainError, _as_coefficient, expected_rank
from .linalg import DEFAULT_RANK_TOL, matrix_rank, null_space
from .measurements import MeasurementSet
from .topology import EdgeIndexing, build_edge_indexing

MOTION_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Realization:
    points: np.ndarray  # n x tau

    def __post_init__(self):
        pts = np.asarray(self.points)
        if pts.ndim == 1:
            pts = pts[:, np.newaxis]
        if pts.ndim != 2:
            raise ValueError(f"points must be an n x tau array, got shape {pts.shape}")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def tau(self) -> int:
        return self.points.shape[1]

    @property
    def stacked(self) -> np.ndarray:
        """``[x_1; x_2; ...; x_n]`` as one vector of length ``n tau``."""
        return self.points.reshape(-1)

    @classmethod
    def from_measurements(cls, mset: MeasurementSet) -> "Realization":
        return cls(mset.voltages.T.copy())


@dataclass(frozen=True)
class RigidityCheckReport:
    rank_R: int
    rank_At: int
    expected: int | None
    nullspace_match: bool
    max_cross_residual: float
    trivial_motions_annihilated: bool

    def to_dict(self) -> dict:
        return {
            "rank_R": self.rank_R,
            "rank_At": self.rank_At,
            "expected": self.expected,
            "nullspace_match": self.nullspace_match,
            "max_cross_residual": self.max_cross_residual,
            "trivial_motions_annihilated": self.trivial_motions_annihilated,
        }

    @property
    def ok(self) -> bool:
        return self.nullspace_match and self.trivial_motions_annihilated


def build_rigidity_matrix(r: Realization, idx: EdgeIndexing | None = None) -> np.ndarray:
    if r.tau == 0:
        raise ValueError("realization dimension tau must be >= 1")
    if idx is None:
        idx = build_edge_indexing(r.n)
    if idx.n != r.n:
        raise ValueError(f"edge indexing is for {idx.n} nodes, realization has {r.n}")
    tau = r.tau
    x = r.points
    R = np.zeros((idx.e, r.n * tau), dtype=np.result_type(x.dtype, float))
    for row, (i, j) in enumerate(idx.edges):
        d = x[i - 1] - x[j - 1]
        R[row, (i - 1) * tau:i * tau] = d
        R[row, (j - 1) * tau:j * tau] = -d
    return R


def trivial_motion_basis(r: Realization) -> list[np.ndarray]:
    """``tau`` translations followed by ``tau(tau-1)/2`` infinitesimal rotations."""
    n, tau = r.n, r.tau
    x = r.points
    dtype = np.result_type(x.dtype, float)
    motions = []
    for d in range(tau):
        m = np.zeros((n, tau), dtype=dtype)
        m[:, d] = 1.0
        motions.append(m.reshape(-1))
    for p in range(tau):
        for q in range(p + 1, tau):
            m = np.zeros((n, tau), dtype=dtype)
            m[:, p] = -x[:, q]
            m[:, q] = x[:, p]
            motions.append(m.reshape(-1))
    return motions


def motions_annihilated(R: np.ndarray, motions, tol: float = MOTION_TOL) -> bool:
    """True when ``||R m|| <= tol ||R|| ||m||`` for every motion ``m``."""
    norm_R = np.linalg.norm(R, 2) if R.size else 0.0
    return all(
        np.linalg.norm(R @ m) <= tol * norm_R * np.linalg.norm(m) for m in motions
    )


def snapshot_to_node_major(n: int, tau: int) -> np.ndarray:
    """Column permutation taking ``A^T`` (``(k, node)`` columns) to ``(node, k)`` order.

    ``At[:, perm]`` has the same column layout as ``R``.
    """
    # column (node i, snapshot k) of R  <-  column (k, i) of A^T
    return np.array([k * n + i for i in range(n) for k in range(tau)])


def _scaled_residual(M: np.ndarray, N: np.ndarray) -> float:
    if N.shape[1] == 0 or M.size == 0:
        return 0.0
    norm_M = np.linalg.norm(M, 2)
    if norm_M == 0.0:
        return 0.0
    return float(np.linalg.norm(M @ N, 2) / norm_M)


def check_equivalence(A, realization: Realization | MeasurementSet,
                      tol: float = DEFAULT_RANK_TOL) -> RigidityCheckReport:
    """Compare ``A(v)^T`` against ``R(v)`` built from the nodal voltage profiles.

    Null-space bases are orthonormal, so ``||M N|| / ||M||`` is a
    scale-free measure of how far one basis is from annihilating the
    other matrix.
    """
    cm = _as_coefficient(A)
    if isinstance(realization, MeasurementSet):
        realization = Realization.from_measurements(realization)
    if (realization.n, realization.tau) != (cm.n, cm.tau):
        raise ValueError(
            f"realization is {realization.n} nodes x {realization.tau} dims, "
            f"coefficient matrix is for n={cm.n}, tau={cm.tau}")

    R = build_rigidity_matrix(realization, cm.indexing)
    At = cm.matrix.T[:, snapshot_to_node_major(cm.n, cm.tau)]
    rank_R = matrix_rank(R, tol)
    rank_At = matrix_rank(At, tol)
    N_R = null_space(R, tol)
    N_A = null_space(At, tol)
    cross = max(_scaled_residual(R, N_A), _scaled_residual(At, N_R))
    try:
        expected = expected_rank(cm.n, cm.tau)
    except OutOfDomainError:
        expected = None
    annihilated = motions_annihilated(R, trivial_motion_basis(realization))
    return RigidityCheckReport(
        rank_R=rank_R,
        rank_At=rank_At,
        expected=expected,
        nullspace_match=bool(rank_R == rank_At and cross <= tol),
        max_cross_residual=cross,
        trivial_motions_annihilated=bool(annihilated),
    )
