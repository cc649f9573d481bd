"""Admittance identification from stacked phasor measurements.

For each snapshot ``k`` Kirchhoff's law ``I = Y V`` can be rewritten with
the edge admittances as unknowns, ``I = H diag(H^T V) y``.  Stacking the
``tau`` snapshots gives ``i = A(v) y`` with ``A(v)`` of size
``(n tau) x e``; ``y`` is unique exactly when ``A(v)`` has full column rank
``e = n(n-1)/2``, which for generic voltages first happens at ``tau = n-1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .linalg import DEFAULT_RANK_TOL, min_norm_solve, numerical_rank, singular_values
from .measurements import MeasurementSet
from .topology import (
    EdgeIndexing,
    build_edge_indexing,
    build_incidence_matrix,
    edge_count,
    nodes_from_edge_count,
)

DEFAULT_ZERO_TOL = 1e-6


class OutOfDomainError(ValueError):
    """The rank formula is only valid for ``n >= tau``."""


class DegenerateSystemError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    matrix: np.ndarray
    currents: np.ndarray | None
    n: int
    tau: int
    indexing: EdgeIndexing

    @property
    def e(self) -> int:
        return self.indexing.e

    def block(self, k: int) -> np.ndarray:
        """Rows belonging to snapshot ``k`` (1-based)."""
        return self.matrix[(k - 1) * self.n:k * self.n]


@dataclass(frozen=True)
class IdentifiabilityReport:
    n: int
    tau: int
    e: int
    achieved_rank: int
    expected_rank: int | None
    nullity: int
    unique: bool
    min_tau: int
    singular_values: tuple[float, ...]
    condition_number: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "tau": self.tau,
            "e": self.e,
            "achieved_rank": self.achieved_rank,
            "expected_rank": self.expected_rank,
            "min_tau": self.min_tau,
            "unique": self.unique,
            "singular_values": list(self.singular_values),
            # JSON has no infinity; null stands for "rank deficient"
            "condition_number": None if math.isinf(self.condition_number) else self.condition_number,
        }


@dataclass(frozen=True)
class IdentifiedNetwork:
    n: int
    edges: tuple[tuple[int, int, complex], ...]
    pruned: tuple[tuple[int, int, float], ...]
    residual_norm: float = 0.0

    @property
    def edge_set(self) -> set[tuple[int, int]]:
        return {(i, j) for i, j, _ in self.edges}

    def to_dict(self) -> dict:
        return {
            "residual_norm": self.residual_norm,
            "edges": [{"i": i, "j": j, "y_re": y.real, "y_im": y.imag} for i, j, y in self.edges],
            "pruned": [{"i": i, "j": j, "magnitude": m} for i, j, m in self.pruned],
        }


class AdmittanceEstimate(NamedTuple):
    y: np.ndarray
    report: IdentifiabilityReport
    residual_norm: float


def build_snapshot_coefficient(H: np.ndarray, V) -> np.ndarray:
    """``H diag(H^T V)`` for one voltage snapshot (``n x e``)."""
    V = np.asarray(V, dtype=complex)
    if V.ndim != 1 or V.shape[0] != H.shape[0]:
        raise ValueError(f"voltage vector of shape {V.shape} does not match {H.shape[0]} nodes")
    return H * (H.T @ V)[np.newaxis, :]


def build_stacked_coefficient(H: np.ndarray, mset: MeasurementSet) -> CoefficientMatrix:
    n = H.shape[0]
    if mset.n != n:
        raise ValueError(f"measurement set has {mset.n} nodes, incidence matrix has {n}")
    idx = build_edge_indexing(n)
    if H.shape[1] != idx.e:
        raise ValueError(f"incidence matrix has {H.shape[1]} columns, expected {idx.e}")
    A = np.vstack([build_snapshot_coefficient(H, s.V) for s in mset.snapshots])
    i = np.concatenate([s.I for s in mset.snapshots])
    return CoefficientMatrix(A, i, n, mset.tau, idx)


def coefficient_from_measurements(mset: MeasurementSet) -> CoefficientMatrix:
    H = build_incidence_matrix(build_edge_indexing(mset.n))
    return build_stacked_coefficient(H, mset)


def _as_coefficient(A) -> CoefficientMatrix:
    if isinstance(A, CoefficientMatrix):
        return A
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    n = nodes_from_edge_count(A.shape[1])
    if A.shape[0] % n:
        raise ValueError(f"{A.shape[0]} rows is not a multiple of n={n}")
    return CoefficientMatrix(A, None, n, A.shape[0] // n, build_edge_indexing(n))


def min_measurements(n: int) -> int:
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return n - 1


def expected_rank(n: int, tau: int) -> int:
    """Generic rank ``n tau - tau(tau+1)/2`` of the coefficient matrix."""
    if tau < 1:
        raise OutOfDomainError(f"tau must be >= 1, got {tau}")
    if n < tau:
        raise OutOfDomainError(f"rank formula needs n >= tau (n={n}, tau={tau})")
    return n * tau - tau * (tau + 1) // 2


def _report(cm: CoefficientMatrix, s: np.ndarray, rank: int) -> IdentifiabilityReport:
    e = cm.e
    unique = rank == e
    cond = float(s[0] / s[rank - 1]) if unique and rank > 0 else math.inf
    return IdentifiabilityReport(
        n=cm.n,
        tau=cm.tau,
        e=e,
        achieved_rank=rank,
        expected_rank=expected_rank(cm.n, cm.tau) if cm.n >= cm.tau else None,
        nullity=e - rank,
        unique=unique,
        min_tau=min_measurements(cm.n),
        singular_values=tuple(float(x) for x in s),
        condition_number=cond,
    )


def analyze_identifiability(A, rank_tol_rel: float = DEFAULT_RANK_TOL) -> IdentifiabilityReport:
    cm = _as_coefficient(A)
    s = singular_values(cm.matrix)
    return _report(cm, s, numerical_rank(s, rank_tol_rel))


def estimate_admittance(A, i=None, rank_tol_rel: float = DEFAULT_RANK_TOL) -> AdmittanceEstimate:
    """Minimum-norm least-squares admittance vector.

    ``i`` defaults to the currents carried by a :class:`CoefficientMatrix`.
    A non-unique system still yields the minimum-norm solution; check
    ``report.unique``.
    """
    cm = _as_coefficient(A)
    if i is None:
        i = cm.currents
    if i is None:
        raise ValueError("no stacked current vector given")
    i = np.asarray(i, dtype=complex).ravel()
    if i.shape[0] != cm.matrix.shape[0]:
        raise ValueError(f"current vector has {i.shape[0]} entries, A has {cm.matrix.shape[0]} rows")
    if not np.any(cm.matrix):
        raise DegenerateSystemError("coefficient matrix is identically zero (all voltages equal)")
    y, rank, s = min_norm_solve(cm.matrix, i, rank_tol_rel)
    denom = max(np.linalg.norm(i), np.finfo(float).tiny)
    residual = float(np.linalg.norm(cm.matrix @ y - i) / denom)
    return AdmittanceEstimate(y, _report(cm, s, rank), residual)


def extract_topology(y, zero_tol_rel: float = DEFAULT_ZERO_TOL, residual_norm: float = 0.0) -> IdentifiedNetwork:
    """Keep edges whose admittance magnitude exceeds ``zero_tol_rel * max|y|``."""
    y = np.asarray(y, dtype=complex).ravel()
    idx = build_edge_indexing(nodes_from_edge_count(y.shape[0]))
    mags = np.abs(y)
    cutoff = zero_tol_rel * mags.max()
    kept, pruned = [], []
    for (i, j), val, mag in zip(idx.edges, y, mags):
        if mag > cutoff:
            kept.append((i, j, complex(val)))
        else:
            pruned.append((i, j, float(mag)))
    return IdentifiedNetwork(idx.n, tuple(kept), tuple(pruned), float(residual_norm))


def assemble_admittance_matrix(y) -> np.ndarray:
    """``n x n`` admittance matrix with ``Y_ij = -y_ij`` and zero row sums."""
    y = np.asarray(y, dtype=complex).ravel()
    idx = build_edge_indexing(nodes_from_edge_count(y.shape[0]))
    Y = np.zeros((idx.n, idx.n), dtype=complex)
    for (i, j), val in zip(idx.edges, y):
        Y[i - 1, j - 1] = Y[j - 1, i - 1] = -val
    # diagonal as negated off-diagonal row sum so Y @ 1 == 0 in floating point too
    np.fill_diagonal(Y, 0)
    np.fill_diagonal(Y, -Y.sum(axis=1))
    return Y


def estimation_report(estimate: AdmittanceEstimate, network: IdentifiedNetwork) -> dict:
    """Combined JSON-ready report of an estimation run."""
    out = estimate.report.to_dict()
    out["residual_norm"] = estimate.residual_norm
    net = network.to_dict()
    out["edges"] = net["edges"]
    out["pruned"] = net["pruned"]
    return out
