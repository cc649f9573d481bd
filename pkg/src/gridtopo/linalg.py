"""SVD-based rank, minimum-norm solve and null space with one shared cutoff.

Singular values ``s_i > rank_tol_rel * s_max`` are treated as nonzero.
"""
from __future__ import annotations

import numpy as np

DEFAULT_RANK_TOL = 1e-8


def singular_values(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A)
    if A.size == 0:
        return np.zeros(0)
    return np.linalg.svd(A, compute_uv=False)


def numerical_rank(s: np.ndarray, rank_tol_rel: float = DEFAULT_RANK_TOL) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rank_tol_rel * s[0]))


def matrix_rank(A: np.ndarray, rank_tol_rel: float = DEFAULT_RANK_TOL) -> int:
    return numerical_rank(singular_values(A), rank_tol_rel)


def min_norm_solve(A: np.ndarray, b: np.ndarray, rank_tol_rel: float = DEFAULT_RANK_TOL):
    """Minimum-norm least-squares solution of ``A x = b`` by truncated SVD.

    Returns ``(x, rank, s)`` where ``s`` is the full singular spectrum.
    """
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    r = numerical_rank(s, rank_tol_rel)
    coeffs = (U[:, :r].conj().T @ b) / s[:r]
    x = Vh[:r].conj().T @ coeffs
    return x, r, s


def null_space(A: np.ndarray, rank_tol_rel: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the right null space of ``A``."""
    A = np.atleast_2d(A)
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    r = numerical_rank(s, rank_tol_rel)
    return Vh[r:].conj().T
