"""Complete-graph indexing and the signed incidence matrix.

Nodes are numbered ``1..n``; the ground node is implicit.  Every
downstream matrix orders its edge axis by :class:`EdgeIndexing`, which
walks the lower triangle column by column: ``(1,2), (1,3), ..., (1,n),
(2,3), ..., (n-1,n)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InvalidNodeCountError(ValueError):
    """Raised when fewer than two nodes are requested."""


def edge_count(n: int) -> int:
    return n * (n - 1) // 2


def nodes_from_edge_count(e: int) -> int:
    """Invert ``e = n(n-1)/2``; raise if ``e`` is not a triangular number."""
    n = int(round((1 + np.sqrt(1 + 8 * e)) / 2))
    if n < 2 or edge_count(n) != e:
        raise ValueError(f"{e} is not a complete-graph edge count n(n-1)/2 with n >= 2")
    return n


@dataclass(frozen=True)
class EdgeIndexing:
    n: int
    edges: tuple[tuple[int, int], ...]
    _positions: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_positions", {edge: pos for pos, edge in enumerate(self.edges, start=1)}
        )

    @property
    def e(self) -> int:
        return len(self.edges)

    def position(self, i: int, j: int) -> int:
        """1-based position of edge ``(i, j)``; endpoint order is irrelevant."""
        key = (i, j) if i < j else (j, i)
        try:
            return self._positions[key]
        except KeyError:
            raise KeyError(f"({i}, {j}) is not an edge of K_{self.n}") from None

    def edge(self, position: int) -> tuple[int, int]:
        if not 1 <= position <= self.e:
            raise IndexError(f"edge position {position} outside 1..{self.e}")
        return self.edges[position - 1]

    def __len__(self) -> int:
        return self.e

    def __iter__(self):
        return iter(self.edges)


def build_edge_indexing(n: int) -> EdgeIndexing:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 2:
        raise InvalidNodeCountError(f"need an integer node count n >= 2, got {n!r}")
    n = int(n)
    edges = tuple((i, j) for i in range(1, n) for j in range(i + 1, n + 1))
    return EdgeIndexing(n, edges)


def build_incidence_matrix(idx: EdgeIndexing) -> np.ndarray:
    """Signed ``n x e`` incidence matrix.

    Column ``l`` for edge ``(i, j)`` holds +1 in row ``i`` (the smaller
    endpoint, where the edge leaves) and -1 in row ``j``.  With this sign
    choice ``H.T @ V`` lists the differences ``V_i - V_j`` in edge order.
    """
    H = np.zeros((idx.n, idx.e))
    for col, (i, j) in enumerate(idx.edges):
        H[i - 1, col] = 1.0
        H[j - 1, col] = -1.0
    return H
