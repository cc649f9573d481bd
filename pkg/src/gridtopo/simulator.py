"""Ground-truth networks and forward simulation of ``I = Y V``."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

import numpy as np

from .estimation import assemble_admittance_matrix
from .measurements import MeasurementSet, PhasorSnapshot, validate_measurement_set
from .topology import build_edge_indexing, build_incidence_matrix

MAX_CONNECT_RETRIES = 100


class NetworkError(ValueError):
    pass


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GroundTruthNetwork:
    n: int
    edges: tuple[tuple[int, int, complex], ...]
    name: str = ""

    def __post_init__(self):
        if self.n < 2:
            raise NetworkError(f"network needs at least 2 nodes, got {self.n}")
        seen = set()
        for i, j, y in self.edges:
            if not (1 <= i < j <= self.n):
                raise NetworkError(f"edge ({i}, {j}) must satisfy 1 <= i < j <= {self.n}")
            if (i, j) in seen:
                raise NetworkError(f"duplicate edge ({i}, {j})")
            if not abs(y) > 0:
                raise NetworkError(f"edge ({i}, {j}) has zero admittance")
            seen.add((i, j))

    def admittance_vector(self) -> np.ndarray:
        idx = build_edge_indexing(self.n)
        y = np.zeros(idx.e, dtype=complex)
        for i, j, val in self.edges:
            y[idx.position(i, j) - 1] = val
        return y

    def admittance_matrix(self) -> np.ndarray:
        return assemble_admittance_matrix(self.admittance_vector())

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "edges": [{"i": i, "j": j, "y_re": complex(y).real, "y_im": complex(y).imag}
                      for i, j, y in self.edges],
            "name": self.name,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroundTruthNetwork":
        try:
            edges = tuple(
                (int(e["i"]), int(e["j"]), complex(float(e["y_re"]), float(e["y_im"])))
                for e in data["edges"]
            )
            return cls(int(data["n"]), edges, str(data.get("name", "")))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, NetworkError):
                raise
            raise NetworkError(f"malformed network description: {exc!r}") from None


def load_network(path: str | os.PathLike) -> GroundTruthNetwork:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise NetworkError(f"{path}: expected a JSON object")
    return GroundTruthNetwork.from_dict(data)


def save_network(net: GroundTruthNetwork, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(net.to_dict(), fh, indent=2)
        fh.write("\n")


def fixture_path(name: str):
    """Path to a bundled data file (``ieee4_tab1.csv``, ``ieee4_modified.json``)."""
    return resources.files("gridtopo") / "data" / name


def forward_currents(net: GroundTruthNetwork, V) -> np.ndarray:
    V = np.asarray(V, dtype=complex)
    if V.shape != (net.n,):
        raise ValueError(f"voltage vector of shape {V.shape} does not match {net.n} nodes")
    # branch-flow form H (y * H^T V): a flat profile gives exactly zero current
    H = build_incidence_matrix(build_edge_indexing(net.n))
    return H @ (net.admittance_vector() * (H.T @ V))


@dataclass(frozen=True)
class VoltageProfileSpec:
    """How voltage snapshots are drawn.

    ``perturbed``: ``nominal * (1 + perturbation * (u + j w))`` with ``u, w``
    uniform on ``[-1, 1]``.  ``random``: ``nominal * (g + j h)`` with
    standard normal ``g, h``.  ``explicit``: ``profiles`` is used as given
    (``tau x n``).
    """

    mode: str = "perturbed"
    nominal: float = 1.0
    perturbation: float = 0.05
    seed: int = 0
    profiles: Sequence | None = None

    def __post_init__(self):
        if self.mode not in ("random", "perturbed", "explicit"):
            raise ValueError(f"unknown profile mode {self.mode!r}")
        if self.mode == "perturbed" and not 0 < self.perturbation < 1:
            raise ValueError(f"perturbation must lie in (0, 1), got {self.perturbation}")
        if self.mode == "explicit" and self.profiles is None:
            raise ValueError("explicit mode needs profiles")

    def draw(self, n: int, tau: int) -> np.ndarray:
        if self.mode == "explicit":
            V = np.atleast_2d(np.asarray(self.profiles, dtype=complex))
            if V.shape != (tau, n):
                raise ValueError(f"explicit profiles have shape {V.shape}, expected ({tau}, {n})")
            return V
        rng = np.random.default_rng(self.seed)
        if self.mode == "random":
            return self.nominal * (rng.standard_normal((tau, n)) + 1j * rng.standard_normal((tau, n)))
        u = rng.uniform(-1, 1, (tau, n))
        w = rng.uniform(-1, 1, (tau, n))
        return self.nominal * (1 + self.perturbation * (u + 1j * w))


def generate_measurements(net: GroundTruthNetwork, spec: VoltageProfileSpec, tau: int) -> MeasurementSet:
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    V = spec.draw(net.n, tau)
    return validate_measurement_set(
        PhasorSnapshot(k, v, forward_currents(net, v)) for k, v in enumerate(V, start=1)
    )


def _connected(n: int, edges) -> bool:
    adj = {i: set() for i in range(1, n + 1)}
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    seen, stack = {1}, [1]
    while stack:
        for nb in adj[stack.pop()] - seen:
            seen.add(nb)
            stack.append(nb)
    return len(seen) == n


def generate_random_network(n: int, edge_density: float = 0.5,
                            magnitude_range: tuple[float, float] = (0.5, 5.0),
                            seed: int = 0, real: bool = False,
                            name: str = "") -> GroundTruthNetwork:
    """Random connected network on ``n`` nodes.

    Each candidate edge is kept with probability ``edge_density``; draws are
    repeated until the graph is connected.  Complex admittances get an angle
    in ``[-80, -30]`` degrees (inductive lines); ``real=True`` gives positive
    conductances for d.c. networks.
    """
    if not 0 < edge_density <= 1:
        raise ValueError(f"edge_density must lie in (0, 1], got {edge_density}")
    idx = build_edge_indexing(n)
    lo, hi = magnitude_range
    rng = np.random.default_rng(seed)
    for _ in range(MAX_CONNECT_RETRIES):
        keep = rng.random(idx.e) < edge_density
        chosen = [edge for edge, k in zip(idx.edges, keep) if k]
        mags = rng.uniform(lo, hi, len(chosen))
        angles = np.deg2rad(rng.uniform(-80, -30, len(chosen)))
        if not _connected(n, chosen):
            continue
        ys = mags if real else mags * np.exp(1j * angles)
        edges = tuple((i, j, complex(y)) for (i, j), y in zip(chosen, ys))
        return GroundTruthNetwork(n, edges, name or f"random-n{n}-seed{seed}")
    raise GenerationError(
        f"no connected graph after {MAX_CONNECT_RETRIES} draws (n={n}, density={edge_density}, seed={seed})")
