"""Phasor measurement campaigns: data model, validation and CSV I/O.

CSV layout (header required)::

    k,node,v_re,v_im,i_re,i_im

one row per (snapshot, node) pair with ``k`` in ``1..tau`` and ``node`` in
``1..n``.  Row order is irrelevant on input; output is sorted by ``(k, node)``.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import os
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, TextIO, Union

import numpy as np

log = logging.getLogger(__name__)

CSV_HEADER = ("k", "node", "v_re", "v_im", "i_re", "i_im")


class MeasurementError(ValueError):
    """Hard validation failure; ``violations`` lists every problem found."""

    def __init__(self, message: str, violations: Iterable["Diagnostic"] = ()):
        super().__init__(message)
        self.violations = list(violations)


class MeasurementShapeError(MeasurementError):
    pass


class CsvParseError(MeasurementError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CompletenessError(MeasurementError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # "shape" | "non-finite" | "distinctness"
    message: str
    k: int | None = None
    node: int | None = None


@dataclass(frozen=True, eq=False)
class PhasorSnapshot:
    k: int
    V: np.ndarray
    I: np.ndarray

    def __post_init__(self):
        for name in ("V", "I"):
            arr = np.array(getattr(self, name), dtype=complex)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.V.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PhasorSnapshot):
            return NotImplemented
        return (
            self.k == other.k
            and np.array_equal(self.V, other.V)
            and np.array_equal(self.I, other.I)
        )


@dataclass(frozen=True)
class NodalVoltageProfile:
    node: int
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """Validated campaign of ``tau`` snapshots over ``n`` nodes.

    Build through :func:`validate_measurement_set` rather than directly.
    Distinctness problems are kept in ``diagnostics``; they do not block use.
    """

    n: int
    snapshots: tuple[PhasorSnapshot, ...]
    diagnostics: tuple[Diagnostic, ...] = field(default=())

    @property
    def tau(self) -> int:
        return len(self.snapshots)

    @property
    def voltages(self) -> np.ndarray:
        """``tau x n`` array, row ``k-1`` is ``V^(k)``."""
        return np.vstack([s.V for s in self.snapshots])

    @property
    def currents(self) -> np.ndarray:
        return np.vstack([s.I for s in self.snapshots])

    def head(self, tau: int) -> "MeasurementSet":
        """The first ``tau`` snapshots as a new validated set."""
        if not 1 <= tau <= self.tau:
            raise ValueError(f"tau must be in 1..{self.tau}, got {tau}")
        return validate_measurement_set(self.snapshots[:tau])

    def conjugated_voltages(self) -> "MeasurementSet":
        """Copy with every voltage phasor replaced by its complex conjugate.

        Useful for data recorded with the opposite phase-angle sign convention
        on voltages than on currents.
        """
        return validate_measurement_set(
            PhasorSnapshot(s.k, np.conj(s.V), s.I) for s in self.snapshots
        )

    def __eq__(self, other):
        if not isinstance(other, MeasurementSet):
            return NotImplemented
        return self.n == other.n and self.snapshots == other.snapshots

    @classmethod
    def from_arrays(cls, V, I) -> "MeasurementSet":
        """Build from ``tau x n`` voltage and current arrays."""
        V = np.atleast_2d(np.asarray(V, dtype=complex))
        I = np.atleast_2d(np.asarray(I, dtype=complex))
        if V.shape != I.shape:
            raise MeasurementShapeError(
                f"voltage array {V.shape} and current array {I.shape} differ in shape"
            )
        return validate_measurement_set(
            PhasorSnapshot(k, v, i) for k, (v, i) in enumerate(zip(V, I), start=1)
        )


def _as_snapshot(raw, position: int) -> PhasorSnapshot:
    if isinstance(raw, PhasorSnapshot):
        return raw
    if isinstance(raw, dict):
        return PhasorSnapshot(raw.get("k", position), raw["V"], raw["I"])
    k, V, I = raw if len(raw) == 3 else (position, *raw)
    return PhasorSnapshot(k, V, I)


def validate_measurement_set(snapshots) -> MeasurementSet:
    """Check a raw snapshot sequence and return a :class:`MeasurementSet`.

    ``snapshots`` may hold :class:`PhasorSnapshot` objects, ``(k, V, I)`` or
    ``(V, I)`` tuples, or dicts with ``V``/``I`` keys; an existing
    ``MeasurementSet`` is re-validated and comes back equal.  Shape and
    non-finite problems raise :class:`MeasurementError` listing all of them;
    equal consecutive phasors at a node are recorded as diagnostics only.
    """
    if isinstance(snapshots, MeasurementSet):
        snapshots = snapshots.snapshots
    snaps = [_as_snapshot(raw, pos) for pos, raw in enumerate(snapshots, start=1)]
    if not snaps:
        raise CompletenessError("measurement set is empty")
    snaps.sort(key=lambda s: s.k)

    errors: list[Diagnostic] = []
    n = snaps[0].V.shape[0] if snaps[0].V.ndim == 1 else -1
    for s in snaps:
        if s.V.ndim != 1 or s.I.ndim != 1 or s.V.shape != s.I.shape:
            errors.append(Diagnostic(
                "shape", f"snapshot {s.k}: V has shape {s.V.shape}, I has shape {s.I.shape}", k=s.k))
        elif s.V.shape[0] != n:
            errors.append(Diagnostic(
                "shape", f"snapshot {s.k}: {s.V.shape[0]} nodes, expected {n}", k=s.k))
    if n < 2:
        errors.append(Diagnostic("shape", f"need at least 2 nodes, got {max(n, 0)}"))
    ks = [s.k for s in snaps]
    if ks != list(range(1, len(snaps) + 1)):
        errors.append(Diagnostic("shape", f"snapshot indices must be 1..{len(snaps)}, got {ks}"))
    if errors:
        raise MeasurementShapeError("; ".join(d.message for d in errors), errors)

    for s in snaps:
        for name, arr in (("V", s.V), ("I", s.I)):
            for node in np.flatnonzero(~np.isfinite(arr)) + 1:
                errors.append(Diagnostic(
                    "non-finite", f"{name}_{node}^({s.k}) is not finite", k=s.k, node=int(node)))
    if errors:
        raise MeasurementError("; ".join(d.message for d in errors), errors)

    notes = []
    for prev, cur in zip(snaps, snaps[1:]):
        for name, a, b in (("V", prev.V, cur.V), ("I", prev.I, cur.I)):
            for node in np.flatnonzero(a == b) + 1:
                notes.append(Diagnostic(
                    "distinctness",
                    f"{name}_{node} is identical at k={prev.k} and k={cur.k}",
                    k=prev.k, node=int(node)))
    for d in notes:
        log.warning(d.message)
    return MeasurementSet(n, tuple(snaps), tuple(notes))


def nodal_profiles(mset: MeasurementSet) -> list[NodalVoltageProfile]:
    V = mset.voltages
    return [NodalVoltageProfile(node, V[:, node - 1].copy()) for node in range(1, mset.n + 1)]


Source = Union[str, os.PathLike, bytes, BinaryIO, TextIO]


def _read_text(source: Source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as fh:
            return fh.read()
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def _parse_float(text: str, line: int, column: str) -> float:
    try:
        return float(text.strip())
    except ValueError:
        raise CsvParseError(f"column {column!r}: cannot parse {text!r} as a number", line) from None


def _parse_index(text: str, line: int, column: str) -> int:
    try:
        value = int(text.strip())
    except ValueError:
        raise CsvParseError(f"column {column!r}: {text!r} is not an integer", line) from None
    if value < 1:
        raise CsvParseError(f"column {column!r}: index must be >= 1, got {value}", line)
    return value


def read_measurements_csv(source: Source) -> MeasurementSet:
    """Parse a measurement CSV from a path, ``bytes`` or an open stream."""
    text = _read_text(source)
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise CompletenessError("measurement file is empty") from None
    header = [h.strip().lstrip("﻿") for h in header]
    if tuple(header) != CSV_HEADER:
        raise CsvParseError(f"expected header {','.join(CSV_HEADER)}, got {','.join(header)}", 1)

    cells: dict[tuple[int, int], tuple[complex, complex]] = {}
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(CSV_HEADER):
            raise CsvParseError(f"expected {len(CSV_HEADER)} fields, got {len(row)}", line)
        k = _parse_index(row[0], line, "k")
        node = _parse_index(row[1], line, "node")
        v_re, v_im, i_re, i_im = (
            _parse_float(text, line, col) for text, col in zip(row[2:], CSV_HEADER[2:])
        )
        if (k, node) in cells:
            raise CsvParseError(f"duplicate row for k={k}, node={node}", line)
        cells[(k, node)] = (complex(v_re, v_im), complex(i_re, i_im))

    if not cells:
        raise CompletenessError("measurement file has no data rows")
    tau = max(k for k, _ in cells)
    n = max(node for _, node in cells)
    missing = [(k, node) for k in range(1, tau + 1) for node in range(1, n + 1)
               if (k, node) not in cells]
    if missing:
        shown = ", ".join(f"(k={k}, node={j})" for k, j in missing[:10])
        more = f" and {len(missing) - 10} more" if len(missing) > 10 else ""
        raise CompletenessError(f"missing measurements for {shown}{more}")

    snaps = []
    for k in range(1, tau + 1):
        pairs = [cells[(k, node)] for node in range(1, n + 1)]
        snaps.append(PhasorSnapshot(k, [p[0] for p in pairs], [p[1] for p in pairs]))
    return validate_measurement_set(snaps)


def write_measurements_csv(mset: MeasurementSet, dest: Union[str, os.PathLike, BinaryIO, None] = None) -> bytes:
    """Serialize ``mset``; floats use ``repr`` so reading back is bit-exact.

    Returns the encoded bytes and also writes them to ``dest`` if given.
    """
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for s in mset.snapshots:
        for node, (v, i) in enumerate(zip(s.V, s.I), start=1):
            writer.writerow([s.k, node, repr(float(v.real)), repr(float(v.imag)),
                             repr(float(i.real)), repr(float(i.imag))])
    data = buf.getvalue().encode("utf-8")
    if dest is not None:
        if isinstance(dest, (str, os.PathLike)):
            with open(dest, "wb") as fh:
                fh.write(data)
        else:
            dest.write(data)
    return data
