"""TSPLIB instances, the EUC_2D metric, tours and a brute-force optimum."""

from __future__ import annotations

import io
import itertools
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

# Full distance / heuristic matrices are only built up to this size.
MATRIX_LIMIT = 5000
BRUTE_FORCE_LIMIT = 10


class TSPLIBError(ValueError):
    """Malformed or unsupported TSPLIB input."""

    def __init__(self, message: str, lineno: int | None = None) -> None:
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class TourError(ValueError):
    pass


def euc2d(dx, dy):
    """TSPLIB nint(sqrt(dx^2 + dy^2)), halves rounded up. Works on scalars and arrays."""
    return np.floor(np.sqrt(dx * dx + dy * dy) + 0.5)


def ipow(x, e: float):
    """x**e. Integral exponents use binary exponentiation (same op order as the C kernel)."""
    if float(e).is_integer() and e >= 0:
        k = int(e)
        result = np.ones_like(x, dtype=np.float64) if isinstance(x, np.ndarray) else 1.0
        base = x
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result
    return np.power(x, e)


@dataclass(frozen=True, eq=False)
class Instance:
    """An immutable symmetric EUC_2D instance.

    ``coords`` is an ``(n, 2)`` float array. ``optimum`` is the known optimal
    (or best known) tour length when one has been supplied.
    """

    name: str
    coords: np.ndarray
    optimum: int | None = None
    comment: str = ""
    _eta_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        coords = np.array(self.coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ValueError("coords must have shape (n, 2)")
        if coords.shape[0] < 3:
            raise ValueError(f"an instance needs at least 3 cities, got {coords.shape[0]}")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        if self.optimum is not None and self.optimum <= 0:
            raise ValueError("optimum must be positive")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def with_optimum(self, optimum: int | None) -> "Instance":
        return Instance(self.name, self.coords, optimum, self.comment)

    @cached_property
    def dist_matrix(self) -> np.ndarray | None:
        """Full int32 distance matrix, or None above MATRIX_LIMIT cities."""
        if self.n > MATRIX_LIMIT:
            return None
        x, y = self.coords[:, 0], self.coords[:, 1]
        d = euc2d(x[:, None] - x[None, :], y[:, None] - y[None, :]).astype(np.int32)
        d.setflags(write=False)
        return d

    def eta_pow(self, beta: float) -> np.ndarray | None:
        """Matrix of (1/max(d, 1))**beta, or None above MATRIX_LIMIT cities."""
        d = self.dist_matrix
        if d is None:
            return None
        key = float(beta)
        if key not in self._eta_cache:
            eta = 1.0 / np.maximum(d, 1).astype(np.float64)
            m = ipow(eta, key)
            m.setflags(write=False)
            self._eta_cache[key] = m
        return self._eta_cache[key]

    def dist(self, i: int, j: int) -> int:
        d = self.dist_matrix
        if d is not None:
            return int(d[i, j])
        (xi, yi), (xj, yj) = self.coords[i], self.coords[j]
        return int(euc2d(xi - xj, yi - yj))

    def dists(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Vectorised pairwise distances dist(a[t], b[t]) as int64."""
        d = self.dist_matrix
        if d is not None:
            return d[a, b].astype(np.int64)
        ca, cb = self.coords[a], self.coords[b]
        return euc2d(ca[:, 0] - cb[:, 0], ca[:, 1] - cb[:, 1]).astype(np.int64)


def dist(inst: Instance, i: int, j: int) -> int:
    return inst.dist(i, j)


def check_permutation(order: Sequence[int] | np.ndarray, n: int) -> np.ndarray:
    arr = np.asarray(order)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise TourError(f"tour has {arr.shape[0] if arr.ndim == 1 else '?'} entries, expected {n}")
    if not np.issubdtype(arr.dtype, np.integer):
        raise TourError("tour entries must be integers")
    if arr.min() < 0 or arr.max() >= n:
        raise TourError("tour contains an out-of-range city")
    counts = np.bincount(arr, minlength=n)
    if np.any(counts != 1):
        dup = int(np.flatnonzero(counts > 1)[0]) if np.any(counts > 1) else None
        missing = int(np.flatnonzero(counts == 0)[0])
        raise TourError(f"not a permutation: city {dup} repeated, city {missing} missing")
    return arr


def tour_length(inst: Instance, order: Sequence[int] | np.ndarray) -> int:
    """Length of the closed cycle through ``order``."""
    arr = check_permutation(order, inst.n).astype(np.intp)
    return int(inst.dists(arr, np.roll(arr, -1)).sum())


@dataclass(frozen=True, eq=False)
class Tour:
    """A closed tour: a permutation of city indices and its length."""

    order: np.ndarray
    length: int

    @classmethod
    def of(cls, inst: Instance, order: Sequence[int] | np.ndarray) -> "Tour":
        arr = np.array(order, dtype=np.int32)
        length = tour_length(inst, arr)
        arr.setflags(write=False)
        return cls(arr, length)

    @property
    def n(self) -> int:
        return self.order.shape[0]

    def edges(self) -> set[frozenset[int]]:
        o = self.order.tolist()
        return {frozenset((o[i], o[(i + 1) % len(o)])) for i in range(len(o))}

    def same_cycle(self, other: "Tour") -> bool:
        return self.n == other.n and self.edges() == other.edges()


def brute_force_optimum(inst: Instance) -> Tour:
    """Exact optimum by enumerating all tours with city 0 fixed (n <= 10)."""
    n = inst.n
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_LIMIT} cities, got {n}")
    d = inst.dist_matrix.tolist()
    best_len, best = math.inf, None
    for perm in itertools.permutations(range(1, n)):
        if perm[0] > perm[-1]:
            continue  # mirror image of a tour already seen
        total = d[0][perm[0]] + d[perm[-1]][0]
        for a, b in zip(perm, perm[1:]):
            total += d[a][b]
        if total < best_len:
            best_len, best = total, perm
    return Tour.of(inst, (0,) + best)


# --------------------------------------------------------------------------
# TSPLIB text format

def _open_text(source) -> tuple[IO[str], bool]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8"), True
    return source, False


def parse_tsplib(source: str | os.PathLike | IO[str], optimum: int | None = None) -> Instance:
    """Read an EUC_2D TSPLIB file (path or text stream).

    TSPLIB ids are 1-based; cities are indexed 0..n-1 in file order.
    """
    stream, owned = _open_text(source)
    try:
        return _parse_lines(stream, optimum)
    finally:
        if owned:
            stream.close()


def parse_tsplib_text(text: str, optimum: int | None = None) -> Instance:
    return parse_tsplib(io.StringIO(text), optimum)


def _parse_lines(lines: Iterable[str], optimum: int | None) -> Instance:
    header: dict[str, str] = {}
    comments: list[str] = []
    coords: list[tuple[float, float]] = []
    ids: set[str] = set()
    in_coords = False
    section_line = None
    dimension = None
    lineno = 0

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if in_coords:
            if line.upper() == "EOF":
                break
            parts = line.split()
            if len(parts) != 3:
                raise TSPLIBError(f"expected 'id x y', got {line!r}", lineno)
            ident, xs, ys = parts
            try:
                x, y = float(xs), float(ys)
            except ValueError:
                raise TSPLIBError(f"non-numeric coordinate in {line!r}", lineno) from None
            if not (math.isfinite(x) and math.isfinite(y)):
                raise TSPLIBError(f"non-finite coordinate in {line!r}", lineno)
            if ident in ids:
                raise TSPLIBError(f"duplicate node id {ident}", lineno)
            ids.add(ident)
            if len(coords) == dimension:
                raise TSPLIBError(f"more than DIMENSION={dimension} coordinate lines", lineno)
            coords.append((x, y))
            continue

        upper = line.upper()
        if upper == "EOF":
            break
        if upper.startswith("NODE_COORD_SECTION"):
            section_line = lineno
            if "DIMENSION" not in header:
                raise TSPLIBError("NODE_COORD_SECTION before DIMENSION", lineno)
            ewt = header.get("EDGE_WEIGHT_TYPE")
            if ewt is None:
                raise TSPLIBError("missing EDGE_WEIGHT_TYPE", lineno)
            if ewt.upper() != "EUC_2D":
                raise TSPLIBError(f"unsupported EDGE_WEIGHT_TYPE {ewt!r} (only EUC_2D)", lineno)
            in_coords = True
            continue
        if upper.endswith("_SECTION"):
            raise TSPLIBError(f"unsupported section {line!r}", lineno)
        if ":" not in line:
            raise TSPLIBError(f"malformed header line {line!r}", lineno)
        key, _, value = line.partition(":")
        key, value = key.strip().upper(), value.strip()
        if key == "COMMENT":
            comments.append(value)
            continue
        header[key] = value
        if key == "DIMENSION":
            try:
                dimension = int(value)
            except ValueError:
                raise TSPLIBError(f"DIMENSION is not an integer: {value!r}", lineno) from None
            if dimension < 3:
                raise TSPLIBError(f"DIMENSION must be at least 3, got {dimension}", lineno)
        elif key == "TYPE" and value.upper() not in ("TSP",):
            raise TSPLIBError(f"unsupported problem TYPE {value!r}", lineno)

    if section_line is None:
        raise TSPLIBError("missing NODE_COORD_SECTION", lineno or None)
    if len(coords) != dimension:
        raise TSPLIBError(
            f"DIMENSION is {dimension} but {len(coords)} coordinate lines were read", lineno
        )
    name = header.get("NAME", "unnamed")
    return Instance(name, np.array(coords), optimum, "; ".join(comments))


def write_tsplib(inst: Instance, dest: str | os.PathLike | IO[str]) -> None:
    own = isinstance(dest, (str, os.PathLike))
    out = open(dest, "w", encoding="utf-8") if own else dest
    try:
        out.write(f"NAME : {inst.name}\n")
        if inst.comment:
            out.write(f"COMMENT : {inst.comment}\n")
        out.write("TYPE : TSP\n")
        out.write(f"DIMENSION : {inst.n}\n")
        out.write("EDGE_WEIGHT_TYPE : EUC_2D\n")
        out.write("NODE_COORD_SECTION\n")
        for i, (x, y) in enumerate(inst.coords.tolist(), start=1):
            out.write(f"{i} {x!r} {y!r}\n")
        out.write("EOF\n")
    finally:
        if own:
            out.close()


def load_optima(path: str | os.PathLike) -> dict[str, int]:
    """Read ``name optimum`` lines; ``#`` starts a comment."""
    optima: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'name optimum'")
            try:
                value = int(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: optimum is not an integer") from None
            if value <= 0:
                raise ValueError(f"{path}:{lineno}: optimum must be positive")
            optima[parts[0]] = value
    return optima


def load_instance(path: str | os.PathLike, optima: dict[str, int] | None = None) -> Instance:
    inst = parse_tsplib(path)
    if optima:
        key = inst.name if inst.name in optima else Path(path).stem
        if key in optima:
            inst = inst.with_optimum(optima[key])
    return inst


def random_instance(n: int, rng: np.random.Generator, scale: float = 1000.0, name: str | None = None) -> Instance:
    """Uniform random integer-coordinate instance (tests and demos)."""
    coords = rng.integers(0, int(scale), size=(n, 2)).astype(np.float64)
    return Instance(name or f"rand{n}", coords)
