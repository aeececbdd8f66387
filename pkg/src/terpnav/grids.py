"""Robot-centric grid types and the pure math shared by sensing, attention
and planning.

All grids are square n x n (n even) with the robot at the centered index
(0, 0).  Row index +i points along the robot's heading, column index +j
points to the robot's left, so the forward column is j = 0.  Centered
indices span [-n/2, n/2) and map to metric robot-frame coordinates via
(x, y) = res * (i, j).

Grid exchange file format (shared by elevation grids, attention masks and
cost-maps): UTF-8 text, line 1 is the header ``n res``, optionally followed
by ``#`` comment lines (``# provider: ...`` on masks), then n lines of n
decimal values row-major.  Missing cells are encoded as ``nan``; cost-maps
may contain ``inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, GridFormatError, SensingError


def _as_square(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ContractError(f"{name} must be a square 2-D array, got shape {arr.shape}")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=arr.dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ElevationGrid:
    """Robot-centric height field in meters with per-cell missing markers.

    Attributes:
        n: cells per side (even, >= 4).
        res: meters per cell (> 0).
        values: (n, n) heights; entries under ``missing`` hold nan.
        missing: (n, n) bool, True where the cell was not sensed.
    """

    n: int
    res: float
    values: np.ndarray
    missing: np.ndarray

    def __post_init__(self):
        if self.n % 2 != 0 or self.n < 4:
            raise ContractError(f"grid side n must be even and >= 4, got {self.n}")
        if not self.res > 0:
            raise ContractError(f"grid resolution must be > 0, got {self.res}")
        vals = _as_square(self.values, "elevation values")
        if vals.shape[0] != self.n:
            raise ContractError(f"values shape {vals.shape} does not match n={self.n}")
        miss = np.asarray(self.missing, dtype=bool)
        if miss.shape != vals.shape:
            raise ContractError("missing mask shape does not match values")
        known = vals[~miss]
        if known.size and not np.all(np.isfinite(known)):
            raise ContractError("non-missing elevation values must be finite")
        object.__setattr__(self, "values", _freeze(vals))
        object.__setattr__(self, "missing", _freeze(miss))

    @classmethod
    def from_values(cls, values, res: float) -> "ElevationGrid":
        """Build a fully-sensed grid; nan entries become missing cells."""
        vals = _as_square(values, "elevation values")
        return cls(n=vals.shape[0], res=float(res), values=vals,
                   missing=~np.isfinite(vals))

    @property
    def is_complete(self) -> bool:
        return not bool(self.missing.any())

    def extrema(self) -> tuple[float, float]:
        """(e_min, e_max) over non-missing cells."""
        known = self.values[~self.missing]
        if known.size == 0:
            raise SensingError("grid has no sensed cells")
        return float(known.min()), float(known.max())


@dataclass(frozen=True)
class AttentionMask:
    """Per-cell weights in [0, 1] emphasizing navigation-relevant cells."""

    n: int
    values: np.ndarray
    provider: str = "analytic"

    def __post_init__(self):
        vals = _as_square(self.values, "mask values")
        if vals.shape[0] != self.n:
            raise ContractError(f"mask shape {vals.shape} does not match n={self.n}")
        if not np.all(np.isfinite(vals)):
            raise ContractError("mask values must be finite")
        if vals.min() < 0.0 or vals.max() > 1.0:
            raise ContractError("mask values must lie in [0, 1]")
        object.__setattr__(self, "values", _freeze(vals))


@dataclass(frozen=True)
class CostMap:
    """Non-negative navigation costs with +inf marking forbidden cells."""

    n: int
    res: float
    values: np.ndarray
    c_max: float

    def __post_init__(self):
        vals = _as_square(self.values, "cost values")
        if vals.shape[0] != self.n:
            raise ContractError(f"cost shape {vals.shape} does not match n={self.n}")
        if np.isnan(vals).any():
            raise ContractError("cost-map entries must be >= 0 or +inf, got nan")
        finite = vals[np.isfinite(vals)]
        if finite.size and finite.min() < 0.0:
            raise ContractError("cost-map entries must be non-negative")
        if finite.size and finite.max() > self.c_max + 1e-12:
            raise ContractError("finite cost-map entries must not exceed c_max")
        object.__setattr__(self, "values", _freeze(vals))

    def at(self, i: int, j: int) -> float:
        """Cost at centered index (i, j)."""
        h = self.n // 2
        return float(self.values[i + h, j + h])


@dataclass(frozen=True)
class GradientField:
    """Terrain slope magnitudes plus the forward-column heading vector.

    ``magnitudes`` holds |grad z| in m/m for every cell.  ``heading`` has
    exactly n/2 entries: the forward column j = 0 read far-to-near, rows
    n/2 - 1 down to 0 (the robot's own cell is the last entry).
    """

    n: int
    res: float
    magnitudes: np.ndarray
    heading: np.ndarray

    def __post_init__(self):
        mags = _as_square(self.magnitudes, "gradient magnitudes")
        if mags.shape[0] != self.n:
            raise ContractError(f"gradient shape {mags.shape} does not match n={self.n}")
        if mags.min() < 0.0:
            raise ContractError("gradient magnitudes must be non-negative")
        head = np.asarray(self.heading, dtype=float)
        if head.shape != (self.n // 2,):
            raise ContractError(f"heading vector must have n/2 entries, got {head.shape}")
        object.__setattr__(self, "magnitudes", _freeze(mags))
        object.__setattr__(self, "heading", _freeze(head))


# ---------------------------------------------------------------------------
# index <-> world conversion


def index_to_world(i, j, n: int, res: float):
    """Map centered indices to robot-frame meters: (x, y) = res * (i, j).

    Accepts scalars or arrays.  Raises ContractError when an index falls
    outside [-n/2, n/2).
    """
    if not res > 0:
        raise ContractError("res must be > 0")
    i_arr = np.asarray(i)
    j_arr = np.asarray(j)
    h = n // 2
    if ((i_arr < -h) | (i_arr >= h) | (j_arr < -h) | (j_arr >= h)).any():
        raise ContractError(f"index outside grid range [-{h}, {h})")
    x = res * np.asarray(i_arr, dtype=float)
    y = res * np.asarray(j_arr, dtype=float)
    if np.isscalar(i) and np.isscalar(j):
        return float(x), float(y)
    return x, y


def world_to_index(x, y, n: int, res: float):
    """Rounding inverse of :func:`index_to_world`.

    Positions round to the nearest cell (ties to even).  Raises
    ContractError when the rounded cell falls outside the grid.
    """
    if not res > 0:
        raise ContractError("res must be > 0")
    i = np.rint(np.asarray(x, dtype=float) / res).astype(int)
    j = np.rint(np.asarray(y, dtype=float) / res).astype(int)
    h = n // 2
    if ((i < -h) | (i >= h) | (j < -h) | (j >= h)).any():
        raise ContractError(f"position maps outside grid range [-{h}, {h}) cells")
    if np.isscalar(x) and np.isscalar(y):
        return int(i), int(j)
    return i, j


def centered_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Meshgrid of centered (i, j) indices in array order."""
    side = np.arange(-(n // 2), n // 2)
    return np.meshgrid(side, side, indexing="ij")


# ---------------------------------------------------------------------------
# grid operations


def normalize_elevation(grid: ElevationGrid, clearance: float) -> ElevationGrid:
    """Clearance-shift the grid and add a relief penalty above clearance.

    Per cell: value = (E - c) + 0.1 * (e_max - e_min) when E - c > 0,
    otherwise (E - c).  e_max/e_min are taken over the input grid.
    """
    if not grid.is_complete:
        raise ContractError("normalize_elevation requires a fully infilled grid")
    if clearance < 0:
        raise ContractError("ground clearance must be >= 0")
    e_min, e_max = grid.extrema()
    shifted = grid.values - clearance
    out = np.where(shifted > 0, shifted + 0.1 * (e_max - e_min), shifted)
    return ElevationGrid(n=grid.n, res=grid.res, values=out,
                         missing=np.zeros_like(grid.missing))


def gradient_field(grid: ElevationGrid) -> GradientField:
    """Euclidean norm of the finite-difference gradient, in m/m.

    Interior cells use central differences, borders one-sided, both scaled
    by 1/res.  The heading vector is the forward column read far-to-near.
    """
    if not grid.is_complete:
        raise ContractError("gradient_field requires a fully infilled grid")
    di, dj = np.gradient(grid.values, grid.res)
    mags = np.hypot(di, dj)
    h = grid.n // 2
    heading = mags[-1:h - 1:-1, h] if h > 0 else np.zeros(0)
    return GradientField(n=grid.n, res=grid.res, magnitudes=mags, heading=heading)


def infill_missing(grid: ElevationGrid) -> ElevationGrid:
    """Fill missing cells from their nearest sensed cell.

    Nearest is Euclidean distance in index space; ties break to the smaller
    row then smaller column, so infill is deterministic.
    """
    if grid.is_complete:
        return grid
    known_mask = ~grid.missing
    if not known_mask.any():
        raise SensingError("cannot infill a grid with no sensed cells")
    known = np.argwhere(known_mask)  # row-major order == (row, col) lexicographic
    holes = np.argwhere(grid.missing)
    values = np.array(grid.values)
    known_vals = grid.values[known[:, 0], known[:, 1]]
    # chunk the (holes x known) distance matrix to bound memory
    max_entries = 4_000_000
    chunk = max(1, max_entries // max(1, len(known)))
    for s in range(0, len(holes), chunk):
        block = holes[s:s + chunk]
        d2 = ((block[:, None, 0] - known[None, :, 0]).astype(np.int32) ** 2
              + (block[:, None, 1] - known[None, :, 1]).astype(np.int32) ** 2)
        nearest = np.argmin(d2, axis=1)  # first min == smallest (row, col)
        values[block[:, 0], block[:, 1]] = known_vals[nearest]
    return ElevationGrid(n=grid.n, res=grid.res, values=values,
                         missing=np.zeros_like(grid.missing))


# ---------------------------------------------------------------------------
# grid exchange files


def _format_value(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def save_grid_file(path, values, res: float, provider: str | None = None) -> None:
    """Write a grid exchange file; nan marks missing cells."""
    arr = _as_square(values, "grid values")
    n = arr.shape[0]
    lines = [f"{n} {res!r}"]
    if provider is not None:
        lines.append(f"# provider: {provider}")
    for row in arr:
        lines.append(" ".join(_format_value(v) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_grid_file(path) -> tuple[np.ndarray, float, str | None]:
    """Read a grid exchange file.

    Returns (values, res, provider).  Missing cells come back as nan; the
    provider is taken from a ``# provider:`` comment when present.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.read().splitlines()
    if not raw:
        raise GridFormatError(f"{path}: empty grid file")
    header = raw[0].split()
    if len(header) != 2:
        raise GridFormatError(f"{path}: header must be 'n res', got {raw[0]!r}")
    try:
        n = int(header[0])
        res = float(header[1])
    except ValueError as exc:
        raise GridFormatError(f"{path}: bad header {raw[0]!r}") from exc
    if n <= 0 or not res > 0:
        raise GridFormatError(f"{path}: header values out of range: n={n} res={res}")
    provider = None
    rows = []
    for line in raw[1:]:
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if body.startswith("provider:"):
                provider = body.split(":", 1)[1].strip()
            continue
        tokens = stripped.split()
        if len(tokens) != n:
            raise GridFormatError(f"{path}: expected {n} values per row, got {len(tokens)}")
        try:
            rows.append([float(t) for t in tokens])
        except ValueError as exc:
            raise GridFormatError(f"{path}: non-numeric grid value") from exc
    if len(rows) != n:
        raise GridFormatError(f"{path}: expected {n} rows, got {len(rows)}")
    return np.array(rows, dtype=float), res, provider


def save_elevation(path, grid: ElevationGrid) -> None:
    vals = np.array(grid.values)
    vals[grid.missing] = np.nan
    save_grid_file(path, vals, grid.res)


def load_elevation(path) -> ElevationGrid:
    values, res, _ = load_grid_file(path)
    return ElevationGrid.from_values(values, res)
