"""2-D value grid and its on-disk formats.

A :class:`Grid` is the common carrier for heatmaps, masks, binary feature
maps, predictions, and gradients.  In memory values are float64; the binary
file format stores little-endian float32, so a write/read round trip is
bit-stable from the first write onward.

Binary format: one ASCII header line ``GRID <width> <height>\\n`` followed by
``width * height`` little-endian 32-bit floats in row-major order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SchemaError, ValidationError

_MAGIC = b"GRID"


@dataclass(frozen=True)
class Grid:
    """Immutable 2-D array of real values.

    ``values`` has shape ``(height, width)``.  The array is copied on
    construction and marked read-only.
    """

    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.float64, order="C", copy=True)
        if arr.ndim != 2 or arr.size == 0:
            raise ValidationError(f"grid values must be a non-empty 2-D array, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValidationError("grid values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def is_unit_range(self) -> bool:
        """True when every value lies in [0, 1]."""
        return bool((self.values >= 0.0).all() and (self.values <= 1.0).all())

    def is_binary(self) -> bool:
        """True when every value is exactly 0.0 or 1.0."""
        v = self.values
        return bool(((v == 0.0) | (v == 1.0)).all())


def write_grid(grid: Grid, path: str | Path) -> None:
    """Write ``grid`` in the binary format (header + little-endian float32)."""
    payload = grid.values.astype("<f4").tobytes(order="C")
    header = f"GRID {grid.width} {grid.height}\n".encode("ascii")
    Path(path).write_bytes(header + payload)


def read_grid(path: str | Path) -> Grid:
    """Read a binary grid file written by :func:`write_grid`."""
    raw = Path(path).read_bytes()
    newline = raw.find(b"\n")
    if newline < 0 or not raw.startswith(_MAGIC + b" "):
        raise SchemaError(f"{path}: not a grid file (missing 'GRID <w> <h>' header)")
    fields = raw[:newline].decode("ascii", errors="replace").split()
    if len(fields) != 3:
        raise SchemaError(f"{path}: malformed grid header {fields!r}")
    try:
        width, height = int(fields[1]), int(fields[2])
    except ValueError as exc:
        raise SchemaError(f"{path}: non-integer grid dimensions in header") from exc
    if width < 1 or height < 1:
        raise SchemaError(f"{path}: grid dimensions must be positive, got {width}x{height}")
    body = raw[newline + 1 :]
    expected = width * height * 4
    if len(body) != expected:
        raise SchemaError(f"{path}: expected {expected} payload bytes, found {len(body)}")
    values = np.frombuffer(body, dtype="<f4").astype(np.float64).reshape(height, width)
    return Grid(values)


def write_grid_csv(grid: Grid, path: str | Path) -> None:
    """Write one CSV text row per grid row, 9 significant digits per value."""
    np.savetxt(path, grid.values, fmt="%.9g", delimiter=",")


def read_grid_csv(path: str | Path) -> Grid:
    try:
        values = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise SchemaError(f"{path}: malformed grid CSV ({exc})") from exc
    return Grid(values)
