"""Dataset generation, stream shuffling, and CSV round-tripping.

Synthetic data are z-normalised random walks: each row is the running sum
of independent standard normal steps, then shifted and scaled to mean 0 and
population standard deviation 1.  Rows with zero deviation normalise to
all-zero rows.

``reshuffle`` permutes rows with a forward swap pass whose offsets come
from a single vectorised draw, so tests can reproduce the permutation
independently from the same generator:

    offsets = rng.integers(0, np.arange(n, 0, -1))   # offsets[i] in [0, n-i)
    for i in range(n): swap rows i and i + offsets[i]
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from streamdiv.seeding import generator

__all__ = [
    "Dataset",
    "z_normalize",
    "synthetic_walks",
    "synthetic_dataset",
    "file_dataset",
    "reshuffle",
    "load_csv",
    "save_csv",
]


@dataclass(frozen=True)
class Dataset:
    """A named instance matrix plus where it came from."""

    name: str
    points: np.ndarray
    provenance: str  # "synthetic" or "file"

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError(f"dataset must be a 2-d matrix, got shape {pts.shape}")
        if self.provenance not in ("synthetic", "file"):
            raise ValueError(f"unknown provenance: {self.provenance!r}")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def z_normalize(points: np.ndarray) -> np.ndarray:
    """Shift and scale each row to mean 0, population std 1 (zero rows stay zero)."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {points.shape}")
    mean = points.mean(axis=1, keepdims=True)
    std = points.std(axis=1, keepdims=True)  # population (ddof=0)
    centered = points - mean
    safe = np.where(std == 0.0, 1.0, std)
    out = centered / safe
    out[np.broadcast_to(std == 0.0, out.shape)] = 0.0
    return out


def synthetic_walks(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` z-normalised random walks of length ``d``."""
    if n < 1 or d < 2:
        raise ValueError(f"need n >= 1 and d >= 2, got n={n}, d={d}")
    steps = rng.standard_normal((n, d))
    return z_normalize(np.cumsum(steps, axis=1))


def synthetic_dataset(n: int, d: int, seed: int) -> Dataset:
    """Random-walk dataset, deterministic in ``seed``."""
    points = synthetic_walks(n, d, generator(seed, "data"))
    return Dataset(name=f"walks-n{n}-d{d}", points=points, provenance="synthetic")


def file_dataset(path: str | Path) -> Dataset:
    """Dataset loaded from a comma-separated file."""
    path = Path(path)
    return Dataset(name=path.stem, points=load_csv(path), provenance="file")


def reshuffle(points: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Return the rows of ``points`` in a fresh uniformly random order.

    Forward swap pass with all offsets drawn in one vectorised call; see the
    module docstring for the exact recipe.
    """
    points = np.asarray(points)
    if points.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {points.shape}")
    n = points.shape[0]
    out = points.copy()
    if n < 2:
        return out
    offsets = rng.integers(0, np.arange(n, 0, -1))
    for i in range(n):
        j = i + int(offsets[i])
        if j != i:
            out[[i, j]] = out[[j, i]]
    return out


def _is_numeric_row(fields: list[str]) -> bool:
    for field in fields:
        try:
            float(field)
        except ValueError:
            return False
    return True


def load_csv(path: str | Path) -> np.ndarray:
    """Load a numeric matrix from a comma-separated file.

    A non-numeric first row is treated as a header and skipped.  Malformed
    values and ragged rows raise with the offending row and column named.
    """
    path = Path(path)
    rows: list[list[float]] = []
    width: int | None = None
    with path.open("r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    data_lines = [(i + 1, line) for i, line in enumerate(lines) if line.strip()]
    if not data_lines:
        raise ValueError(f"{path}: no data rows")
    start = 0
    first_fields = [f.strip() for f in data_lines[0][1].split(",")]
    if not _is_numeric_row(first_fields):
        start = 1
        if len(data_lines) == 1:
            raise ValueError(f"{path}: header only, no data rows")
    for lineno, line in data_lines[start:]:
        fields = [f.strip() for f in line.split(",")]
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise ValueError(
                f"{path}: row {lineno} has {len(fields)} columns, expected {width}"
            )
        values = []
        for col, field in enumerate(fields, start=1):
            try:
                values.append(float(field))
            except ValueError:
                raise ValueError(
                    f"{path}: row {lineno}, column {col}: not a number: {field!r}"
                ) from None
        rows.append(values)
    return np.asarray(rows, dtype=float)


def save_csv(path: str | Path, points: np.ndarray) -> None:
    """Write a matrix as comma-separated text with full float precision."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {points.shape}")
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for row in points:
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write("\n")
