"""Piecewise-constant functions on uniform grids over centered boxes of R^n.

A grid covers the half-open box ``[-R, R)^n`` with ``m`` cells per unit length
(``m`` a power of two), so every unit cube ``Q_k = [k, k+1)^n`` is an exact
union of ``m^n`` cells.  Functions are stored as one value per cell and are
interpreted as constant on each cell.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

__all__ = [
    "DomainError",
    "GridSpec",
    "TailDescriptor",
    "SampledFunction",
    "zeros",
    "from_callable",
    "indicator",
    "cube_indicator",
    "integral",
    "norm1",
    "translate",
    "scale_values",
    "add",
    "restrict_to_cube",
    "cube_indices",
    "cube_slices",
    "cell_centers",
    "radial_distance",
    "to_csv",
    "from_csv",
    "to_binary",
    "from_binary",
]


class DomainError(ValueError):
    """Raised when an operation would move mass outside the grid box."""


@dataclass(frozen=True)
class GridSpec:
    dim: int
    box_radius: int
    cells_per_unit: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if int(self.box_radius) != self.box_radius or self.box_radius < 1:
            raise ValueError(f"box_radius must be a positive integer, got {self.box_radius}")
        m = self.cells_per_unit
        if int(m) != m or m < 1 or (m & (m - 1)) != 0:
            raise ValueError(f"cells_per_unit must be a power of two, got {m}")

    @property
    def h(self) -> float:
        return 1.0 / self.cells_per_unit

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def cells_per_axis(self) -> int:
        return 2 * self.box_radius * self.cells_per_unit

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.cells_per_axis,) * self.dim

    @property
    def n_cells(self) -> int:
        return self.cells_per_axis**self.dim

    def axis_centers(self) -> np.ndarray:
        return -self.box_radius + (np.arange(self.cells_per_axis) + 0.5) * self.h

    def axis_boundaries(self) -> np.ndarray:
        return -self.box_radius + np.arange(self.cells_per_axis + 1) * self.h

    def with_resolution(self, cells_per_unit: int) -> "GridSpec":
        return GridSpec(self.dim, self.box_radius, cells_per_unit)

    def with_radius(self, box_radius: int) -> "GridSpec":
        return GridSpec(self.dim, box_radius, self.cells_per_unit)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "box_radius": self.box_radius, "cells_per_unit": self.cells_per_unit}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        for key in ("dim", "box_radius", "cells_per_unit"):
            if key not in d:
                raise KeyError(f"grid.{key}")
        return cls(int(d["dim"]), int(d["box_radius"]), int(d["cells_per_unit"]))

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse the compact ``dim=1,R=64,m=64`` form used on the command line."""
        aliases = {"dim": "dim", "n": "dim", "R": "box_radius", "box_radius": "box_radius",
                   "m": "cells_per_unit", "cells_per_unit": "cells_per_unit"}
        d = {}
        for part in text.split(","):
            if not part.strip():
                continue
            key, _, val = part.partition("=")
            key = key.strip()
            if key not in aliases or not val:
                raise ValueError(f"bad grid field {part!r}")
            d[aliases[key]] = int(val)
        return cls.from_dict(d)

    def header(self) -> str:
        return (f"# hardylab-grid dim={self.dim} box_radius={self.box_radius} "
                f"cells_per_unit={self.cells_per_unit}")

    @classmethod
    def from_header(cls, line: str) -> "GridSpec":
        tokens = line.lstrip("#").split()
        if not tokens or tokens[0] != "hardylab-grid":
            raise ValueError("missing hardylab-grid header")
        d = dict(t.split("=", 1) for t in tokens[1:])
        return cls.from_dict(d)


@dataclass(frozen=True)
class TailDescriptor:
    """Radial power-log profile ``A (c+|x|)^-alpha ln(e+|x|)^-beta`` used beyond the box.

    Everything is expressed through ``v = ln(e+|x|)`` so that cutoffs far past
    floating-point range stay representable.
    """

    amplitude: float = 1.0
    alpha: float = 1.0
    beta: float = 0.0
    shift: float = 1.0

    def log_value_v(self, v):
        """``ln f`` at ``ln(e+|x|) = v``."""
        v = np.asarray(v, dtype=float)
        # ln(c + |x|) = v + log1p((c - e) e^-v)
        log_cx = v + np.log1p((self.shift - math.e) * np.exp(-v))
        return math.log(self.amplitude) - self.alpha * log_cx - self.beta * np.log(v)

    def log_scaled_v(self, v, k: int):
        """``ln f + k v`` with the ``k v`` term cancelled analytically."""
        v = np.asarray(v, dtype=float)
        corr = np.log1p((self.shift - math.e) * np.exp(-v))
        return math.log(self.amplitude) + (k - self.alpha) * v - self.alpha * corr - self.beta * np.log(v)

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return self.amplitude * (self.shift + r) ** (-self.alpha) * np.log(math.e + r) ** (-self.beta)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    spec: GridSpec
    values: np.ndarray
    tail: Optional[TailDescriptor] = field(default=None)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.shape != self.spec.shape:
            if vals.size == self.spec.n_cells:
                vals = vals.reshape(self.spec.shape)
            else:
                raise ValueError(f"values shape {vals.shape} does not match grid {self.spec.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.tail is not None:
            self._check_tail()

    def _check_tail(self):
        r = radial_distance(self.spec)
        edge = _edge_mask(self.spec)
        expected = self.tail.value(r[edge])
        got = self.values[edge]
        scale = np.maximum(np.abs(expected), 1e-300)
        if np.max(np.abs(got - expected) / scale) > 1e-6:
            raise ValueError("boundary cells disagree with the analytic tail")

    @property
    def dim(self) -> int:
        return self.spec.dim

    def abs(self) -> "SampledFunction":
        return SampledFunction(self.spec, np.abs(self.values))

    def with_values(self, values: np.ndarray) -> "SampledFunction":
        return SampledFunction(self.spec, values)

    def __neg__(self):
        return scale_values(self, -1.0)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale_values(other, -1.0))

    def __mul__(self, c):
        return scale_values(self, c)

    __rmul__ = __mul__


def _edge_mask(spec: GridSpec) -> np.ndarray:
    mask = np.zeros(spec.shape, dtype=bool)
    for ax in range(spec.dim):
        idx = [slice(None)] * spec.dim
        idx[ax] = 0
        mask[tuple(idx)] = True
        idx[ax] = -1
        mask[tuple(idx)] = True
    return mask


def cell_centers(spec: GridSpec) -> Tuple[np.ndarray, ...]:
    """Coordinate arrays of cell centers, one per axis, broadcast to the grid shape."""
    c = spec.axis_centers()
    if spec.dim == 1:
        return (c,)
    return tuple(np.meshgrid(c, c, indexing="ij"))


def radial_distance(spec: GridSpec) -> np.ndarray:
    coords = cell_centers(spec)
    return np.sqrt(sum(x * x for x in coords))


def zeros(spec: GridSpec) -> SampledFunction:
    return SampledFunction(spec, np.zeros(spec.shape))


def from_callable(spec: GridSpec, fn: Callable[..., np.ndarray],
                  tail: Optional[TailDescriptor] = None) -> SampledFunction:
    """Midpoint-sample ``fn`` (called with one coordinate array per axis)."""
    vals = np.broadcast_to(np.asarray(fn(*cell_centers(spec)), dtype=float), spec.shape)
    return SampledFunction(spec, vals, tail)


def indicator(spec: GridSpec, lo: Union[float, Sequence[float]],
              hi: Union[float, Sequence[float]]) -> SampledFunction:
    """Indicator of the box ``[lo, hi)`` (per axis); endpoints must sit on cell boundaries."""
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (spec.dim,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (spec.dim,))
    m = spec.cells_per_unit
    sl = []
    for a, b in zip(lo, hi):
        ia, ib = (a + spec.box_radius) * m, (b + spec.box_radius) * m
        if ia != round(ia) or ib != round(ib):
            raise ValueError("indicator endpoints must lie on cell boundaries")
        ia, ib = int(round(ia)), int(round(ib))
        if ia < 0 or ib > spec.cells_per_axis or ia > ib:
            raise DomainError(f"interval [{a}, {b}) does not fit in the box")
        sl.append(slice(ia, ib))
    vals = np.zeros(spec.shape)
    vals[tuple(sl)] = 1.0
    return SampledFunction(spec, vals)


def _as_index(spec: GridSpec, k) -> Tuple[int, ...]:
    k = tuple(int(v) for v in np.atleast_1d(k))
    if len(k) != spec.dim:
        raise ValueError(f"cube index {k} has wrong dimension for dim={spec.dim}")
    return k


def cube_slices(spec: GridSpec, k) -> Tuple[slice, ...]:
    k = _as_index(spec, k)
    m, R = spec.cells_per_unit, spec.box_radius
    out = []
    for ki in k:
        if not -R <= ki < R:
            raise DomainError(f"cube index {k} outside the box of radius {R}")
        out.append(slice((ki + R) * m, (ki + R + 1) * m))
    return tuple(out)


def cube_indicator(spec: GridSpec, k) -> SampledFunction:
    vals = np.zeros(spec.shape)
    vals[cube_slices(spec, k)] = 1.0
    return SampledFunction(spec, vals)


def cube_indices(spec: GridSpec) -> Iterator[Tuple[int, ...]]:
    R = spec.box_radius
    rng = range(-R, R)
    if spec.dim == 1:
        for k in rng:
            yield (k,)
    else:
        for k0 in rng:
            for k1 in rng:
                yield (k0, k1)


def restrict_to_cube(f: SampledFunction, k) -> SampledFunction:
    vals = np.zeros(f.spec.shape)
    sl = cube_slices(f.spec, k)
    vals[sl] = f.values[sl]
    return SampledFunction(f.spec, vals)


def integral(f: SampledFunction) -> float:
    # fsum is correctly rounded and order independent
    return math.fsum(f.values.ravel().tolist()) * f.spec.cell_volume


def norm1(f: SampledFunction) -> float:
    return math.fsum(np.abs(f.values).ravel().tolist()) * f.spec.cell_volume


def translate(f: SampledFunction, k) -> SampledFunction:
    """Return ``f(. - k)``; rejects shifts that push nonzero cells out of the box."""
    k = _as_index(f.spec, k)
    if f.tail is not None and any(k):
        raise DomainError("cannot translate a function carrying an analytic tail")
    m = f.spec.cells_per_unit
    vals = f.values
    out = np.zeros_like(vals)
    src, dst = [], []
    n = f.spec.cells_per_axis
    for ki in k:
        s = ki * m
        if abs(s) >= n:
            src.append(slice(0, 0))
            dst.append(slice(0, 0))
        elif s >= 0:
            src.append(slice(0, n - s))
            dst.append(slice(s, n))
        else:
            src.append(slice(-s, n))
            dst.append(slice(0, n + s))
    moved = vals[tuple(src)]
    if np.count_nonzero(moved) != np.count_nonzero(vals):
        raise DomainError(f"translation by {k} moves support outside the box")
    out[tuple(dst)] = moved
    return SampledFunction(f.spec, out)


def _check_same(f: SampledFunction, g: SampledFunction):
    if f.spec != g.spec:
        raise ValueError(f"grid mismatch: {f.spec} vs {g.spec}")


def scale_values(f: SampledFunction, c: float) -> SampledFunction:
    return SampledFunction(f.spec, f.values * float(c))


def add(f: SampledFunction, g: SampledFunction) -> SampledFunction:
    _check_same(f, g)
    return SampledFunction(f.spec, f.values + g.values)


# ---------------------------------------------------------------- raw I/O

def to_csv(f: SampledFunction, path: Union[str, Path, None] = None) -> str:
    buf = io.StringIO()
    buf.write(f.spec.header() + "\n")
    for v in f.values.ravel():
        buf.write(repr(float(v)) + "\n")
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def from_csv(source: Union[str, Path]) -> SampledFunction:
    p = Path(source)
    text = p.read_text() if p.exists() else str(source)
    lines = text.splitlines()
    spec = GridSpec.from_header(lines[0])
    vals = np.array([float(x) for x in lines[1:] if x.strip()])
    return SampledFunction(spec, vals.reshape(spec.shape))


def to_binary(f: SampledFunction, path: Union[str, Path]) -> None:
    with open(path, "wb") as fh:
        fh.write((f.spec.header() + "\n").encode())
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def from_binary(path: Union[str, Path]) -> SampledFunction:
    with open(path, "rb") as fh:
        spec = GridSpec.from_header(fh.readline().decode())
        vals = np.frombuffer(fh.read(), dtype="<f8")
    return SampledFunction(spec, vals.reshape(spec.shape))
