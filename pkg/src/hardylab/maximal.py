"""Maximal operators on sampled functions.

All ball averages and kernel convolutions are evaluated against the
piecewise-constant representative, so in one dimension they are exact up to
floating-point rounding.  In two dimensions cell/ball overlaps are counted on
a 4x4 subcell lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import signal
from scipy.interpolate import CubicHermiteSpline

from .functionals import WeightDescriptor
from .grid import GridSpec, SampledFunction, integral, norm1, radial_distance

__all__ = [
    "RadiusSet",
    "BumpKernel",
    "dyadic_constant",
    "unit_ball_volume",
    "hl_max",
    "local_max",
    "dyadic_max",
    "support_cube",
    "smooth_max",
    "smooth_local_max",
    "atom_weighted_norm",
]

SUBCELLS = 4


def unit_ball_volume(dim: int) -> float:
    return 2.0 if dim == 1 else math.pi


def dyadic_constant(dim: int) -> float:
    """``n^{-n/2} |B(0,1)|^{-1}``, the constant comparing M^loc with dyadic averages."""
    return dim ** (-dim / 2.0) / unit_ball_volume(dim)


@dataclass(frozen=True)
class RadiusSet:
    radii: Tuple[float, ...]
    include_single_cell: bool = True
    local_only: bool = False

    def __post_init__(self):
        r = tuple(float(x) for x in self.radii)
        object.__setattr__(self, "radii", r)
        if not r:
            raise ValueError("radius set is empty")
        if any(x <= 0 for x in r):
            raise ValueError("radii must be positive")
        if any(b <= a for a, b in zip(r, r[1:])):
            raise ValueError("radii must be strictly increasing")
        if self.local_only and r[-1] >= 1.0:
            raise ValueError("local radius sets must stay below 1")

    @classmethod
    def quarter_octave(cls, spec: GridSpec, local: bool = False, r_max: Optional[float] = None,
                       include_single_cell: bool = True) -> "RadiusSet":
        """Geometric ladder ``2^{j/4} h`` up to the box diameter (or just below 1 if local).

        Local ladders also carry the largest half-cell radius ``1 - h/2`` so that
        the sup over ``r < 1`` sees balls of almost unit radius.
        """
        h = spec.h
        cap = 2 * spec.box_radius * math.sqrt(spec.dim) if r_max is None else r_max
        radii = []
        j = 0
        while True:
            r = 2.0 ** (j / 4.0) * h
            if r > cap or (local and r >= 1.0):
                break
            radii.append(r)
            j += 1
        if local and 1.0 - h / 2 > radii[-1]:
            radii.append(1.0 - h / 2)
        return cls(tuple(radii), include_single_cell, local)

    @classmethod
    def dense(cls, spec: GridSpec, local: bool = False, r_max: Optional[float] = None,
              include_single_cell: bool = True) -> "RadiusSet":
        """Every breakpoint radius ``(j + 1/2) h`` (1D) or every ``j h / 2`` (2D).

        In 1D the ball average of a piecewise-constant function is monotone between
        consecutive breakpoints, so this set realizes the exact sup over ``r <= r_max``.
        """
        h = spec.h
        cap = 2 * spec.box_radius * math.sqrt(spec.dim) if r_max is None else r_max
        if local:
            cap = min(cap, 1.0 - 1e-12)
        if spec.dim == 1:
            n = int(math.floor(cap / h - 0.5)) + 1
            radii = (np.arange(n) + 0.5) * h
        else:
            n = int(math.floor(2 * cap / h))
            radii = np.arange(1, n + 1) * h / 2
        return cls(tuple(radii[radii <= cap]), include_single_cell, local)

    @classmethod
    def named(cls, name: str, spec: GridSpec, local: bool = False, **kw) -> "RadiusSet":
        if name == "quarter-octave":
            return cls.quarter_octave(spec, local=local, **kw)
        if name == "dense":
            return cls.dense(spec, local=local, **kw)
        raise ValueError(f"unknown radius set {name!r}")


# ---------------------------------------------------------------- ball averages

def _shifted(F: np.ndarray, offset: float, n_out: int) -> np.ndarray:
    """Evaluate the piecewise-linear extension of ``F`` at ``c + offset`` for c = 0..n_out-1.

    ``F`` is clamped to 0 on the left and ``F[-1]`` on the right (zero extension of f).
    """
    N = len(F) - 1
    offset = min(max(offset, -(N + 2.0)), N + 2.0)
    i = math.floor(offset)
    frac = offset - i
    pad = N + 4
    Fp = np.concatenate([np.zeros(pad), F, np.full(pad, F[-1])])
    base = pad + i
    lo = Fp[base: base + n_out]
    if frac == 0.0:
        return lo
    hi = Fp[base + 1: base + 1 + n_out]
    return lo + frac * (hi - lo)


def _ball_integrals_1d(absvals: np.ndarray, h: float, r: float) -> np.ndarray:
    N = len(absvals)
    F = np.concatenate([[0.0], np.cumsum(absvals) * h])
    s = 0.5 + r / h
    return _shifted(F, s, N) - _shifted(F, 0.5 - r / h, N)


@lru_cache(maxsize=512)
def _ball_kernel_2d(r_over_h: float) -> np.ndarray:
    """Subcell-counted fraction of each cell inside a ball centered at a cell center."""
    L = int(math.ceil(r_over_h + 0.5))
    sub = (np.arange(SUBCELLS) + 0.5) / SUBCELLS - 0.5
    off = np.arange(-L, L + 1)
    # positions of all subcell centers per offset, shape (2L+1, S)
    pos = off[:, None] + sub[None, :]
    d2 = pos[:, None, :, None] ** 2 + pos[None, :, None, :] ** 2
    inside = (d2 <= r_over_h**2).sum(axis=(2, 3))
    return inside / float(SUBCELLS**2)


def _correlate_runs(A: np.ndarray, K: np.ndarray) -> np.ndarray:
    """Correlation of ``A`` with ``K``, summing each constant row run via prefix sums."""
    Nx, Ny = A.shape
    L = K.shape[0] // 2
    Ap = np.pad(A, L)
    C = np.concatenate([np.zeros((Ap.shape[0], 1)), np.cumsum(Ap, axis=1)], axis=1)
    out = np.zeros((Nx, Ny))
    for di in range(-L, L + 1):
        row = K[di + L]
        if not row.any():
            continue
        rows = C[di + L: di + L + Nx]
        cuts = np.concatenate([[0], np.nonzero(np.diff(row))[0] + 1, [len(row)]])
        for s, e in zip(cuts[:-1], cuts[1:]):
            c = row[s]
            if c != 0.0:
                # columns s..e-1 of the kernel, i.e. offsets s-L..e-1-L
                out += c * (rows[:, e: e + Ny] - rows[:, s: s + Ny])
    return out


def _ball_averages_2d(absvals: np.ndarray, r_over_h: float) -> np.ndarray:
    """Ball averages divided by the subcell-counted ball measure, so constants average to themselves."""
    K = _ball_kernel_2d(round(r_over_h, 12))
    return _correlate_runs(absvals, K) / K.sum()


def hl_max(f: SampledFunction, radii: RadiusSet) -> SampledFunction:
    """Centered Hardy-Littlewood maximal function over the radii of ``radii``.

    Balls are clipped to the box and averages divide by the full ball measure
    (zero extension of ``f``); in 2D that measure is the subcell count of the ball.
    """
    if not radii.radii:
        raise ValueError("empty radius set")
    spec = f.spec
    a = np.abs(f.values)
    best = a.copy() if radii.include_single_cell else np.zeros_like(a)
    for r in radii.radii:
        if spec.dim == 1:
            avg = _ball_integrals_1d(a, spec.h, r) / (2.0 * r)
        else:
            avg = _ball_averages_2d(a, r / spec.h)
        np.maximum(best, avg, out=best)
    return SampledFunction(spec, best)


def local_max(f: SampledFunction, radii: Optional[RadiusSet] = None) -> SampledFunction:
    if radii is None:
        radii = RadiusSet.quarter_octave(f.spec, local=True)
    if not radii.local_only:
        raise ValueError("local_max needs a local radius set")
    return hl_max(f, radii)


# ---------------------------------------------------------------- dyadic

def support_cube(v: SampledFunction) -> Optional[Tuple[int, ...]]:
    """Index of the unit cube holding the support of ``v`` (None if v == 0)."""
    spec = v.spec
    nz = np.argwhere(v.values != 0)
    if nz.size == 0:
        return None
    m, R = spec.cells_per_unit, spec.box_radius
    lo = nz.min(axis=0) // m
    hi = nz.max(axis=0) // m
    if np.any(lo != hi):
        raise ValueError("support spans more than one unit cube")
    return tuple(int(i) - R for i in lo)


def dyadic_max(v: SampledFunction, max_side: float = 1.0) -> SampledFunction:
    """Dyadic maximal function on the unit cube containing the support of ``v``.

    Block sums are accumulated bottom-up by pairwise addition, one level at a
    time; ``max_side`` limits the side length of the dyadic cubes considered.
    """
    spec = v.spec
    k = support_cube(v)
    out = np.zeros(spec.shape)
    if k is None:
        return SampledFunction(spec, out)
    from .grid import cube_slices

    sl = cube_slices(spec, k)
    block = np.abs(v.values[sl])
    m = spec.cells_per_unit
    levels = int(round(math.log2(m)))
    best = block.copy()
    sums = block
    for p in range(1, levels + 1):
        side = 2**p / m
        if spec.dim == 1:
            sums = sums[0::2] + sums[1::2]
        else:
            sums = (sums[0::2, 0::2] + sums[1::2, 0::2]) + (sums[0::2, 1::2] + sums[1::2, 1::2])
        if side > max_side:
            break
        avg = sums / float(2 ** (p * spec.dim))
        up = avg
        for ax in range(spec.dim):
            up = np.repeat(up, 2**p, axis=ax)
        np.maximum(best, up, out=best)
    out[sl] = best
    return SampledFunction(spec, out)


# ---------------------------------------------------------------- smooth kernels

def _bump(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


@lru_cache(maxsize=None)
def _bump_table_1d():
    nodes, weights = np.polynomial.legendre.leggauss(20)
    u = np.linspace(-1.0, 1.0, 4097)
    a, b = u[:-1], u[1:]
    mid, half = (a + b) / 2, (b - a) / 2
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    pieces = (_bump(pts) * weights[None, :]).sum(axis=1) * half
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    Z = cum[-1]
    return CubicHermiteSpline(u, cum / Z, _bump(u) / Z), Z


@lru_cache(maxsize=None)
def _bump_norm_2d():
    from scipy.integrate import quad

    val, _ = quad(lambda r: 2 * math.pi * r * math.exp(-1.0 / (1.0 - r * r)), 0.0, 1.0,
                  epsabs=0, epsrel=1e-13, limit=200)
    return val


@dataclass(frozen=True)
class BumpKernel:
    """Radial kernel supported in the unit ball with integral 1."""

    profile: str = "bump"
    dim: int = 1

    def __post_init__(self):
        if self.profile not in ("box", "tent", "bump"):
            raise ValueError(f"unknown kernel profile {self.profile!r}")
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")

    @property
    def normalization(self) -> float:
        if self.profile == "box":
            return 1.0 / unit_ball_volume(self.dim)
        if self.profile == "tent":
            return 1.0 if self.dim == 1 else 3.0 / math.pi
        return 1.0 / (_bump_table_1d()[1] if self.dim == 1 else _bump_norm_2d())

    def density(self, r):
        """Kernel value at distance ``r`` from the origin."""
        r = np.abs(np.asarray(r, dtype=float))
        if self.profile == "box":
            base = (r < 1).astype(float)
        elif self.profile == "tent":
            base = np.clip(1.0 - r, 0.0, None)
        else:
            base = _bump(r)
        return base * self.normalization

    @property
    def max_value(self) -> float:
        return float(self.density(0.0))

    @property
    def lipschitz(self) -> float:
        if self.profile == "box":
            return math.inf
        if self.profile == "tent":
            return self.normalization
        r = np.linspace(0, 1, 200001)
        return float(np.max(np.abs(np.diff(self.density(r))) / np.diff(r)))

    def antiderivative(self, u):
        """``int_{-inf}^u phi`` for the 1D kernel."""
        u = np.clip(np.asarray(u, dtype=float), -1.0, 1.0)
        if self.profile == "box":
            return (u + 1.0) / 2.0
        if self.profile == "tent":
            return np.where(u < 0, 0.5 * (1 + u) ** 2, 1.0 - 0.5 * (1 - u) ** 2)
        spline, _ = _bump_table_1d()
        return spline(u)

    def weights(self, h: float, t: float) -> np.ndarray:
        """Exact cell integrals of ``phi_t`` over cells offset from the evaluation cell."""
        if t < h:
            raise ValueError(f"scale {t} is below the grid step {h}")
        J = int(math.ceil(t / h + 0.5))
        if self.dim == 1:
            j = np.arange(-J, J + 1)
            return self.antiderivative((j + 0.5) * h / t) - self.antiderivative((j - 0.5) * h / t)
        return self._weights_2d(h, t, J)

    def _weights_2d(self, h, t, J):
        if self.profile == "box":
            K = _ball_kernel_2d(round(t / h, 12))
            return K / K.sum()
        nodes, w = np.polynomial.legendre.leggauss(6)
        off = np.arange(-J, J + 1)
        pos = (off[:, None] + nodes[None, :] / 2) * h / t  # (2J+1, G)
        d = np.sqrt(pos[:, None, :, None] ** 2 + pos[None, :, None, :] ** 2)
        vals = self.density(d) * w[None, None, :, None] * w[None, None, None, :] / 4
        K = vals.sum(axis=(2, 3)) * (h / t) ** 2
        total = K.sum()
        return K / total if total > 0 else K

    def samples(self, spec: GridSpec) -> SampledFunction:
        return SampledFunction(spec, self.density(radial_distance(spec)))


def _convolve_1d(values: np.ndarray, kernel: BumpKernel, h: float, t: float) -> np.ndarray:
    """``phi_t * f`` at cell centers, exact for the piecewise-constant ``f``.

    Either a direct convolution with exact cell weights, or a sum over the jumps
    of ``f`` of the kernel antiderivative; each jump only reaches ``J`` cells on
    either side, beyond which its contribution is the full jump.
    """
    N = len(values)
    J = int(math.ceil(t / h + 0.5))
    jumps = np.diff(np.concatenate([[0.0], values, [0.0]]))
    nzq = np.nonzero(jumps)[0]
    cost_factor = 12 if kernel.profile == "bump" else 3
    width = min(N, 2 * J)
    if nzq.size * width * cost_factor < N * (2 * J + 1):
        out = np.zeros(N)
        # cells at least J to the right of a jump see all of it: that sum is f(c - J)
        if J < N:
            out[J:] = values[: N - J]
        for q in nzq:
            lo, hi = max(0, q - J), min(N, q + J)
            if lo >= hi:
                continue
            c = np.arange(lo, hi)
            out[lo:hi] += jumps[q] * kernel.antiderivative((c - q + 0.5) * h / t)
        return out
    w = kernel.weights(h, t)
    full = np.convolve(values, w, mode="full")
    return full[J: J + N]


def smooth_max(f: SampledFunction, kernel: Optional[BumpKernel] = None,
               scales: Optional[RadiusSet] = None) -> SampledFunction:
    """``sup_t |phi_t * f|`` over the scales of ``scales``."""
    spec = f.spec
    if kernel is None:
        kernel = BumpKernel("bump", spec.dim)
    if kernel.dim != spec.dim:
        raise ValueError("kernel dimension does not match the grid")
    if scales is None:
        scales = RadiusSet.quarter_octave(spec, include_single_cell=False)
    if not scales.radii:
        raise ValueError("empty scale set")
    if scales.radii[0] < spec.h:
        raise ValueError(f"scale {scales.radii[0]} is below the grid step {spec.h}")
    best = np.zeros(spec.shape)
    if not np.any(f.values):
        return SampledFunction(spec, best)
    for t in scales.radii:
        if spec.dim == 1:
            conv = _convolve_1d(f.values, kernel, spec.h, t)
        else:
            conv = signal.convolve2d(f.values, kernel.weights(spec.h, t), mode="same")
        np.maximum(best, np.abs(conv), out=best)
    return SampledFunction(spec, best)


def smooth_local_max(f: SampledFunction, kernel: Optional[BumpKernel] = None,
                     scales: Optional[RadiusSet] = None) -> SampledFunction:
    if scales is None:
        scales = RadiusSet.quarter_octave(f.spec, local=True, include_single_cell=False)
    if not scales.local_only:
        raise ValueError("smooth_local_max needs a local scale set")
    return smooth_max(f, kernel, scales)


def atom_weighted_norm(a: SampledFunction, weight: Optional[WeightDescriptor] = None,
                       R_max: Optional[float] = None, kernel: Optional[BumpKernel] = None,
                       scales: Optional[RadiusSet] = None) -> Tuple[float, float]:
    """Truncated ``int_{|x|<R_max} M_phi a . w`` and an analytic bound on the rest.

    For zero-mean ``a`` supported in ``B(0, rho)`` and ``|x| >= 2 rho``,
    ``M_phi a(x) <= Lip(phi) 2^{n+1} rho |a|_1 / |x|^{n+1}``; the bound integrates
    that envelope against the weight beyond ``R_max``.
    """
    spec = a.spec
    weight = weight or WeightDescriptor("one")
    total = norm1(a)
    if abs(integral(a)) > 1e-12 * max(total, 1e-300):
        raise ValueError("atom must have zero integral")
    r = radial_distance(spec)
    if R_max is None:
        R_max = float(spec.box_radius)
    if R_max > spec.box_radius:
        raise ValueError("R_max exceeds the box radius")
    if kernel is None:
        kernel = BumpKernel("bump", spec.dim)
    Ma = smooth_max(a, kernel, scales)
    inside = r < R_max
    truncated = math.fsum((Ma.values * weight(r))[inside].ravel().tolist()) * spec.cell_volume
    nz = np.argwhere(a.values != 0)
    if nz.size == 0:
        return truncated, 0.0
    # support radius measured to the far edge of the outermost cell
    rho = float(np.max(r[tuple(nz.T)])) + spec.h * math.sqrt(spec.dim)
    if R_max < 2 * rho:
        return truncated, math.inf
    envelope = kernel.lipschitz * 2 ** (spec.dim + 1) * rho * total
    tail = envelope * weight.tail_moment(R_max, spec.dim, spec.dim + 1)
    return truncated, tail
