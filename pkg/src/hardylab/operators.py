"""Cancellation operator, near/far splitting and atoms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .decomp import split
from .grid import GridSpec, SampledFunction, cell_centers, cube_indicator, cube_slices, integral
from .maximal import BumpKernel, RadiusSet, smooth_max

__all__ = [
    "ThetaFunction",
    "make_theta",
    "t_theta",
    "h_g_split",
    "atom",
    "far_field_ratio",
]

# smooth theta values are integers over 2^QUANT_BITS, so every sum involving them is exact
QUANT_BITS = 20
THETA_LATTICE = 16


@dataclass(frozen=True, eq=False)
class ThetaFunction:
    """Bounded function supported in ``Q_0 = [0,1)^n`` with discrete integral exactly 1."""

    f: SampledFunction
    profile: str

    @property
    def spec(self) -> GridSpec:
        return self.f.spec

    @property
    def sup(self) -> float:
        return float(np.max(self.f.values))


def make_theta(spec: GridSpec, profile: str = "box") -> ThetaFunction:
    """Box ``chi_{Q_0}`` or a bump centered in ``Q_0``.

    The bump is piecewise constant on a lattice of at most ``THETA_LATTICE`` steps
    per unit, so its jump count does not grow with the grid resolution, and its
    values are dyadic with an exact unit integral.
    """
    if profile == "box":
        return ThetaFunction(cube_indicator(spec, (0,) * spec.dim), "box")
    if profile != "smooth":
        raise ValueError(f"unknown theta profile {profile!r}")
    m = spec.cells_per_unit
    s = min(m, THETA_LATTICE)
    c = (np.arange(s) + 0.5) / s - 0.5
    grids = np.meshgrid(*([c] * spec.dim), indexing="ij")
    rho2 = sum(g * g for g in grids) / 0.25
    raw = np.zeros_like(rho2)
    inside = rho2 < 1
    raw[inside] = np.exp(-1.0 / (1.0 - rho2[inside]))
    # integer weights summing to s^n 2^Q, largest remainders rounded up
    target = s**spec.dim * 2**QUANT_BITS
    scaled = raw / raw.sum() * target
    counts = np.floor(scaled).astype(np.int64)
    short = int(target - counts.sum())
    if short:
        order = np.argsort(-(scaled - counts), axis=None, kind="stable")[:short]
        counts.flat[order] += 1
    block = counts.astype(float) / 2**QUANT_BITS
    for ax in range(spec.dim):
        block = np.repeat(block, m // s, axis=ax)
    vals = np.zeros(spec.shape)
    vals[cube_slices(spec, (0,) * spec.dim)] = block
    return ThetaFunction(SampledFunction(spec, vals), "smooth")


def t_theta(f: SampledFunction, theta: Optional[ThetaFunction] = None) -> SampledFunction:
    """``f - (int f) theta``."""
    theta = theta or make_theta(f.spec)
    if theta.spec != f.spec:
        raise ValueError("theta lives on a different grid")
    c = integral(f)
    return f.with_values(f.values - c * theta.f.values)


def h_g_split(f: SampledFunction, theta: Optional[ThetaFunction] = None
              ) -> Tuple[SampledFunction, SampledFunction]:
    """``h = sum_k (f_k - (int f_k) chi_{Q_k})`` and ``g = sum_k (int f_k)(chi_{Q_k} - theta)``."""
    spec = f.spec
    theta = theta or make_theta(spec)
    d = split(f)
    means = np.zeros(spec.shape)
    vol = spec.cell_volume
    for k, b in zip(d.keys, d.blocks):
        sl = cube_slices(spec, k)
        # cube volume is 1, so the cube integral is also the mean value
        means[sl] = math.fsum(b.tolist()) * vol
    h = f.values - means
    g = means - integral(f) * theta.f.values
    return SampledFunction(spec, h), SampledFunction(spec, g)


def atom(j, theta: Optional[ThetaFunction] = None, spec: Optional[GridSpec] = None) -> SampledFunction:
    """``chi_{Q_j} - theta`` for a cube at distance ``|j| > 2`` from the origin."""
    if theta is None:
        if spec is None:
            raise ValueError("atom needs a theta or a grid")
        theta = make_theta(spec)
    spec = theta.spec
    jj = np.atleast_1d(np.asarray(j))
    if float(np.linalg.norm(jj)) <= 2:
        raise ValueError(f"atom index {tuple(jj.tolist())} must satisfy |j| > 2")
    a = cube_indicator(spec, j).values - theta.f.values
    if np.max(np.abs(a)) > max(1.0, theta.sup):
        raise ValueError("atom exceeds its sup-norm bound")
    return SampledFunction(spec, a)


def far_field_ratio(hk: SampledFunction, k, kernel: Optional[BumpKernel] = None,
                    scales: Optional[RadiusSet] = None) -> float:
    """``max M_phi h_k(x) |x - c_k|^{n+1} / |h_k|_1`` over ``x`` outside ``k + 2Q``.

    ``c_k`` is the center of ``Q_k``; a finite value is the constant of the
    ``|x-k|^{-n-1}`` decay of a zero-mean piece.
    """
    spec = hk.spec
    kernel = kernel or BumpKernel("bump", spec.dim)
    M = smooth_max(hk, kernel, scales)
    center = np.asarray(k, dtype=float).reshape(-1) + 0.5
    cc = cell_centers(spec)
    dist_inf = np.max(np.stack([np.abs(c - center[i]) for i, c in enumerate(cc)]), axis=0)
    dist = np.sqrt(sum((c - center[i]) ** 2 for i, c in enumerate(cc)))
    outside = dist_inf >= 1.0
    mass = float(np.sum(np.abs(hk.values))) * spec.cell_volume
    if mass == 0:
        return 0.0
    return float(np.max(M.values[outside] * dist[outside] ** (spec.dim + 1))) / mass
