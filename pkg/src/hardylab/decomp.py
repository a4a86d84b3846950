"""Unit-cube decompositions and the discrete sums built on them."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Dict, Iterator, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .functionals import WeightDescriptor, omega_capital
from .grid import GridSpec, SampledFunction, cube_indices, cube_slices

__all__ = [
    "CubeDecomposition",
    "split",
    "local_llogl_sum",
    "amalgam_entropy_sum",
    "log_moment_sum",
    "LogWeight",
    "OmegaWeight",
    "far_weighted_sum",
    "min_term_sum",
    "AmalgamSplit",
    "amalgam_split",
    "piece_table",
]


def _lnp(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.maximum(np.log(x), 0.0)


@dataclass(frozen=True, eq=False)
class CubeDecomposition:
    """Pieces ``f_k = f chi_{Q_k}`` stored as per-cube blocks.

    ``blocks[i]`` holds the cell values of the piece on cube ``keys[i]``;
    ``mu[i]`` is its L1 norm.
    """

    spec: GridSpec
    keys: Tuple[Tuple[int, ...], ...]
    blocks: np.ndarray
    mu: np.ndarray

    def __len__(self) -> int:
        return len(self.keys)

    @property
    def key_norms(self) -> np.ndarray:
        return np.linalg.norm(np.asarray(self.keys, dtype=float).reshape(len(self.keys), -1), axis=1)

    def piece(self, k) -> SampledFunction:
        k = tuple(int(i) for i in np.atleast_1d(k))
        i = self.keys.index(k)
        out = np.zeros(self.spec.shape)
        out[cube_slices(self.spec, k)] = self.blocks[i].reshape((self.spec.cells_per_unit,) * self.spec.dim)
        return SampledFunction(self.spec, out)

    @property
    def pieces(self) -> Iterator[Tuple[Tuple[int, ...], SampledFunction, float]]:
        for k, mu in zip(self.keys, self.mu):
            yield k, self.piece(k), float(mu)

    def reconstruct(self) -> SampledFunction:
        out = np.zeros(self.spec.shape)
        m = self.spec.cells_per_unit
        for k, b in zip(self.keys, self.blocks):
            out[cube_slices(self.spec, k)] = b.reshape((m,) * self.spec.dim)
        return SampledFunction(self.spec, out)

    def total_mass(self) -> float:
        return math.fsum(self.mu.tolist())


def split(f: SampledFunction) -> CubeDecomposition:
    spec = f.spec
    keys = tuple(cube_indices(spec))
    blocks = np.stack([f.values[cube_slices(spec, k)].ravel() for k in keys])
    vol = spec.cell_volume
    mu = np.array([math.fsum(np.abs(b).tolist()) * vol for b in blocks])
    return CubeDecomposition(spec, keys, blocks, mu)


def _per_piece(d: CubeDecomposition, cell_terms: np.ndarray) -> np.ndarray:
    vol = d.spec.cell_volume
    return np.array([math.fsum(row.tolist()) * vol for row in cell_terms])


def _ratio(d: CubeDecomposition) -> np.ndarray:
    a = np.abs(d.blocks)
    mu = d.mu[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(mu > 0, a / np.where(mu > 0, mu, 1.0), 0.0)


def local_llogl_terms(d: CubeDecomposition) -> np.ndarray:
    a = np.abs(d.blocks)
    return _per_piece(d, a * (1.0 + _lnp(_ratio(d))))


def local_llogl_sum(d: CubeDecomposition) -> float:
    """``sum_k int |f_k| (1 + ln_+(|f_k| / mu_k))``."""
    return math.fsum(local_llogl_terms(d).tolist())


def amalgam_terms(d: CubeDecomposition) -> np.ndarray:
    mu = d.mu
    # -ln(mu) rather than ln(1/mu): 1/mu overflows for subnormal masses
    safe = np.where(mu > 0, mu, 1.0)
    return np.where(mu > 0, mu * np.maximum(-np.log(safe), 0.0), 0.0)


def amalgam_entropy_sum(d: CubeDecomposition) -> float:
    """``sum_k mu_k ln_+(1/mu_k)``."""
    return math.fsum(amalgam_terms(d).tolist())


def log_moment_terms(d: CubeDecomposition) -> np.ndarray:
    return d.mu * (1.0 + _lnp(d.key_norms))


def log_moment_sum(d: CubeDecomposition) -> float:
    """``sum_k mu_k (1 + ln_+|k|)``."""
    return math.fsum(log_moment_terms(d).tolist())


def min_term_terms(d: CubeDecomposition) -> np.ndarray:
    # |k| = 0 would zero the term; max(|k|, 1) keeps the cube at the origin in play
    kn = np.maximum(d.key_norms, 1.0)[:, None]
    a = np.abs(d.blocks)
    mu = d.mu[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(mu > 0, np.minimum(a, kn) / np.where(mu > 0, mu, 1.0), 0.0)
    cell = a * _lnp(ratio) / np.log(math.e + kn)
    return _per_piece(d, cell)


def min_term_sum(d: CubeDecomposition) -> float:
    """``sum_k int |f_k| ln_+(min(|f_k|, |k|) / mu_k) / ln(e+|k|)``."""
    return math.fsum(min_term_terms(d).tolist())


@dataclass(frozen=True)
class LogWeight:
    """``1 + ln_+ |j|``."""

    def __call__(self, r: float) -> float:
        return 1.0 + (math.log(r) if r > 1 else 0.0)


@dataclass(frozen=True)
class OmegaWeight:
    """``Omega(max(|j|, 1))`` for a radial weight."""

    weight: WeightDescriptor = WeightDescriptor("one")
    dim: int = 1

    def __call__(self, r: float) -> float:
        return omega_capital(max(r, 1.0), self.weight, self.dim)


def far_weighted_sum(lam: Mapping, weight: Union[LogWeight, OmegaWeight, None] = None) -> float:
    """``sum_j |lam_j| W(|j|)`` for coefficients keyed by cube index."""
    weight = weight or LogWeight()
    terms = []
    for j, c in lam.items():
        r = float(np.linalg.norm(np.atleast_1d(np.asarray(j, dtype=float))))
        if c != 0:
            terms.append(abs(c) * weight(r))
    return math.fsum(terms)


@dataclass(frozen=True)
class AmalgamSplit:
    """The amalgam sum over ``k != 0`` split at ``mu_k = |k|^{-(n+1)}`` with both bounds."""

    heavy: float
    heavy_bound: float
    light: float
    light_bound: float

    @property
    def holds(self) -> bool:
        return self.heavy <= self.heavy_bound and self.light <= self.light_bound


def amalgam_split(d: CubeDecomposition) -> AmalgamSplit:
    """Heavy cubes are controlled by the log moment, light cubes by a fixed series.

    On light cubes ``mu ln_+(1/mu) <= max_{x <= |k|^{-(n+1)}} x ln_+(1/x)``, which is
    ``(n+1)|k|^{-(n+1)} ln|k|`` once ``|k|^{-(n+1)} <= 1/e`` and ``1/e`` before.
    """
    n = d.spec.dim
    kn = d.key_norms
    off = kn > 0
    thr = np.where(off, kn, 1.0) ** (-(n + 1))
    terms = amalgam_terms(d)
    heavy_mask = off & (d.mu > thr)
    light_mask = off & ~heavy_mask
    heavy = math.fsum(terms[heavy_mask].tolist())
    light = math.fsum(terms[light_mask].tolist())
    heavy_bound = (n + 1) * log_moment_sum(d)
    cap = np.minimum(thr[off], 1.0 / math.e)
    light_bound = math.fsum((cap * np.log(1.0 / cap)).tolist())
    return AmalgamSplit(heavy, heavy_bound, light, light_bound)


def piece_table(d: CubeDecomposition) -> str:
    """CSV of per-cube masses and sum terms."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "mu", "local_llogl", "amalgam", "log_moment", "min_term"])
    cols = (local_llogl_terms(d), amalgam_terms(d), log_moment_terms(d), min_term_terms(d))
    for i, k in enumerate(d.keys):
        w.writerow([" ".join(str(c) for c in k), repr(float(d.mu[i]))] + [repr(float(c[i])) for c in cols])
    return buf.getvalue()
