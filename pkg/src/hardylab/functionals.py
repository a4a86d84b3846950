"""Integral conditions and Musielak-Orlicz functionals.

Every functional is ``int Phi(x, |f(x)|) dx`` with ``Phi(x, t) = t * G(x, t)``.
The factor ``G`` is written in terms of ``ln t``, ``ln |x|`` and ``ln(e+|x|)`` so
that the same code serves grid cells and analytic tails at radii far beyond
floating-point range.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .grid import GridSpec, SampledFunction, TailDescriptor, cell_centers, norm1, radial_distance

__all__ = [
    "KINDS",
    "WeightDescriptor",
    "MusielakSpec",
    "integrand_factor",
    "integrand",
    "eval_functional",
    "radial_tail_integral",
    "luxemburg_quasinorm",
    "psi_pointwise",
    "psi_original",
    "psi_derivative",
    "psi_derivative_bounds_check",
    "psi_tail_integral",
    "omega_capital",
    "sphere_measure",
]

E = math.e

# CLI identifier -> descriptive name
KINDS = {
    "l1": "L1",
    "llogl": "LlogL",
    "stein": "SteinGlobal",
    "psilog": "PsiLog",
    "loglog": "LogLogGlobal",
    "eqloglog": "EqLogLog",
    "wl1": "WeightedL1",
    "psilux": "PsiLogLuxemburg",
}
_BY_NAME = {v: k for k, v in KINDS.items()}


def sphere_measure(dim: int) -> float:
    return 2.0 if dim == 1 else 2.0 * math.pi


@dataclass(frozen=True)
class WeightDescriptor:
    """Radial nonincreasing weight: ``one``, ``invlog`` (1/ln(e+|x|)) or ``power`` ((1+|x|)^-sigma)."""

    kind: str = "one"
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("one", "invlog", "power"):
            raise ValueError(f"unknown weight {self.kind!r}")
        if self.kind == "power" and self.sigma < 0:
            raise ValueError("power weights need sigma >= 0 to be nonincreasing")

    def __call__(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        if self.kind == "one":
            return np.ones_like(r)
        if self.kind == "invlog":
            return 1.0 / np.log(E + r)
        return (1.0 + r) ** (-self.sigma)

    def from_log(self, log_ex):
        """Weight as a function of ``ln(e+|x|)``."""
        log_ex = np.asarray(log_ex, dtype=float)
        if self.kind == "one":
            return np.ones_like(log_ex)
        if self.kind == "invlog":
            return 1.0 / log_ex
        # 1 + r = e^v - (e - 1)
        return np.exp(-self.sigma * (log_ex + np.log1p(-(E - 1) * np.exp(-log_ex))))

    def tail_moment(self, R: float, dim: int, power: float) -> float:
        """``int_{|x|>R} w(x) |x|^{-power} dx``."""
        s = sphere_measure(dim)
        if power <= dim:
            return math.inf
        val, _ = integrate.quad(lambda r: float(self(r)) * r ** (dim - 1 - power), R, math.inf,
                                epsabs=0, epsrel=1e-10, limit=200)
        return s * val

    def integrability(self, dim: int) -> float:
        """``int w(x) / (1+|x|)^{n+1} dx``; finite for every admissible weight."""
        s = sphere_measure(dim)
        val, _ = integrate.quad(lambda r: float(self(r)) * r ** (dim - 1) / (1 + r) ** (dim + 1),
                                0, math.inf, limit=200)
        return s * val


@dataclass(frozen=True)
class MusielakSpec:
    kind: str
    weight: Optional[WeightDescriptor] = None

    def __post_init__(self):
        kind = _BY_NAME.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValueError(f"unknown functional {self.kind!r}")
        object.__setattr__(self, "kind", kind)

    @property
    def effective_weight(self) -> WeightDescriptor:
        return self.weight or WeightDescriptor("invlog")


def _ln_e_plus(t, log_t=None):
    """``ln(e + t)`` without overflow for huge t."""
    t = np.asarray(t, dtype=float)
    if log_t is None:
        return 1.0 + np.log1p(t / E)
    return np.logaddexp(1.0, log_t)


def integrand_factor(kind: str, t, log_t, log_x, log_ex, weight: Optional[WeightDescriptor] = None):
    """``G`` with ``Phi(x, t) = t G``; ``log_t`` may be ``-inf`` where ``t == 0``."""
    kind = _BY_NAME.get(kind, kind)
    lpt = np.maximum(log_t, 0.0)
    lpx = np.maximum(log_x, 0.0)
    if kind == "l1":
        return np.ones_like(np.asarray(log_ex, dtype=float) + lpt)
    if kind == "llogl":
        return 1.0 + lpt
    if kind == "stein":
        return 1.0 + lpt + lpx
    if kind == "psilog":
        return 1.0 / (_ln_e_plus(t, log_t) + log_ex)
    if kind == "loglog":
        # ln(e+t) >= 1 and ln(e+|x|) >= 1, so both ln_+ are plain logs
        return 1.0 + np.log(_ln_e_plus(t, log_t)) + np.log(log_ex)
    if kind == "eqloglog":
        return 1.0 + np.maximum(np.log(_ln_e_plus(t, log_t)) - np.log(log_ex), 0.0)
    if kind == "wl1":
        w = weight or WeightDescriptor("invlog")
        return w.from_log(log_ex) * np.ones_like(lpt)
    raise ValueError(f"functional {kind!r} has no pointwise integrand")


def _safe_log(a):
    a = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(a)


def integrand(kind: str, x, t, weight: Optional[WeightDescriptor] = None):
    """``Phi(x, t)`` at points ``|x|`` (radial distance) and values ``t >= 0``."""
    r = np.abs(np.asarray(x, dtype=float))
    t = np.abs(np.asarray(t, dtype=float))
    log_t = _safe_log(t)
    G = integrand_factor(kind, t, log_t, _safe_log(r), np.log(E + r), weight)
    return np.where(t > 0, t * G, 0.0)


def radial_tail_integral(factor: Callable, tail: TailDescriptor, spec: GridSpec,
                         log_cutoff: float) -> float:
    """``int_{outside box, ln(e+|x|) < log_cutoff} f G dx`` for a radial analytic tail.

    ``factor(t, log_t, log_x, log_ex)`` returns ``G``.  Integration runs in
    ``w = ln v`` with ``v = ln(e+|x|)`` so that cutoffs like ``e^{10^9}`` are fine.
    """
    R = float(spec.box_radius)
    v0 = math.log(E + R)
    if log_cutoff <= v0:
        return 0.0
    dim = spec.dim

    def density(v):
        log_f = float(tail.log_value_v(v))
        log_x = v + math.log1p(-math.exp(1.0 - v))  # ln(e^v - e)
        t = math.exp(log_f)
        G = float(factor(t, log_f, log_x, v))
        if dim == 1:
            return 2.0 * math.exp(float(tail.log_scaled_v(v, 1))) * G
        r = math.exp(log_x)
        if r < R * math.sqrt(2.0):
            ang = 8.0 * math.acos(min(R / r, 1.0))
        else:
            ang = 2.0 * math.pi
        # dx = ang r dr and dr = e^v dv, with ln r = v + log1p(-e^{1-v})
        return ang * math.exp(float(tail.log_scaled_v(v, 2)) + math.log1p(-math.exp(1.0 - v))) * G

    def in_w(w):
        v = math.exp(w)
        return density(v) * v

    pieces = [v0]
    if dim == 2:
        vk = math.log(E + R * math.sqrt(2.0))
        if vk < log_cutoff:
            pieces.append(vk)
    pieces.append(log_cutoff)
    total = 0.0
    for a, b in zip(pieces[:-1], pieces[1:]):
        val, _ = integrate.quad(in_w, math.log(a), math.log(b), limit=400, epsabs=0.0, epsrel=1e-10)
        total += val
    return total


def eval_functional(spec: MusielakSpec, f: SampledFunction, log_cutoff: Optional[float] = None) -> float:
    """Evaluate the functional on the grid representative of ``f``.

    The analytic tail of ``f`` (if any) contributes only when a truncation
    cutoff ``log_cutoff = ln(e+R)`` is supplied; convergence questions are left
    to truncation sweeps.
    """
    if not isinstance(spec, MusielakSpec):
        spec = MusielakSpec(spec)
    kind = spec.kind
    if kind == "psilux":
        return luxemburg_quasinorm(f)
    r = radial_distance(f.spec)
    vals = integrand(kind, r, f.values, spec.effective_weight)
    total = math.fsum(vals.ravel().tolist()) * f.spec.cell_volume
    if f.tail is not None and log_cutoff is not None:
        w = spec.effective_weight
        total += radial_tail_integral(
            lambda t, lt, lx, lex: integrand_factor(kind, t, lt, lx, lex, w),
            f.tail, f.spec, log_cutoff)
    return total


def luxemburg_quasinorm(f: SampledFunction, kind: str = "psilog", rtol: float = 1e-6) -> float:
    """``inf{lam > 0 : int Psi(x, |f|/lam) dx <= 1}`` by bracketing and bisection."""
    kind = _BY_NAME.get(kind, kind)
    if kind == "psilux":
        kind = "psilog"
    total = norm1(f)
    if total == 0.0:
        return 0.0
    r = radial_distance(f.spec)
    a = np.abs(f.values)
    vol = f.spec.cell_volume

    def modular(lam):
        return math.fsum(integrand(kind, r, a / lam).ravel().tolist()) * vol

    lo = hi = total
    while modular(hi) > 1.0:
        hi *= 2.0
    lo = hi / 2.0
    while modular(lo) <= 1.0:
        hi, lo = lo, lo / 2.0
    while (hi - lo) > rtol * hi:
        mid = 0.5 * (lo + hi)
        if modular(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------- Psi calculus

def psi_pointwise(x, t):
    """``t / (ln(e+t) + ln(e+|x|))``."""
    r = np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float)), axis=-1) if np.ndim(x) > 1 else np.abs(x)
    t = np.asarray(t, dtype=float)
    return t / (np.log(E + t) + np.log(E + r))


def psi_original(x, t):
    """The unsmoothed form ``t / (1 + ln_+ t + ln_+ |x|)``."""
    r = np.abs(np.asarray(x, dtype=float))
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        lpt = np.maximum(np.log(t), 0.0)
        lpx = np.maximum(np.log(r), 0.0)
    return t / (1.0 + lpt + lpx)


def psi_derivative(x, t):
    """Closed-form ``d/dt`` of :func:`psi_pointwise`."""
    r = np.abs(np.asarray(x, dtype=float))
    t = np.asarray(t, dtype=float)
    D = np.log(E + t) + np.log(E + r)
    return 1.0 / D - t / ((E + t) * D * D)


def psi_derivative_bounds_check(x, t, slack: float = 0.01) -> bool:
    """Check ``Psi/(2t) <= dPsi/dt <= Psi/t`` with a centered finite difference."""
    t = float(t)
    step = 1e-4 * max(t, 1.0)
    fd = (psi_pointwise(x, t + step) - psi_pointwise(x, t - step)) / (2 * step)
    ratio = psi_pointwise(x, t) / t
    return bool(0.5 * ratio * (1 - slack) <= fd <= ratio * (1 + slack))


def psi_tail_integral(x, a: float, b: float, rtol: float = 1e-8) -> float:
    """``int_a^b Psi(x, s) / s^2 ds`` by adaptive quadrature in ``ln s``."""
    if not (a > 0 and b >= a):
        raise ValueError("need 0 < a <= b")
    if a == b:
        return 0.0
    L = math.log(E + float(np.linalg.norm(np.atleast_1d(x))))
    val, _ = integrate.quad(lambda u: 1.0 / (np.logaddexp(1.0, u) + L),
                            math.log(a), math.log(b), epsabs=0.0, epsrel=rtol, limit=200)
    return val


# ---------------------------------------------------------------- Omega

def _cube_weight(weight: WeightDescriptor, dim: int) -> float:
    if weight.kind == "one":
        return 1.0
    if dim == 1:
        val, _ = integrate.quad(lambda y: float(weight(y)), 0.0, 1.0, epsabs=0, epsrel=1e-12)
    else:
        val, _ = integrate.dblquad(lambda y, x: float(weight(math.hypot(x, y))), 0.0, 1.0, 0.0, 1.0,
                                   epsabs=0, epsrel=1e-10)
    return val


def omega_capital(Rval: float, weight: Optional[WeightDescriptor] = None, dim: int = 1) -> float:
    """``w(Q_0) + int_{1<|y|<R} w(y) / |y|^n dy`` with ``Q_0 = [0,1)^n``."""
    if Rval < 1:
        raise ValueError("Omega is defined for R >= 1")
    weight = weight or WeightDescriptor("one")
    base = _cube_weight(weight, dim)
    if Rval == 1:
        return base
    # y = e^u turns dy/|y|^n into the sphere measure times du
    val, _ = integrate.quad(lambda u: float(weight(math.exp(u))), 0.0, math.log(Rval),
                            epsabs=0, epsrel=1e-10, limit=200)
    return base + sphere_measure(dim) * val
