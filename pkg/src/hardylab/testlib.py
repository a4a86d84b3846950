"""Analytic test functions with hand-derived membership flags."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import mpmath
import numpy as np

from .functionals import integrand_factor, radial_tail_integral
from .grid import (DomainError, GridSpec, SampledFunction, TailDescriptor, cube_slices, from_callable,
                   indicator, radial_distance)

__all__ = [
    "FAMILIES",
    "CONDITIONS",
    "Membership",
    "TestFunction",
    "materialize",
    "ground_truth",
    "catalog",
    "catalog_document",
    "CATALOG_VERSION",
]

CATALOG_VERSION = 1

FAMILIES = ("spike", "double_spike", "translated_spike", "cube_indicator", "heavy_tail", "slow_tail",
            "invlog_tail", "lacunary_sum")
CONDITIONS = ("l1", "llogl_local", "amalgam", "stein", "eqloglog", "loglog", "weighted_l1")
TAIL_FAMILIES = ("heavy_tail", "slow_tail", "invlog_tail")
COMPACT_FAMILIES = ("spike", "double_spike", "translated_spike", "cube_indicator")

_REQUIRED = {
    "spike": ("t",),
    "double_spike": ("t", "k"),
    "translated_spike": ("t", "k"),
    "cube_indicator": ("k",),
    "heavy_tail": ("alpha",),
    "slow_tail": ("beta",),
    "invlog_tail": (),
    "lacunary_sum": ("p",),
}


class Membership(str, Enum):
    FINITE = "Finite"
    DIVERGENT = "Divergent"


def _verdict(ok: bool) -> Membership:
    return Membership.FINITE if ok else Membership.DIVERGENT


@dataclass(frozen=True)
class TestFunction:
    """A catalog entry: family name, parameters and dimension."""

    __test__ = False  # not a pytest class

    family: str
    params: Tuple[Tuple[str, float], ...] = ()
    dim: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if isinstance(self.params, dict):
            object.__setattr__(self, "params", tuple(sorted(self.params.items())))
        missing = [p for p in _REQUIRED[self.family] if p not in self.p]
        if missing:
            raise ValueError(f"family {self.family} needs parameter(s) {', '.join(missing)}")
        if "t" in self.p:
            t = self.p["t"]
            if t < 1 or 2 ** round(math.log2(t)) != t:
                raise ValueError("spike height t must be a power of two >= 1")

    @classmethod
    def make(cls, family: str, dim: int = 1, **params) -> "TestFunction":
        return cls(family, tuple(sorted(params.items())), dim)

    @property
    def p(self) -> Dict[str, float]:
        return dict(self.params)

    @property
    def label(self) -> str:
        args = ",".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.family}({args})"

    # ---------------------------------------------------------- geometry

    def tail(self) -> Optional[TailDescriptor]:
        n = self.dim
        if self.family == "heavy_tail":
            return TailDescriptor(1.0, float(self.p["alpha"]), 0.0, 1.0)
        if self.family == "slow_tail":
            return TailDescriptor(1.0, float(n), float(self.p["beta"]), math.e)
        if self.family == "invlog_tail":
            return TailDescriptor(1.0, float(n), 1.0, 1.0)
        return None

    def min_cells_per_unit(self) -> int:
        return int(self.p.get("t", 1))

    def default_grid(self, box_radius: int = 64, cells_per_unit: int = 64) -> GridSpec:
        need = box_radius
        if "k" in self.p:
            need = max(need, 2 * (abs(int(self.p["k"])) + 1))
        return GridSpec(self.dim, need, max(cells_per_unit, self.min_cells_per_unit()))

    def lacunary_indices(self, box_radius: int) -> List[int]:
        out, m = [], 1
        while 2**m + 1 <= box_radius:
            out.append(m)
            m += 1
        return out

    # ---------------------------------------------------------- truth

    def ground_truth(self) -> Dict[str, Tuple[Membership, str]]:
        n, fam, p = self.dim, self.family, self.p
        if fam in COMPACT_FAMILIES:
            note = "bounded with compact support: every condition is a finite integral"
            return {c: (Membership.FINITE, note) for c in CONDITIONS}
        if fam == "heavy_tail":
            a = p["alpha"]
            note = (f"radial integrals of r^(n-1-alpha) times powers of ln r converge iff alpha > n; "
                    f"alpha={a:g}, n={n}")
            return {c: (_verdict(a > n), note) for c in CONDITIONS}
        if fam in ("slow_tail", "invlog_tail"):
            b = p["beta"] if fam == "slow_tail" else 1.0
            base = "with v = ln(e+r), |f| dx ~ v^(-beta) dv"
            out = {
                "l1": (_verdict(b > 1), f"{base}; int v^(-beta) dv < inf iff beta > 1"),
                "llogl_local": (_verdict(b > 1), f"{base}; |f_k|/mu_k ~ 1 so the sum tracks the L1 integral"),
                "amalgam": (_verdict(b > 2), f"{base}; ln(1/mu_k) ~ n v adds one power of v: beta > 2"),
                "stein": (_verdict(b > 2), f"{base}; ln|x| ~ v adds one power of v: beta > 2"),
                "eqloglog": (_verdict(b > 1), f"{base}; ln(e+|f|) < ln(e+|x|) far out, so it equals L1 there"),
                "loglog": (_verdict(b > 1), f"{base}; the ln v factor does not move the threshold beta > 1"),
                "weighted_l1": (_verdict(b > 0), f"{base}; the weight 1/v gives int v^(-beta-1) dv: beta > 0"),
            }
            return out
        # lacunary: mass m^-p on the cube at distance 2^m
        q = p["p"]
        base = "mass m^-p on Q_(2^m)"
        return {
            "l1": (_verdict(q > 1), f"{base}; sum m^-p < inf iff p > 1"),
            "llogl_local": (_verdict(q > 1), f"{base}; constant on each cube, so equal to the L1 sum"),
            "amalgam": (_verdict(q > 1), f"{base}; sum p ln(m) m^-p < inf iff p > 1"),
            "stein": (_verdict(q > 2), f"{base}; ln|x| ~ m ln 2 gives sum m^(1-p): p > 2"),
            "eqloglog": (_verdict(q > 1), f"{base}; values <= 1 so the ratio term vanishes far out"),
            "loglog": (_verdict(q > 1), f"{base}; ln ln|x| ~ ln m gives sum ln(m) m^-p: p > 1"),
            "weighted_l1": (_verdict(q > 0), f"{base}; weight ~ 1/(m ln 2) gives sum m^(-p-1): p > 0"),
        }

    # ---------------------------------------------------------- beyond the box

    def beyond_box(self, condition: str, spec: GridSpec, log_cutoff: float) -> float:
        """Contribution of ``R <= |x| < e^{log_cutoff} - e`` to a condition, computed analytically.

        Tails use the exact radial integral of the pointwise density; the cube-level
        conditions use their continuum forms ``|f|`` and ``|f| ln_+(1/|f|)``, valid
        because the tails vary slowly across a unit cube.
        """
        if condition not in CONDITIONS:
            raise ValueError(f"unknown condition {condition!r}")
        if log_cutoff <= math.log(math.e + spec.box_radius):
            return 0.0
        if self.family in COMPACT_FAMILIES:
            return 0.0
        if self.family == "lacunary_sum":
            return self._lacunary_beyond(condition, spec, log_cutoff)
        return radial_tail_integral(_density(condition), self.tail(), spec, log_cutoff)

    def _lacunary_beyond(self, condition: str, spec: GridSpec, log_cutoff: float) -> float:
        inside = self.lacunary_indices(spec.box_radius)
        lo = (inside[-1] + 1) if inside else 1
        # cube [2^m, 2^m+1) must lie inside |x| < e^V - e
        V = mpmath.mpf(log_cutoff)
        hi = int(mpmath.floor((V + mpmath.log1p(-(mpmath.e + 1) * mpmath.exp(-V))) / mpmath.log(2)))
        if hi < lo:
            return 0.0
        n = self.dim
        p = self.p["p"]

        def term(m):
            c = m ** (-p)
            mid = mpmath.mpf(2) ** m + mpmath.mpf(0.5)
            lx = mpmath.log(mid * mid + (n - 1) * mpmath.mpf(0.25)) / 2
            lex = lx + mpmath.log1p(mpmath.e * mpmath.exp(-lx))
            if condition in ("l1", "llogl_local", "eqloglog"):
                return c
            if condition == "amalgam":
                return c * p * mpmath.log(m)
            if condition == "stein":
                return c * (1 + lx)
            if condition == "loglog":
                return c * (1 + mpmath.log(1 + mpmath.log1p(c / mpmath.e)) + mpmath.log(lex))
            return c / lex

        with mpmath.workdps(30):
            if hi - lo < 2000:
                return float(mpmath.fsum(term(mpmath.mpf(m)) for m in range(lo, hi + 1)))
            head = mpmath.fsum(term(mpmath.mpf(m)) for m in range(lo, lo + 1000))
            rest = mpmath.sumem(term, [lo + 1000, hi])
            return float(head + rest)


def _density(condition: str):
    """Per-condition factor ``G`` such that the tail contribution is ``int |f| G``."""
    if condition in ("l1", "llogl_local"):
        return lambda t, lt, lx, lex: 1.0
    if condition == "amalgam":
        return lambda t, lt, lx, lex: max(-lt, 0.0)
    kind = {"stein": "stein", "eqloglog": "eqloglog", "loglog": "loglog", "weighted_l1": "wl1"}[condition]
    return lambda t, lt, lx, lex: float(integrand_factor(kind, t, lt, lx, lex))


def _spike_values(spec: GridSpec, t: float, corner) -> np.ndarray:
    h = spec.h
    width = 1.0 / t
    if width < h:
        raise DomainError(f"spike of width {width} is thinner than one cell (h={h})")
    lo = [float(c) for c in corner]
    hi = [c + width for c in lo]
    f = indicator(spec, lo if spec.dim > 1 else lo[0], hi if spec.dim > 1 else hi[0])
    return f.values * t**spec.dim


def materialize(tf: TestFunction, g: Optional[GridSpec] = None) -> SampledFunction:
    """Midpoint samples of ``tf`` on ``g`` plus the analytic tail where the family has one."""
    g = g or tf.default_grid()
    if g.dim != tf.dim:
        raise ValueError("grid dimension does not match the test function")
    p = tf.p
    n = g.dim
    fam = tf.family
    if fam in TAIL_FAMILIES:
        tail = tf.tail()
        return from_callable(g, lambda *xs: tail.value(np.sqrt(sum(x * x for x in xs))), tail)
    vals = np.zeros(g.shape)
    origin = (0,) * n
    if fam == "spike":
        vals += _spike_values(g, p["t"], origin)
    elif fam == "translated_spike":
        vals += _spike_values(g, p["t"], (int(p["k"]),) + (0,) * (n - 1))
    elif fam == "double_spike":
        vals += _spike_values(g, p["t"], origin)
        vals += _spike_values(g, p["t"], (int(p["k"]),) + (0,) * (n - 1))
    elif fam == "cube_indicator":
        vals[cube_slices(g, (int(p["k"]),) + (0,) * (n - 1))] = 1.0
    elif fam == "lacunary_sum":
        for m in tf.lacunary_indices(g.box_radius):
            vals[cube_slices(g, (2**m,) + (0,) * (n - 1))] = float(m) ** (-p["p"])
    return SampledFunction(g, vals)


def ground_truth(tf: TestFunction, condition: str) -> Membership:
    if condition not in CONDITIONS:
        raise ValueError(f"unknown condition {condition!r}")
    return tf.ground_truth()[condition][0]


def catalog() -> List[TestFunction]:
    """Entries used for membership checks; none sits at a critical exponent."""
    mk = TestFunction.make
    return [
        mk("spike", t=16),
        mk("spike", t=256),
        mk("double_spike", t=16, k=5),
        mk("translated_spike", t=16, k=100),
        mk("cube_indicator", k=3),
        mk("heavy_tail", alpha=1),
        mk("heavy_tail", alpha=2),
        mk("slow_tail", beta=1.25),
        mk("slow_tail", beta=1.75),
        mk("slow_tail", beta=2.5),
        mk("slow_tail", beta=3),
        mk("invlog_tail"),
        mk("lacunary_sum", p=1.5),
        mk("lacunary_sum", p=2),
        mk("lacunary_sum", p=3),
    ]


def catalog_document(entries: Optional[List[TestFunction]] = None) -> dict:
    entries = catalog() if entries is None else entries
    items = []
    for tf in entries:
        gt = tf.ground_truth()
        items.append({
            "family": tf.family,
            "params": dict(tf.params),
            "dim": tf.dim,
            "flags": {c: gt[c][0].value for c in CONDITIONS},
            "provenance": {c: gt[c][1] for c in CONDITIONS},
        })
    return {"version": CATALOG_VERSION, "entries": items}
