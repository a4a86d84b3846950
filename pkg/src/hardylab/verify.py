"""Executable experiments: truncation sweeps, ratio bands and exact inequality checks."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .decomp import OmegaWeight, amalgam_entropy_sum, far_weighted_sum, local_llogl_sum, split
from .functionals import (MusielakSpec, WeightDescriptor, eval_functional, integrand, omega_capital,
                          psi_derivative_bounds_check, psi_pointwise, psi_tail_integral, radial_tail_integral)
from .grid import GridSpec, SampledFunction, indicator, integral, norm1, radial_distance
from .maximal import (BumpKernel, RadiusSet, atom_weighted_norm, dyadic_max, hl_max, local_max,
                      smooth_local_max)
from .operators import atom, h_g_split, make_theta, t_theta
from .testlib import CONDITIONS, Membership, TestFunction, catalog, materialize

__all__ = [
    "GrowthClass",
    "GrowthResult",
    "TruncationSweep",
    "ReportRow",
    "Report",
    "classify_growth",
    "condition_value",
    "condition_sweeps",
    "box_truncation_sweep",
    "maximal_oracle",
    "dyadic_exactness_suite",
    "stein_inequality_suite",
    "psi_calculus_suite",
    "tail_integral_suite",
    "theorem_local_h1",
    "theorem_global_h1",
    "theorem_local_hlog",
    "theorem_global_hlog",
    "far_atom_suite",
    "omega_suite",
    "membership_suite",
    "consistency_suite",
    "run_suite",
    "SUITES",
    "reports_to_csv",
    "reports_to_json",
    "worker_count",
]

PASS, FAIL = "Pass", "Fail"


# ---------------------------------------------------------------- growth classes

class GrowthClass(str, Enum):
    CONVERGENT = "Convergent"
    LOG_DIVERGENT = "LogDivergent"
    POLY_DIVERGENT = "PolyDivergent"
    UNDECIDED = "Undecided"

    @property
    def membership(self) -> Optional[Membership]:
        if self is GrowthClass.CONVERGENT:
            return Membership.FINITE
        if self is GrowthClass.UNDECIDED:
            return None
        return Membership.DIVERGENT


@dataclass(frozen=True)
class TruncationSweep:
    """Values of a quantity at increasing truncation levels.

    ``params`` are the truncation levels (box radii, or log-radii ``ln(e+R)``).
    """

    quantity: str
    params: Tuple[float, ...]
    values: Tuple[float, ...]


@dataclass(frozen=True)
class GrowthResult:
    label: GrowthClass
    increments: Tuple[float, ...]
    last_ratio: float

    @property
    def membership(self) -> Optional[Membership]:
        return self.label.membership


def classify_growth(s: TruncationSweep) -> GrowthResult:
    """Decide convergence from the increments between consecutive truncation levels.

    Convergent: all increments vanish, or the last three are nonincreasing and the
    last is at most half the previous one.  LogDivergent: every increment is
    within a factor 2 of the median.  PolyDivergent: increments are nondecreasing
    and at least double over the sweep (or a value is infinite).
    """
    v = np.asarray(s.values, dtype=float)
    if v.size < 4:
        raise ValueError("growth classification needs at least 4 sweep points")
    if not np.all(np.isfinite(v)):
        return GrowthResult(GrowthClass.POLY_DIVERGENT, (), math.inf)
    d = np.diff(v)
    # increments below rounding level of the neighbouring values count as zero
    tol = 1e-12 * np.maximum(1.0, np.maximum(np.abs(v[:-1]), np.abs(v[1:])))
    d = np.where(np.abs(d) <= tol, 0.0, d)
    inc = tuple(float(x) for x in d)
    if np.all(d == 0):
        return GrowthResult(GrowthClass.CONVERGENT, inc, 0.0)
    if d[-1] == 0:
        last_ratio = 0.0
    else:
        last_ratio = float(d[-1] / d[-2]) if d[-2] != 0 else math.inf
    if np.any(d < 0):
        return GrowthResult(GrowthClass.UNDECIDED, inc, last_ratio)
    if d[-3] >= d[-2] >= d[-1] and d[-1] <= 0.5 * d[-2]:
        return GrowthResult(GrowthClass.CONVERGENT, inc, last_ratio)
    med = float(np.median(d))
    if med > 0 and np.all(d >= 0.5 * med) and np.all(d <= 2.0 * med):
        return GrowthResult(GrowthClass.LOG_DIVERGENT, inc, last_ratio)
    if d[0] > 0 and np.all(np.diff(d) >= 0) and d[-1] >= 2 * d[0]:
        return GrowthResult(GrowthClass.POLY_DIVERGENT, inc, last_ratio)
    return GrowthResult(GrowthClass.UNDECIDED, inc, last_ratio)


# ---------------------------------------------------------------- reports

@dataclass
class ReportRow:
    param: str
    lhs: float
    rhs: float
    ratio: float
    verdict: str


@dataclass
class Report:
    experiment: str
    rows: List[ReportRow]
    band: Tuple[float, float]
    rule: str
    verdict: str
    runtime: float = 0.0
    seed: Optional[int] = None
    notes: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def summary(self) -> str:
        lo, hi = self.band
        return f"{self.experiment}: {self.verdict} (band [{lo:.6g}, {hi:.6g}]; {self.rule})"

    def gnuplot(self) -> str:
        lines = [f"# {self.experiment}: param ratio"]
        for r in self.rows:
            lines.append(f"{r.param} {r.ratio!r}")
        return "\n".join(lines) + "\n"


def reports_to_csv(reports: Iterable[Report]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["experiment", "param", "lhs", "rhs", "ratio", "verdict"])
    for rep in reports:
        for r in rep.rows:
            w.writerow([rep.experiment, r.param, repr(float(r.lhs)), repr(float(r.rhs)),
                        repr(float(r.ratio)), r.verdict])
    return buf.getvalue()


def reports_to_json(reports: Iterable[Report]) -> str:
    def enc(x):
        if isinstance(x, float) and not math.isfinite(x):
            return repr(x)
        return x

    out = []
    for rep in reports:
        d = asdict(rep)
        d["rows"] = [{k: enc(v) for k, v in row.items()} for row in d["rows"]]
        d["band"] = [enc(b) for b in d["band"]]
        out.append(d)
    return json.dumps(out, indent=2, sort_keys=True)


def _ratio(lhs: float, rhs: float) -> float:
    if rhs == 0:
        return math.inf if lhs != 0 else math.nan
    return lhs / rhs


def _band(ratios: Sequence[float]) -> Tuple[float, float]:
    r = [x for x in ratios if not math.isnan(x)]
    if not r:
        return (math.nan, math.nan)
    return (min(r), max(r))


def _band_ok(band: Tuple[float, float], max_width: float) -> bool:
    lo, hi = band
    return lo > 0 and math.isfinite(hi) and hi / lo <= max_width


def _band_report(name: str, params: Sequence[str], lhs: Sequence[float], rhs: Sequence[float],
                 max_width: float, t0: float, **kw) -> Report:
    ratios = [_ratio(a, b) for a, b in zip(lhs, rhs)]
    band = _band(ratios)
    ok = _band_ok(band, max_width)
    rows = [ReportRow(str(p), a, b, r, PASS if (r > 0 and math.isfinite(r)) else FAIL)
            for p, a, b, r in zip(params, lhs, rhs, ratios)]
    return Report(name, rows, band, f"band width <= {max_width:g}", PASS if ok else FAIL,
                  time.perf_counter() - t0, **kw)


def worker_count() -> int:
    raw = os.environ.get("HARDYLAB_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"HARDYLAB_THREADS must be an integer, got {raw!r}")
        return max(1, n)
    return max(1, min(8, os.cpu_count() or 1))


def _pmap(fn: Callable, items: Sequence, threads: Optional[int] = None) -> list:
    n = threads or worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- conditions

_FUNCTIONAL_OF = {"l1": "l1", "stein": "stein", "eqloglog": "eqloglog", "loglog": "loglog", "weighted_l1": "wl1"}


def condition_value(condition: str, f: SampledFunction) -> float:
    """In-box value of a membership condition for ``f``."""
    if condition in _FUNCTIONAL_OF:
        return eval_functional(MusielakSpec(_FUNCTIONAL_OF[condition]), f)
    if condition == "llogl_local":
        return local_llogl_sum(split(f))
    if condition == "amalgam":
        return amalgam_entropy_sum(split(f))
    raise ValueError(f"unknown condition {condition!r}")


def sweep_levels(spec: GridSpec, steps: int = 4, growth: float = 256.0) -> Tuple[float, ...]:
    """Log-radii ``ln(e+R) growth^k``: doubly exponential in the radius itself."""
    v0 = math.log(math.e + spec.box_radius)
    return tuple(v0 * growth**k for k in range(steps + 1))


def condition_sweeps(tf: TestFunction, spec: Optional[GridSpec] = None, steps: int = 4,
                     growth: float = 256.0) -> Dict[str, TruncationSweep]:
    """Every condition truncated at ``|x| < e^V - e`` for the levels of :func:`sweep_levels`.

    The first level is the grid box itself; later levels add the analytic
    continuation of the test function beyond the box.
    """
    spec = spec or tf.default_grid()
    f = materialize(tf, spec)
    d = split(f)
    levels = sweep_levels(spec, steps, growth)
    out = {}
    for c in CONDITIONS:
        if c == "llogl_local":
            base = local_llogl_sum(d)
        elif c == "amalgam":
            base = amalgam_entropy_sum(d)
        else:
            base = condition_value(c, f)
        vals = [base] + [base + tf.beyond_box(c, spec, V) for V in levels[1:]]
        out[c] = TruncationSweep(c, levels, tuple(vals))
    return out


def box_truncation_sweep(tf: TestFunction, condition: str, radii: Sequence[int] = (8, 16, 32, 64, 128, 256),
                         cells_per_unit: int = 64) -> TruncationSweep:
    """Condition values on growing boxes, without any analytic continuation."""
    vals = []
    for R in radii:
        spec = tf.default_grid(box_radius=R, cells_per_unit=cells_per_unit)
        if spec.box_radius != R:
            raise ValueError(f"box radius {R} cannot hold {tf.label}")
        vals.append(condition_value(condition, materialize(tf, spec)))
    return TruncationSweep(condition, tuple(float(r) for r in radii), tuple(vals))


# ---------------------------------------------------------------- maximal oracle

def maximal_oracle(radii: str = "quarter-octave", box_radius: int = 64, cells_per_unit: int = 64,
                   x_max: float = 32.0, tol: Optional[float] = None) -> Report:
    """``M chi_{[-1,1]}(x) = 1/(1+|x|)`` for ``1 < |x| <= x_max``."""
    t0 = time.perf_counter()
    if tol is None:
        tol = 0.02 if radii == "quarter-octave" else 0.002
    spec = GridSpec(1, box_radius, cells_per_unit)
    f = indicator(spec, -1.0, 1.0)
    M = hl_max(f, RadiusSet.named(radii, spec))
    x = spec.axis_centers()
    sel = np.nonzero((np.abs(x) > 1) & (np.abs(x) <= x_max))[0]
    exact = 1.0 / (1.0 + np.abs(x[sel]))
    ratios = M.values[sel] / exact
    err = np.abs(ratios - 1.0)
    step = max(1, cells_per_unit // 4)
    rows = [ReportRow(repr(float(x[i])), float(M.values[i]), float(e), float(r),
                      PASS if abs(r - 1) <= tol else FAIL)
            for k, (i, e, r) in enumerate(zip(sel, exact, ratios)) if k % step == 0 or abs(r - 1) > tol]
    ok = bool(np.all(err <= tol))
    return Report(f"maximal-oracle-{radii}", rows, (float(ratios.min()), float(ratios.max())),
                  f"relative error <= {tol:g} on every cell", PASS if ok else FAIL,
                  time.perf_counter() - t0, notes=f"max relative error {float(err.max()):.6g}")


# ---------------------------------------------------------------- dyadic checks

def _random_step(rng: np.random.Generator, cells: int, max_steps: int = 8, max_height: int = 32,
                 allow_zero: bool = True) -> np.ndarray:
    k = int(rng.integers(1, max_steps + 1))
    cuts = np.sort(rng.choice(np.arange(1, cells), size=min(k - 1, cells - 1), replace=False))
    bounds = np.concatenate([[0], cuts, [cells]])
    low = 0 if allow_zero else 1
    heights = rng.integers(low, max_height + 1, size=len(bounds) - 1)
    out = np.zeros(cells, dtype=np.int64)
    for a, b, hgt in zip(bounds[:-1], bounds[1:], heights):
        out[a:b] = hgt
    if not out.any():
        out[int(rng.integers(0, cells))] = 1
    return out


def brute_dyadic_max(values: Sequence) -> List[Fraction]:
    """Exact dyadic maximal function of cell values on ``[0,1)`` by enumerating every dyadic interval."""
    cells = len(values)
    vals = [abs(Fraction(v)) for v in values]
    best = list(vals)
    size = 1
    while size <= cells:
        for start in range(0, cells, size):
            avg = sum(vals[start:start + size], Fraction(0)) / size
            for i in range(start, start + size):
                if avg > best[i]:
                    best[i] = avg
        size *= 2
    return best


def dyadic_exactness_suite(count: int = 100, seed: int = 0, cells: int = 64) -> Report:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    spec = GridSpec(1, 1, cells)
    rows = []
    bad = 0
    for i in range(count):
        v = _random_step(rng, cells)
        full = np.zeros(spec.shape)
        full[cells:] = v
        got = dyadic_max(SampledFunction(spec, full)).values[cells:]
        want = brute_dyadic_max(v.tolist())
        mism = sum(1 for a, b in zip(got, want) if Fraction(float(a)) != b)
        bad += mism
        rows.append(ReportRow(str(i), float(mism), 0.0, 0.0 if mism == 0 else math.inf,
                              PASS if mism == 0 else FAIL))
    return Report("dyadic-exactness", rows, (0.0, 0.0), "zero mismatching cells", PASS if bad == 0 else FAIL,
                  time.perf_counter() - t0, seed=seed)


def stein_inequality_suite(count: int = 100, seed: int = 0, levels: int = 20, cells: int = 16,
                           constant: str = "literal") -> Report:
    """``|{M^d v > s}| >= (c/s) int_{|v|>s} |v|`` on normalized step functions, in exact arithmetic.

    ``constant='literal'`` uses ``c = 1``; ``constant='classical'`` uses the
    Calderon-Zygmund constant ``c = 2^{-n}``.
    """
    if constant not in ("literal", "classical"):
        raise ValueError("constant must be 'literal' or 'classical'")
    t0 = time.perf_counter()
    c = Fraction(1) if constant == "literal" else Fraction(1, 2)
    rng = np.random.default_rng(seed)
    rows = []
    violations = 0
    ratios = []
    for i in range(count):
        raw = _random_step(rng, cells, max_steps=6, max_height=20)
        total = int(raw.sum())
        v = [Fraction(int(a) * cells, total) for a in raw]  # mean 1, so ||v||_1 = 1
        md = brute_dyadic_max(v)
        vmax = max(v)
        worst = None
        for j in range(1, levels + 1):
            s = Fraction(float(vmax) ** (j / levels) + 1e-9) if vmax > 1 else Fraction(1) + Fraction(j, levels)
            lhs = Fraction(sum(1 for x in md if x > s), cells)
            rhs = c / s * sum((x for x in v if x > s), Fraction(0)) / cells
            if lhs < rhs:
                violations += 1
            # rank levels by lhs/rhs; levels with rhs = 0 hold trivially
            key = lhs / rhs if rhs > 0 else math.inf
            if worst is None or key < worst[0]:
                worst = (key, lhs, rhs, s)
        _, lhs, rhs, s = worst
        r = _ratio(float(lhs), float(rhs))
        if rhs > 0:
            ratios.append(r)
        rows.append(ReportRow(f"{i}@s={float(s):.9g}", float(lhs), float(rhs), r, PASS if lhs >= rhs else FAIL))
    band = _band(ratios) if ratios else (math.inf, math.inf)
    return Report(f"stein-inequality-{constant}", rows, band, "zero violations", PASS if violations == 0 else FAIL,
                  time.perf_counter() - t0, seed=seed, notes=f"{violations} violations")


# ---------------------------------------------------------------- Psi calculus

def psi_calculus_suite(nx: int = 50, nt: int = 50) -> Report:
    t0 = time.perf_counter()
    xs = np.concatenate([[0.0], np.logspace(-3, 8, nx - 1)])
    ts = np.logspace(-8, 8, nt)
    rows = []
    fails = 0
    for x in xs:
        deriv = all(psi_derivative_bounds_check(x, t) for t in ts)
        p = psi_pointwise(x, ts)
        p2 = psi_pointwise(x, 2 * ts)
        doubling = bool(np.all(p2 <= 2 * p))
        q = p / ts
        monotone = bool(np.all(np.diff(q) <= 0))
        ok = deriv and doubling and monotone
        fails += not ok
        rows.append(ReportRow(repr(float(x)), float(np.max(p2 / (2 * p))), 1.0, float(np.max(p2 / (2 * p))),
                              PASS if ok else FAIL))
    return Report("psi-calculus", rows, _band([r.ratio for r in rows]),
                  "derivative bounds, doubling and Psi/t monotone on the grid", PASS if fails == 0 else FAIL,
                  time.perf_counter() - t0)


def tail_integral_suite(max_width: float = 4.0) -> List[Report]:
    """Quadrature of ``int Psi/s^2`` against ``ln(1/t)/L`` (t<1) and ``ln(1 + ln(e+t)/L)`` (t>1)."""
    reports = []
    for label, sign in (("small", -1), ("large", 1)):
        t0 = time.perf_counter()
        params, lhs, rhs = [], [], []
        for L in range(1, 21):
            x = math.exp(L) - math.e
            for j in range(1, 21):
                t = 2.0 ** (sign * j)
                if sign < 0:
                    val = psi_tail_integral(x, t, 1.0)
                    comp = math.log(1 / t) / L
                else:
                    val = psi_tail_integral(x, 1.0, t)
                    comp = math.log(1 + math.log(math.e + t) / L)
                params.append(f"L={L}:t=2^{sign * j}")
                lhs.append(val)
                rhs.append(comp)
        reports.append(_band_report(f"tail-integral-{label}", params, lhs, rhs, max_width, t0))
    return reports


# ---------------------------------------------------------------- local theorems

def _kernel(name: Optional[str], dim: int = 1) -> Optional[BumpKernel]:
    return None if name in (None, "", "none") else BumpKernel(name, dim)


def theorem_local_h1(ts: Sequence[int] = tuple(2**e for e in range(2, 13)), kernel: Optional[str] = None,
                     cells_per_unit: int = 64, max_width: float = 4.0, max_shift: float = 0.10) -> Report:
    """``|M^loc f|_1`` against the local L log L sum for spikes, at two resolutions.

    With ``kernel`` set, the smooth local maximal function replaces the
    Hardy-Littlewood one.
    """
    t0 = time.perf_counter()
    k = _kernel(kernel)
    params, lhs, rhs, bands = [], [], [], []
    for mult in (1, 2):
        sub = []
        for t in ts:
            tf = TestFunction.make("spike", t=t)
            spec = GridSpec(1, 2, max(cells_per_unit, t) * mult)
            f = materialize(tf, spec)
            M = local_max(f) if k is None else smooth_local_max(f, k)
            a, b = norm1(M), local_llogl_sum(split(f))
            params.append(f"x{mult}:t={t}")
            lhs.append(a)
            rhs.append(b)
            sub.append(a / b)
        bands.append(_band(sub))
    rep = _band_report("local-h1" + (f"-{kernel}" if k else ""), params, lhs, rhs, max_width, t0)
    (lo1, hi1), (lo2, hi2) = bands
    shift = max(abs(lo2 - lo1) / lo1, abs(hi2 - hi1) / hi1)
    ok = _band_ok(bands[0], max_width) and _band_ok(bands[1], max_width) and shift < max_shift
    rep.band = bands[0]
    rep.rule = f"band width <= {max_width:g} at both resolutions; endpoint shift < {max_shift:g}"
    rep.verdict = PASS if ok else FAIL
    rep.notes = f"band at doubled resolution [{lo2:.6g}, {hi2:.6g}], endpoint shift {shift:.4g}"
    return rep


def theorem_local_hlog(ts: Sequence[int] = tuple(2**e for e in range(4, 17, 2)), max_width: float = 4.0,
                       cells_per_unit: int = 64) -> Report:
    """``int Psi(x, M^loc f)`` against the equivalent log-log functional for spikes.

    Also classifies the log-radius sweep of ``int Psi(x, M^loc f)`` for the
    slowly decaying non-integrable example; far out ``M^loc f`` is replaced by
    ``f``, which it matches up to ``1 + o(1)`` for such slowly varying tails.
    """
    t0 = time.perf_counter()
    params, lhs, rhs = [], [], []
    for t in ts:
        tf = TestFunction.make("spike", t=t)
        f = materialize(tf, GridSpec(1, 2, max(cells_per_unit, t)))
        M = local_max(f)
        a = math.fsum(integrand("psilog", radial_distance(f.spec), M.values).tolist()) * f.spec.h
        b = eval_functional(MusielakSpec("eqloglog"), f)
        params.append(f"t={t}")
        lhs.append(a)
        rhs.append(b)
    rep = _band_report("local-hlog", params, lhs, rhs, max_width, t0)
    tf = TestFunction.make("invlog_tail")
    spec = tf.default_grid()
    f = materialize(tf, spec)
    M = local_max(f)
    base = math.fsum(integrand("psilog", radial_distance(spec), M.values).tolist()) * spec.h
    levels = sweep_levels(spec)
    from .functionals import integrand_factor

    vals = [base] + [base + radial_tail_integral(
        lambda t, lt, lx, lex: float(integrand_factor("psilog", t, lt, lx, lex)), f.tail, spec, V)
        for V in levels[1:]]
    g = classify_growth(TruncationSweep("psi-of-local-max", levels, tuple(vals)))
    wl = condition_sweeps(tf, spec)["weighted_l1"]
    gw = classify_growth(wl)
    ok_growth = g.label is GrowthClass.CONVERGENT and gw.label is GrowthClass.CONVERGENT
    rep.rows.append(ReportRow("invlog_tail:psi-of-local-max", vals[-1], g.increments[-1], g.last_ratio,
                              PASS if g.label is GrowthClass.CONVERGENT else FAIL))
    rep.rows.append(ReportRow("invlog_tail:weighted_l1", wl.values[-1], gw.increments[-1], gw.last_ratio,
                              PASS if gw.label is GrowthClass.CONVERGENT else FAIL))
    if not ok_growth:
        rep.verdict = FAIL
    rep.rule += "; non-integrable example convergent in both quantities"
    rep.runtime = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------- far atoms and Omega

def far_atom_suite(js: Sequence[int] = (4, 8, 16, 32, 64, 128, 256), theta: str = "box", kernel: str = "bump",
                   cells_per_unit: int = 16, reach: int = 8, max_width: float = 3.0) -> List[Report]:
    """Truncated ``int M_phi a_j`` over ``|x| < reach |j|`` against ``1 + ln|j|`` and, weighted, ``Omega(|j|)``."""
    t0 = time.perf_counter()
    w = WeightDescriptor("invlog")
    k = BumpKernel(kernel, 1)

    def one(j):
        spec = GridSpec(1, reach * j, cells_per_unit)
        a = atom((j,), make_theta(spec, theta))
        plain, tail1 = atom_weighted_norm(a, None, reach * j, k)
        weighted, tail2 = atom_weighted_norm(a, w, reach * j, k)
        return plain, tail1, weighted, tail2

    res = _pmap(one, list(js))
    tag = f"{theta}-{kernel}"
    p = [f"j={j}" for j in js]
    r1 = _band_report(f"far-atoms-{tag}", p, [r[0] for r in res], [1 + math.log(j) for j in js], max_width, t0)
    r1.notes = "analytic tail bounds beyond the truncation: " + ", ".join(f"{r[1]:.4g}" for r in res)
    r2 = _band_report(f"far-atoms-weighted-{tag}", p, [r[2] for r in res], [omega_capital(j, w) for j in js],
                      max_width, t0)
    r2.notes = "analytic tail bounds beyond the truncation: " + ", ".join(f"{r[3]:.4g}" for r in res)
    return [r1, r2]


def omega_suite(points: int = 61, rel_tol: float = 1e-4, max_width: float = 2.0) -> List[Report]:
    t0 = time.perf_counter()
    Rs = np.logspace(0, 6, points)
    vals = [omega_capital(float(R)) for R in Rs]
    exact = [1 + 2 * math.log(float(R)) for R in Rs]
    rows = [ReportRow(repr(float(R)), a, b, a / b, PASS if abs(a / b - 1) <= rel_tol else FAIL)
            for R, a, b in zip(Rs, vals, exact)]
    ok = all(r.verdict == PASS for r in rows)
    r1 = Report("omega-unweighted", rows, _band([r.ratio for r in rows]), f"relative error <= {rel_tol:g}",
                PASS if ok else FAIL, time.perf_counter() - t0)
    t0 = time.perf_counter()
    w = WeightDescriptor("invlog")
    r2 = _band_report("omega-invlog", [repr(float(R)) for R in Rs], [omega_capital(float(R), w) for R in Rs],
                      [1 + math.log(math.log(math.e + float(R))) for R in Rs], max_width, t0)
    return [r1, r2]


# ---------------------------------------------------------------- membership

def membership_suite(entries: Optional[Sequence[TestFunction]] = None, theta: str = "box",
                     kernel: str = "bump") -> Report:
    """Growth class of every condition on every catalog entry against the hand-derived flag.

    The conditions are integrals of ``f`` alone; ``theta`` and ``kernel`` are
    recorded so that reruns under other choices are labeled.
    """
    t0 = time.perf_counter()
    entries = list(catalog() if entries is None else entries)
    sweeps = _pmap(condition_sweeps, entries)
    rows = []
    bad = 0
    for tf, sw in zip(entries, sweeps):
        truth = tf.ground_truth()
        for c in CONDITIONS:
            g = classify_growth(sw[c])
            want = truth[c][0]
            ok = g.membership is want
            bad += not ok
            last_inc = g.increments[-1] if g.increments else 0.0
            rows.append(ReportRow(f"{tf.label}:{c}:{g.label.value}:{want.value}", sw[c].values[-1], last_inc,
                                  g.last_ratio, PASS if ok else FAIL))
    return Report("membership", rows, (0.0, 0.0), "zero misclassified or undecided flags",
                  PASS if bad == 0 else FAIL, time.perf_counter() - t0,
                  notes=f"theta={theta} kernel={kernel}; {bad} mismatches over {len(rows)} flags")


# ---------------------------------------------------------------- global theorems

def theorem_global_h1(theta: str = "box", kernel: str = "bump") -> List[Report]:
    t0 = time.perf_counter()
    reports = far_atom_suite(theta=theta, kernel=kernel)[:1]
    entries = [TestFunction.make("slow_tail", beta=3), TestFunction.make("slow_tail", beta=1.5)]
    want = [GrowthClass.CONVERGENT, None]
    rows = []
    ok = True
    for tf, target in zip(entries, want):
        sw = condition_sweeps(tf)["stein"]
        g = classify_growth(sw)
        good = g.label is target if target else g.membership is Membership.DIVERGENT
        ok &= good
        rows.append(ReportRow(f"{tf.label}:stein:{g.label.value}", sw.values[-1], g.increments[-1], g.last_ratio,
                              PASS if good else FAIL))
    reports.append(Report("global-h1-membership", rows, (0.0, 0.0), "growth classes match the flags",
                          PASS if ok else FAIL, time.perf_counter() - t0))
    return reports


def lacunary_omega_sweep(p: float = 2.0, cutoffs: Sequence[int] = (4, 16, 64, 256),
                         weight: Optional[WeightDescriptor] = None) -> TruncationSweep:
    """Partial sums of ``sum_m m^-p Omega(2^m)`` up to each cutoff."""
    weight = weight or WeightDescriptor("invlog")
    ow = OmegaWeight(weight)
    vals = []
    lam = {}
    m = 1
    for M in cutoffs:
        while m <= M:
            lam[(2.0**m,)] = m ** (-p)
            m += 1
        vals.append(far_weighted_sum(lam, ow))
    return TruncationSweep("lacunary-omega", tuple(float(c) for c in cutoffs), tuple(vals))


def theorem_global_hlog(theta: str = "box", kernel: str = "bump") -> List[Report]:
    t0 = time.perf_counter()
    reports = far_atom_suite(theta=theta, kernel=kernel)[1:]
    rows = []
    sw = condition_sweeps(TestFunction.make("slow_tail", beta=1.5))["loglog"]
    g = classify_growth(sw)
    ok1 = g.label is GrowthClass.CONVERGENT
    rows.append(ReportRow("slow_tail(beta=1.5):loglog", sw.values[-1], g.increments[-1], g.last_ratio,
                          PASS if ok1 else FAIL))
    ls = lacunary_omega_sweep()
    g2 = classify_growth(ls)
    ok2 = g2.label is GrowthClass.CONVERGENT
    rows.append(ReportRow("lacunary_sum(p=2):omega", ls.values[-1], g2.increments[-1], g2.last_ratio,
                          PASS if ok2 else FAIL))
    reports.append(Report("global-hlog-membership", rows, (0.0, 0.0), "both sweeps convergent",
                          PASS if ok1 and ok2 else FAIL, time.perf_counter() - t0))
    return reports


# ---------------------------------------------------------------- consistency

def random_dyadic_function(rng: np.random.Generator, spec: GridSpec, density: float = 0.3,
                           bits: int = 8) -> SampledFunction:
    """Random signed values ``k / 2^bits`` on a random subset of cells; every sum of them is exact."""
    vals = rng.integers(-(2**bits), 2**bits + 1, size=spec.shape).astype(float) / 2**bits
    vals[rng.random(spec.shape) > density] = 0.0
    return SampledFunction(spec, vals)


def consistency_suite(count: int = 50, seed: int = 0, theta: str = "box",
                      spec: Optional[GridSpec] = None) -> Report:
    """Exact zero mean of ``T_theta f``, exact ``h + g = T_theta f`` and exact mass bookkeeping."""
    t0 = time.perf_counter()
    spec = spec or GridSpec(1, 8, 16)
    th = make_theta(spec, theta)
    rng = np.random.default_rng(seed)
    rows = []
    bad = 0
    for i in range(count):
        f = random_dyadic_function(rng, spec)
        T = t_theta(f, th)
        zero_mean = integral(T) == 0.0
        h, g = h_g_split(f, th)
        recon = bool(np.array_equal(h.values + g.values, T.values))
        d = split(f)
        mass = d.total_mass() == norm1(f)
        ok = zero_mean and recon and mass
        bad += not ok
        rows.append(ReportRow(str(i), integral(T), d.total_mass() - norm1(f), float(recon), PASS if ok else FAIL))
    return Report(f"consistency-{theta}", rows, (0.0, 0.0), "all identities exact", PASS if bad == 0 else FAIL,
                  time.perf_counter() - t0, seed=seed)


# ---------------------------------------------------------------- suites

def _cfg(config: Optional[dict], key: str, default):
    if not config or config.get(key) is None:
        return default
    return config[key]


SUITES: Dict[str, Callable[[dict], List[Report]]] = {
    "maximal-oracle": lambda c: [maximal_oracle(_cfg(c, "radii", "quarter-octave"))],
    "dyadic-exactness": lambda c: [dyadic_exactness_suite(_cfg(c, "count", 100), _cfg(c, "seed", 0))],
    "stein-inequality": lambda c: [stein_inequality_suite(_cfg(c, "count", 100), _cfg(c, "seed", 0),
                                                          constant=_cfg(c, "constant", "literal"))],
    "psi-calculus": lambda c: [psi_calculus_suite()],
    "tail-integrals": lambda c: tail_integral_suite(),
    "local-h1": lambda c: [theorem_local_h1(kernel=_cfg(c, "local_kernel", None))],
    "local-hlog": lambda c: [theorem_local_hlog()],
    "far-atoms": lambda c: far_atom_suite(theta=_cfg(c, "theta", "box"), kernel=_cfg(c, "kernel", "bump")),
    "global-h1": lambda c: theorem_global_h1(_cfg(c, "theta", "box"), _cfg(c, "kernel", "bump")),
    "global-hlog": lambda c: theorem_global_hlog(_cfg(c, "theta", "box"), _cfg(c, "kernel", "bump")),
    "omega": lambda c: omega_suite(),
    "membership": lambda c: [membership_suite(theta=_cfg(c, "theta", "box"), kernel=_cfg(c, "kernel", "bump"))],
    "consistency": lambda c: [consistency_suite(_cfg(c, "count", 50), _cfg(c, "seed", 0),
                                                theta=_cfg(c, "theta", "box"))],
}

_ALL_ORDER = ("maximal-oracle", "dyadic-exactness", "stein-inequality", "psi-calculus", "tail-integrals",
              "local-h1", "far-atoms", "omega", "membership", "consistency", "local-hlog", "global-h1",
              "global-hlog")


def run_suite(name: str, config: Optional[dict] = None) -> List[Report]:
    """Run a named suite (or ``all``); deterministic for a fixed seed and any thread count."""
    config = dict(config or {})
    if name == "all":
        parts = _pmap(lambda n: SUITES[n](config), list(_ALL_ORDER), config.get("threads"))
        return [r for part in parts for r in part]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}, all")
    return SUITES[name](config)
