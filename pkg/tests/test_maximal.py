from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardylab.grid import GridSpec, SampledFunction, cube_indicator, indicator, integral, zeros
from hardylab.maximal import (BumpKernel, RadiusSet, _convolve_1d, atom_weighted_norm, dyadic_max, hl_max,
                              local_max, smooth_local_max, smooth_max)
from hardylab.functionals import WeightDescriptor
from hardylab.verify import brute_dyadic_max

from conftest import functions_on

S = GridSpec(1, 8, 16)


def at(f, x):
    c = f.spec.axis_centers()
    return float(f.values[np.argmin(np.abs(c - x))])


def brute_ball_sup(f, x, radii):
    """Independent route: average of |f| over [x-r, x+r] by clipping each cell."""
    h = f.spec.h
    edges = f.spec.axis_boundaries()
    a = np.abs(f.values)
    best = 0.0
    for r in radii:
        lo, hi = x - r, x + r
        overlap = np.clip(np.minimum(edges[1:], hi) - np.maximum(edges[:-1], lo), 0, h)
        best = max(best, float(np.dot(a, overlap)) / (2 * r))
    return best


def test_indicator_examples():
    f = indicator(S, -1.0, 1.0)
    M = hl_max(f, RadiusSet.quarter_octave(S))
    assert at(M, 1 / 32) == pytest.approx(1.0)
    assert at(M, 3 + 1 / 32) == pytest.approx(1 / (4 + 1 / 32), rel=0.02)
    fine = GridSpec(1, 4, 128)
    h = fine.h
    L = local_max(indicator(fine, -1.0, 1.0), RadiusSet.dense(fine, local=True))
    assert at(L, 3 + h / 2) == 0.0
    # largest ball below radius 1 around the cell center 1.5 + h/2
    assert at(L, 1.5 + h / 2) == pytest.approx((0.5 - h) / (2 - h), rel=1e-12)
    assert at(L, 1.5 + h / 2) == pytest.approx(0.25, rel=0.02)
    assert np.all(hl_max(zeros(S), RadiusSet.dense(S)).values == 0)


def test_dense_radii_match_brute_force():
    spec = GridSpec(1, 4, 8)
    rng = np.random.default_rng(0)
    f = SampledFunction(spec, rng.integers(0, 5, spec.shape) * (rng.random(spec.shape) < 0.3))
    rs = RadiusSet.dense(spec)
    M = hl_max(f, rs)
    x = spec.axis_centers()
    for i in range(0, spec.cells_per_axis, 3):
        want = max(abs(f.values[i]), brute_ball_sup(f, x[i], rs.radii))
        assert M.values[i] == pytest.approx(want, rel=1e-12, abs=1e-15)


def test_radius_set_invariants():
    for local in (False, True):
        for rs in (RadiusSet.quarter_octave(S, local=local), RadiusSet.dense(S, local=local)):
            assert all(b > a for a, b in zip(rs.radii, rs.radii[1:]))
            if local:
                assert rs.radii[-1] < 1
    with pytest.raises(ValueError):
        RadiusSet(())
    with pytest.raises(ValueError):
        RadiusSet((0.5, 0.25))


@settings(max_examples=30, deadline=None)
@given(functions_on(S), functions_on(S), st.integers(-4, 4))
def test_hl_properties(f, g, c):
    rs = RadiusSet.quarter_octave(S)
    Mf, Mg = hl_max(f, rs).values, hl_max(g, rs).values
    tol = 1e-12
    assert np.all(Mf >= np.abs(f.values) - tol)
    assert np.all(hl_max(f + g, rs).values <= Mf + Mg + tol)
    assert np.allclose(hl_max(f * c, rs).values, abs(c) * Mf, rtol=1e-12, atol=1e-14)
    loc = RadiusSet.quarter_octave(S, local=True)
    Lf = local_max(f, loc).values
    union = RadiusSet(tuple(sorted(set(rs.radii) | set(loc.radii))))
    Mu = hl_max(f, union).values
    assert np.all(Lf <= Mu + tol) and np.all(Lf >= np.abs(f.values) - tol)
    assert np.all(Mu >= Mf - tol)


def test_translation_covariance():
    f = indicator(S, 0.0, 0.5) * 3.0
    g = indicator(S, 2.0, 2.5) * 3.0
    rs = RadiusSet.quarter_octave(S, local=True)
    Mf, Mg = local_max(f, rs).values, local_max(g, rs).values
    shift = 2 * S.cells_per_unit
    assert np.allclose(Mg[shift + 32: -32], Mf[32: -shift - 32], atol=1e-14)


def test_dyadic_examples():
    spec = GridSpec(1, 1, 64)
    v = np.zeros(spec.shape)
    v[64:80] = 4.0
    M = dyadic_max(SampledFunction(spec, v)).values[64:]
    assert np.all(M[:16] == 4) and np.all(M[16:32] == 2) and np.all(M[32:] == 1)
    assert np.all(dyadic_max(cube_indicator(spec, (0,))).values[64:] == 1)
    assert np.all(dyadic_max(zeros(spec)).values == 0)
    with pytest.raises(ValueError):
        dyadic_max(indicator(spec, -0.5, 0.5))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-16, 16), min_size=32, max_size=32))
def test_dyadic_matches_enumeration(vals):
    spec = GridSpec(1, 1, 32)
    full = np.zeros(spec.shape)
    full[32:] = vals
    got = dyadic_max(SampledFunction(spec, full)).values[32:]
    want = brute_dyadic_max(vals)
    assert [Fraction(float(x)) for x in got] == want


def test_dyadic_comparison_with_hl():
    # every dyadic subinterval containing x sits inside a ball of radius its side around x
    spec = GridSpec(1, 2, 32)
    rng = np.random.default_rng(5)
    v = np.zeros(spec.shape)
    v[64:96] = rng.integers(0, 9, 32)
    f = SampledFunction(spec, v)
    D = dyadic_max(f).values
    M = hl_max(f, RadiusSet.dense(spec)).values
    assert np.all(D <= 2 * M + 1e-12)


@pytest.mark.parametrize("profile", ["box", "tent", "bump"])
@pytest.mark.parametrize("dim", [1, 2])
def test_kernel_weights_have_unit_mass(profile, dim):
    k = BumpKernel(profile, dim)
    w = k.weights(1 / 16, 0.7)
    assert np.all(w >= 0)
    assert w.sum() == pytest.approx(1.0, abs=1e-10)
    assert k.max_value == pytest.approx(float(np.max(k.density(np.linspace(0, 1, 101)))))


def test_bump_density_integrates_to_one():
    from scipy import integrate
    k = BumpKernel("bump", 1)
    val, _ = integrate.quad(lambda r: float(k.density(r)), -1, 1)
    assert val == pytest.approx(1.0, abs=1e-9)


def test_tent_convolution_at_origin():
    spec = GridSpec(1, 4, 32)
    f = indicator(spec, -0.5, 0.5)
    tent = BumpKernel("tent", 1)
    conv = _convolve_1d(f.values, tent, spec.h, 1.0)
    # the center cell sits at h/2; the tent mass within 1/2 of that point
    x = spec.h / 2
    exact = 1 - 0.5 * (0.5 - x) ** 2 - 0.5 * (0.5 + x) ** 2
    assert at(SampledFunction(spec, conv), x) == pytest.approx(exact, abs=1e-14)
    assert exact == pytest.approx(0.75, abs=1e-3)
    M = smooth_max(f, tent, RadiusSet((spec.h, 0.5, 1.0), False))
    assert at(M, x) >= exact - 1e-15


@pytest.mark.parametrize("profile", ["box", "tent", "bump"])
def test_convolution_routes_agree(profile):
    spec = GridSpec(1, 8, 16)
    rng = np.random.default_rng(1)
    vals = np.zeros(spec.shape)
    vals[100:140] = rng.integers(-3, 4, 40)
    k = BumpKernel(profile, 1)
    for t in (spec.h, 0.3, 2.0, 7.5):
        w = k.weights(spec.h, t)
        J = (len(w) - 1) // 2
        direct = np.convolve(vals, w, mode="full")[J: J + len(vals)]
        assert np.allclose(_convolve_1d(vals, k, spec.h, t), direct, atol=1e-13)


@settings(max_examples=20, deadline=None)
@given(functions_on(S), st.integers(-3, 3))
def test_smooth_homogeneity(f, c):
    k = BumpKernel("tent", 1)
    Mf = smooth_max(f, k).values
    assert np.allclose(smooth_max(f * c, k).values, abs(c) * Mf, atol=1e-13)
    loc = RadiusSet.quarter_octave(S, local=True, include_single_cell=False)
    glob = RadiusSet.quarter_octave(S, include_single_cell=False)
    union = RadiusSet(tuple(sorted(set(loc.radii) | set(glob.radii))), False)
    assert np.all(smooth_local_max(f, k, loc).values <= smooth_max(f, k, union).values + 1e-13)


def test_smooth_rejects_tiny_scales():
    with pytest.raises(ValueError):
        smooth_max(indicator(S, 0.0, 1.0), BumpKernel(), RadiusSet((S.h / 2,), False))


def test_atom_weighted_norm():
    spec = GridSpec(1, 32, 8)
    a = cube_indicator(spec, (1,)) - cube_indicator(spec, (0,))
    val, tail = atom_weighted_norm(a, None, 32.0)
    assert val > 0 and 0 < tail < np.inf
    wval, _ = atom_weighted_norm(a, WeightDescriptor("invlog"), 32.0)
    assert wval < val
    with pytest.raises(ValueError):
        atom_weighted_norm(cube_indicator(spec, (0,)))


def test_2d_averages():
    spec = GridSpec(2, 4, 8)
    f = cube_indicator(spec, (0, 0))
    M = hl_max(f, RadiusSet.quarter_octave(spec)).values
    assert M.max() == pytest.approx(1.0)
    loc = RadiusSet.quarter_octave(spec, local=True)
    L = local_max(f, loc).values
    union = RadiusSet(tuple(sorted(set(loc.radii) | set(RadiusSet.quarter_octave(spec).radii))))
    assert np.all(L <= hl_max(f, union).values + 1e-12) and np.all(L >= f.values - 1e-12)
    S2 = smooth_max(f, BumpKernel("bump", 2)).values
    assert np.all(S2 >= 0) and S2.max() <= 1 + 1e-12
    ones = SampledFunction(spec, np.ones(spec.shape))
    inner = hl_max(ones, RadiusSet.quarter_octave(spec, local=True)).values
    assert np.allclose(inner[8:-8, 8:-8], 1.0)
