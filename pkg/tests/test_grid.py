import numpy as np
import pytest
from hypothesis import given, settings

from hardylab import grid
from hardylab.grid import (DomainError, GridSpec, SampledFunction, TailDescriptor, add, cube_indicator,
                           cube_indices, from_callable, indicator, integral, norm1, scale_values, translate, zeros)

from conftest import functions_on

S1 = GridSpec(1, 4, 8)
S2 = GridSpec(2, 3, 4)


@pytest.mark.parametrize("m", [1, 2, 16, 64])
def test_unit_cube_integral_is_one(m):
    assert integral(cube_indicator(GridSpec(1, 4, m), (0,))) == 1.0
    assert integral(cube_indicator(GridSpec(2, 2, m), (1, -2))) == 1.0


def test_zero_integral():
    assert integral(zeros(S2)) == 0.0


def test_odd_function_integrates_to_zero():
    spec = GridSpec(1, 1, 64)
    f = from_callable(spec, lambda x: x)
    assert integral(f) == 0.0


def test_gridspec_validation_and_parsing():
    for bad in [(3, 4, 8), (1, 0, 8), (1, 4, 6), (1, 4, 0)]:
        with pytest.raises(ValueError):
            GridSpec(*bad)
    s = GridSpec.parse("dim=2,R=16,m=32")
    assert s == GridSpec(2, 16, 32)
    assert GridSpec.from_header(s.header()) == s
    assert GridSpec.from_dict(s.to_dict()) == s
    assert s.shape == (1024, 1024)
    assert s.h == 1 / 32


def test_cube_indices_tile_the_box():
    keys = list(cube_indices(S2))
    assert len(keys) == (2 * S2.box_radius) ** 2
    total = sum(cube_indicator(S2, k).values for k in keys)
    assert np.all(total == 1.0)


def test_translate_examples():
    q0 = cube_indicator(S1, (0,))
    assert np.array_equal(translate(q0, (3,)).values, cube_indicator(S1, (3,)).values)
    assert np.array_equal(translate(q0, 0).values, q0.values)
    with pytest.raises(DomainError):
        translate(q0, (4,))


@settings(max_examples=40, deadline=None)
@given(functions_on(S1))
def test_translate_preserves_integral(f):
    g = zeros(S1).values.copy()
    g[S1.cells_per_axis // 4: 3 * S1.cells_per_axis // 4] = f.values[: S1.cells_per_axis // 2]
    f = SampledFunction(S1, g)
    for k in (-1, 1):
        assert integral(translate(f, (k,))) == integral(f)


@settings(max_examples=40, deadline=None)
@given(functions_on(S2), functions_on(S2))
def test_linearity(f, g):
    assert np.all(scale_values(f, 0).values == 0)
    assert np.all(add(f, -f).values == 0)
    assert integral(add(f, g)) == integral(f) + integral(g)
    assert norm1(f) >= abs(integral(f))


def test_indicator_checks_alignment():
    f = indicator(S1, -1.0, 1.0)
    assert integral(f) == 2.0
    with pytest.raises(ValueError):
        indicator(S1, -1.0 / 3, 1.0)


def test_values_are_validated():
    with pytest.raises(ValueError):
        SampledFunction(S1, np.zeros(3))
    with pytest.raises(ValueError):
        SampledFunction(S1, np.full(S1.shape, np.nan))


def test_tail_descriptor_matches_boundary():
    spec = GridSpec(1, 8, 4)
    tail = TailDescriptor(1.0, 1.5, 0.0, 1.0)
    f = from_callable(spec, lambda x: tail.value(np.abs(x)), tail)
    assert f.tail is tail
    with pytest.raises(ValueError):
        SampledFunction(spec, f.values * 2, tail)
    v = np.array([1.5, 10.0, 300.0])
    for k in (1, 2):
        direct = tail.log_value_v(v) + k * v
        assert np.allclose(tail.log_scaled_v(v, k), direct, rtol=1e-12)


def test_io_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    f = SampledFunction(S2, rng.standard_normal(S2.shape))
    p = tmp_path / "f.csv"
    grid.to_csv(f, p)
    assert np.array_equal(grid.from_csv(p).values, f.values)
    b = tmp_path / "f.bin"
    grid.to_binary(f, b)
    g = grid.from_binary(b)
    assert g.spec == S2 and np.array_equal(g.values, f.values)
