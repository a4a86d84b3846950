import numpy as np
from hypothesis import strategies as st

from hardylab.grid import GridSpec, SampledFunction


def dyadic_values(shape, bits=6, lo=-64, hi=64):
    """Arrays of k / 2^bits, so sums stay exact."""
    n = int(np.prod(shape))
    return st.lists(st.integers(lo, hi), min_size=n, max_size=n).map(
        lambda xs: np.asarray(xs, dtype=float).reshape(shape) / 2**bits)


def functions_on(spec: GridSpec, **kw):
    return dyadic_values(spec.shape, **kw).map(lambda v: SampledFunction(spec, v))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(mod.RESULTS, key=lambda c: int(c[1:])):
        terminalreporter.write_line(mod.RESULTS[cid])
