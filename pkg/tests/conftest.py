import numpy as np
import pytest

from subsaddle import Stream, table_instance


@pytest.fixture
def stream():
    return Stream.from_seed(20240817)


def cut_toy():
    """Two-element cut: f(empty)=0, f({0})=1, f({1})=1, f({0,1})=0."""
    return table_instance(2, 1, base=[0.0, 1.0, 1.0, 0.0], name="cut-toy")


def supermodular_toy():
    """Planted violation: f(empty)=f({0})=f({1})=0 but f({0,1})=1."""
    return table_instance(2, 1, base=[0.0, 0.0, 0.0, 1.0], name="supermodular-toy")


def random_point(stream, lo, hi):
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    return lo + (hi - lo) * stream.uniforms(lo.size)
