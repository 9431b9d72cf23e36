"""Shared test helpers: random stable systems and response comparison."""

import numpy as np
import pytest

from flexasm import linss


def make_rng(seed=0):
    return np.random.default_rng(seed)


def random_stable_system(rng, n=8, m=2, p=2, margin=0.2, feedthrough=True):
    """Random strictly stable system with spectral abscissa <= -margin."""
    A = rng.standard_normal((n, n))
    alpha = np.max(np.linalg.eigvals(A).real)
    A -= (alpha + margin) * np.eye(n)
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((p, n))
    D = rng.standard_normal((p, m)) if feedthrough else np.zeros((p, m))
    return linss.StateSpace(A, B, C, D, (("u", m),), (("y", p),))


def max_response_deviation(sys_a, sys_b, grid, chan_a=None, chan_b=None):
    """Max |G_a - G_b| over a grid, optionally on named channel pairs."""
    dev = 0.0
    for w in np.asarray(grid, dtype=float):
        ga = sys_a.transfer_at(1j * w)
        gb = sys_b.transfer_at(1j * w)
        if chan_a is not None:
            oa, ia = chan_a
            ga = ga[sys_a.out_slice(oa), :][:, sys_a.in_slice(ia)]
        if chan_b is not None:
            ob, ib = chan_b
            gb = gb[sys_b.out_slice(ob), :][:, sys_b.in_slice(ib)]
        dev = max(dev, float(np.max(np.abs(ga - gb))))
    return dev


@pytest.fixture
def rng():
    return make_rng(1234)
