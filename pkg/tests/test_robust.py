"""Real-margin bisection and complex upper bound for delta * I blocks."""

import numpy as np
import pytest
import scipy.optimize

from flexasm import linss, robust
from flexasm.errors import NominalUnstable
from flexasm.linss import StateSpace, gain, lft_upper, spectral_abscissa, state_transform
from flexasm.multibody import ModalBodyData, mode_freq_lfr

from conftest import make_rng


def wz_system(A, B, C, D):
    """System whose only channels are the uncertainty pair."""
    return StateSpace(A, B, C, D, (("w_omega", np.shape(D)[1]),),
                      (("z_omega", np.shape(D)[0]),))


def scaled_lag(k):
    # w -> z transfer k/(s+1); smallest destabilizing delta is 1/k
    return wz_system([[-1.0]], [[1.0]], [[k]], [[0.0]])


def grid_sweep_oracle(sys, delta_max=20.0, n=4001):
    """Independent margin: dense scan + root solve on the abscissa."""
    def alpha(d):
        try:
            return spectral_abscissa(lft_upper(sys, d))
        except Exception:
            return 1.0

    best = None
    for sign in (1.0, -1.0):
        grid = np.linspace(0.0, delta_max, n)[1:]
        prev = 0.0
        for t in grid:
            if alpha(sign * t) >= -linss.STAB_TOL:
                root = scipy.optimize.brentq(
                    lambda x: alpha(sign * x) + linss.STAB_TOL, prev, t,
                    xtol=1e-13, rtol=1e-15)
                if best is None or root < abs(best):
                    best = sign * root
                break
            prev = t
    return best


def test_first_order_unit_margin():
    res = robust.mu_real_repeated(scaled_lag(1.0), delta_max=5.0)
    assert res.mu_lower == pytest.approx(1.0, rel=1e-6)
    assert res.delta_crit == pytest.approx(1.0, rel=1e-6)
    assert res.mu_upper == pytest.approx(1.0, rel=1e-6)


def test_rotational_block_has_no_real_destabilizer():
    # static rotation feedthrough: det(I - delta R) = 1 + delta^2 > 0
    R = np.array([[0.0, -1.0], [1.0, 0.0]])
    sys = gain(R, (("w_omega", 2),), (("z_omega", 2),))
    res = robust.mu_real_repeated(sys, delta_max=50.0)
    assert res.mu_lower == 0.0
    assert res.delta_crit is None
    assert res.mu_upper == pytest.approx(1.0)
    assert res.mu_lower <= res.mu_upper + 1e-9


def test_synthetic_margin_of_point_two():
    # destabilizing delta = 5: closures at +-1 stay stable, anything below
    # 5 in magnitude stays stable, i.e. a 400 percent uncertainty reserve
    sys = scaled_lag(0.2)
    res = robust.mu_real_repeated(sys, delta_max=20.0)
    assert res.mu_lower == pytest.approx(0.2, rel=1e-6)
    for d in (1.0, -1.0):
        assert spectral_abscissa(lft_upper(sys, d)) < -linss.STAB_TOL
    for d in np.linspace(-4.999, 4.999, 21):
        assert spectral_abscissa(lft_upper(sys, d)) < -linss.STAB_TOL


def test_matches_grid_sweep_on_random_plants():
    rng = make_rng(99)
    hits = 0
    for _ in range(8):
        n = int(rng.integers(2, 6))
        A = rng.standard_normal((n, n))
        A -= (np.max(np.linalg.eigvals(A).real) + 0.4) * np.eye(n)
        sys = wz_system(A, rng.standard_normal((n, 2)),
                        rng.standard_normal((2, n)), np.zeros((2, 2)))
        res = robust.mu_real_repeated(sys, delta_max=10.0)
        oracle = grid_sweep_oracle(sys, delta_max=10.0)
        if oracle is None:
            assert res.mu_lower == 0.0
        else:
            hits += 1
            assert res.mu_lower == pytest.approx(1.0 / abs(oracle), rel=1e-6)
            assert res.delta_crit == pytest.approx(oracle, rel=1e-6)
        assert res.mu_lower <= res.mu_upper + 1e-9
    assert hits >= 3  # the sample must exercise real crossings


def test_monotone_stability_inside_margin():
    rng = make_rng(7)
    sys = scaled_lag(0.5)
    res = robust.mu_real_repeated(sys, delta_max=10.0)
    assert res.mu_lower > 0
    for d in rng.uniform(-1.0, 1.0, 20) * (1.0 / res.mu_lower) * 0.999:
        assert spectral_abscissa(lft_upper(sys, d)) < -linss.STAB_TOL


def test_similarity_invariance():
    rng = make_rng(15)
    A = rng.standard_normal((4, 4))
    A -= (np.max(np.linalg.eigvals(A).real) + 0.5) * np.eye(4)
    sys = wz_system(A, rng.standard_normal((4, 2)),
                    rng.standard_normal((2, 4)), np.zeros((2, 2)))
    ref = robust.mu_real_repeated(sys, delta_max=10.0)
    for _ in range(3):
        T = rng.standard_normal((4, 4)) + 3.0 * np.eye(4)
        res = robust.mu_real_repeated(state_transform(sys, T), delta_max=10.0)
        assert abs(res.mu_lower - ref.mu_lower) <= 1e-9 * max(1.0, ref.mu_lower)


def test_nominal_unstable_rejected():
    sys = wz_system([[0.5]], [[1.0]], [[1.0]], [[0.0]])
    with pytest.raises(NominalUnstable):
        robust.mu_real_repeated(sys)


def test_mode_frequency_collapse_margin():
    # pulling the first mode frequency down by a factor (1 + r delta) makes
    # the mode marginal at delta = -1/r: the margin is exactly r
    data = ModalBodyData(
        mass=5.0, com=np.zeros(3), inertia_P=np.eye(3),
        freqs=[2.0 * np.pi * 1.285], dampings=[0.01],
        L_P=np.array([[0.5, 0.1, 0.0, 0.2, 0.0, 0.0]]), name="one_mode")
    lfr = mode_freq_lfr(data, 0, 0.2)
    res = robust.mu_real_repeated(lfr, delta_max=20.0)
    assert res.delta_crit == pytest.approx(-5.0, rel=1e-6)
    assert res.mu_lower == pytest.approx(0.2, rel=1e-6)
    oracle = grid_sweep_oracle(lfr, delta_max=20.0)
    assert res.mu_lower == pytest.approx(1.0 / abs(oracle), rel=1e-6)
    assert res.mu_lower <= res.mu_upper + 1e-9
