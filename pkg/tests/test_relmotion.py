import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose
from scipy.spatial.transform import Rotation

from proxsim.orbital import A_GEO, MU_EARTH, R_EARTH, OrbitalElements, StateVector, elements_to_state, propagate_state
from proxsim.relmotion import (
    SPEED_OF_LIGHT,
    FrameError,
    boresight_angle,
    central_diff,
    curvature,
    doppler_shift,
    earth_visible,
    kinematic_series,
    relative_state,
    rtn_axes,
    rtn_basis,
    tca_features,
)

# components are zero or at least 1e-6 in magnitude; smaller values drive
# squared norms into the subnormal range, which no physical state reaches
component = st.one_of(st.just(0.0), st.floats(1e-6, 1e8), st.floats(-1e8, -1e-6))
vec = arrays(np.float64, 3, elements=component)


def test_rtn_axis_aligned():
    b = rtn_basis(StateVector(0.0, [7e6, 0, 0], [0, 7500, 0]))
    assert_allclose(b.matrix, np.eye(3))


def test_rtn_prograde_normal():
    # h = r x v = (0, 7e6, 0) x (-7500, 0, 0) points along +z
    b = rtn_basis(StateVector(0.0, [0, 7e6, 0], [-7500, 0, 0]))
    assert_allclose(b.r_hat, [0, 1, 0])
    assert_allclose(b.t_hat, [-1, 0, 0])
    assert_allclose(b.n_hat, [0, 0, 1])


@given(vec, vec)
def test_rtn_orthonormal_right_handed(r, v):
    rn = np.linalg.norm(r)
    assume(rn > 1.0)
    assume(np.linalg.norm(v - np.dot(v, r) / rn**2 * r) > 1e-3)
    m = np.vstack(rtn_axes(r, v))
    assert np.max(np.abs(m @ m.T - np.eye(3))) < 1e-12
    assert np.linalg.det(m) == pytest.approx(1.0, abs=1e-12)


def test_rtn_degenerate():
    with pytest.raises(FrameError):
        rtn_axes([7e6, 0, 0], [10, 0, 0])
    with pytest.raises(FrameError):
        rtn_axes([0, 0, 0], [0, 1, 0])


@pytest.mark.parametrize("r_rel,v_rel,rng_,rdot", [
    ((1000, 0, 0), (10, 0, 0), 1000.0, 10.0),
    ((1000, 0, 0), (0, 5, 0), 1000.0, 0.0),
    ((3, 4, 0), (1, 1, 0), 5.0, 1.4),
])
def test_relative_state(r_rel, v_rel, rng_, rdot):
    tgt = StateVector(0.0, [7e6, 0, 0], [0, 7500, 0])
    att = StateVector(0.0, tgt.position + r_rel, tgt.velocity + v_rel)
    rs = relative_state(att, tgt)
    assert rs.range == pytest.approx(rng_)
    assert rs.range_rate == pytest.approx(rdot)
    assert_allclose(rs.rel_pos_rtn, r_rel)


def test_relative_state_errors():
    tgt = StateVector(0.0, [7e6, 0, 0], [0, 7500, 0])
    with pytest.raises(FrameError):
        relative_state(StateVector(1.0, [7e6, 1, 0], [0, 7500, 0]), tgt)
    with pytest.raises(FrameError):
        relative_state(tgt, tgt)


def test_central_diff_examples():
    assert central_diff([0, 1, 4, 9, 16], 1.0)[2] == 4.0
    assert_allclose(central_diff(np.full(7, 3.3), 0.5), 0.0)
    assert_allclose(central_diff([0, 1, 4], 1.0), [1, 2, 3])  # one-sided ends
    with pytest.raises(FrameError):
        central_diff([1, 2], 1.0)


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10), st.floats(0.01, 5))
def test_central_diff_exact_on_quadratics(c0, c1, c2, dt):
    t = np.arange(12) * dt
    d = central_diff(c0 + c1 * t + c2 * t * t, dt)
    assert_allclose(d[1:-1], (c1 + 2 * c2 * t)[1:-1], rtol=0, atol=1e-12 * max(1.0, abs(c1) + abs(c2) * t[-1]) * 100)


def test_central_diff_second_order_convergence():
    errs = []
    for dt in (1e-2, 5e-3):
        t = np.arange(0, 1 + dt / 2, dt)
        errs.append(np.max(np.abs(central_diff(t**3, dt)[1:-1] - 3 * t[1:-1] ** 2)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_curvature_examples():
    assert curvature([1, 0, 0], [0, 1, 0]) == pytest.approx(1 / (1 + 1e-12), rel=1e-15)
    assert curvature([0, 0, 0], [3, 1, 2]) == 0.0
    assert curvature([1000, 0, 0], [0, 0.02371, 0]) == pytest.approx(2.371e-8, rel=1e-9)
    assert 2.371e-8 == pytest.approx(1 / 4.2164e7, rel=1e-3)


@given(vec, vec, st.integers(0, 2**32 - 1))
def test_curvature_rotation_invariant(v, a, seed):
    assume(np.linalg.norm(v) > 1e-3)
    rot = Rotation.random(random_state=seed).as_matrix()
    k0 = curvature(v, a)
    k1 = curvature(rot @ v, rot @ a)
    # absolute floor covers rounding when v and a are (nearly) parallel
    floor = 1e-13 * np.linalg.norm(a) / np.linalg.norm(v) ** 2
    assert k1 == pytest.approx(k0, rel=1e-9, abs=floor)


@pytest.mark.parametrize("a", [R_EARTH + 500e3, A_GEO])
def test_circular_orbit_curvature(a):
    s0 = elements_to_state(OrbitalElements(a, 0.0, 0.4, 0.0, 0.0, 0.0))
    pos, vel = propagate_state(s0, np.arange(0, 200.0, 1.0))
    acc = -MU_EARTH * pos / np.linalg.norm(pos, axis=1, keepdims=True) ** 3
    assert_allclose(curvature(vel, acc), 1 / a, rtol=1e-9)
    acc_fd = np.column_stack([central_diff(vel[:, k], 1.0) for k in range(3)])
    assert_allclose(curvature(vel, acc_fd)[1:-1], 1 / a, rtol=1e-6)


def test_doppler():
    assert doppler_shift(0.0, 14.25e9) == 0.0
    lam = SPEED_OF_LIGHT / 14.25e9
    assert lam == pytest.approx(0.0210381, abs=1e-7)
    assert doppler_shift(-1000.0, 14.25e9) == pytest.approx(47532.8, abs=0.1)
    assert doppler_shift(-5.0, 1e9) > 0
    with pytest.raises(ValueError):
        doppler_shift(1.0, 0.0)


def test_tca_examples():
    r = tca_features([5, 3, 1, 2, 4])
    assert (r.i_star, r.t_tca_frac) == (2, 0.5)
    assert r.t_to_tca[0] == -0.5 and r.t_to_tca[4] == 0.5 and r.t_to_tca[2] == 0.0
    assert tca_features([1, 2, 3]).i_star == 0
    assert tca_features([2, 1, 1, 3]).i_star == 1
    with pytest.raises(FrameError):
        tca_features([1.0])


@given(arrays(np.float64, st.integers(2, 50), elements=st.floats(0, 1e6), unique=True))
def test_tca_reversal(r):
    n = r.size
    assert tca_features(r[::-1]).i_star == n - 1 - tca_features(r).i_star


def test_boresight_angle():
    rx = np.array([1.0, 2.0, 3.0])
    assert boresight_angle(rx + [5, 0, 0], rx, [1, 0, 0]) == 0.0
    assert boresight_angle(rx + [0, 5, 0], rx, [1, 0, 0]) == pytest.approx(math.pi / 2, abs=1e-15)
    d = np.array([1.0, 1.0, 0.0]) / math.sqrt(2)
    assert boresight_angle(rx + [7, 0, 0], rx, d) == pytest.approx(math.pi / 4, abs=1e-12)
    with pytest.raises(FrameError):
        boresight_angle(rx, rx, [1, 0, 0])


def test_earth_occlusion():
    assert earth_visible([A_GEO, 0, 0], [A_GEO, 1e6, 0])
    assert not earth_visible([A_GEO, 0, 0], [-A_GEO, 0, 0])
    assert earth_visible([R_EARTH + 1e6, 0, 0], [A_GEO, 0, 0])


def test_range_rate_matches_differenced_range():
    tgt = elements_to_state(OrbitalElements(A_GEO, 0, 0, 0, 0, 0))
    att = elements_to_state(OrbitalElements(R_EARTH + 800e3, 0.001, 1.0, 0.3, 0, 0))
    t = np.arange(0, 3000.0, 1.0)
    tp, tv = propagate_state(tgt, t)
    ap, av = propagate_state(att, t)
    ks = kinematic_series(t, ap, av, tp, tv, 14.25e9, -tp / np.linalg.norm(tp, axis=1, keepdims=True))
    assert_allclose(central_diff(ks.range, 1.0)[1:-1], ks.range_rate[1:-1], rtol=0, atol=2e-3)
    assert ks.v_rtn.shape == (t.size, 3)
    assert_allclose(np.linalg.norm(ks.v_rtn, axis=1), np.linalg.norm(av - tv, axis=1))
    assert_allclose(ks.doppler_hz, -ks.range_rate * 14.25e9 / SPEED_OF_LIGHT)
