"""
Relative motion in the target frame
===================================

Express an attacker's motion in the target's radial / along-track / normal
frame and derive the kinematic series used as features.
"""

import numpy as np

from proxsim.orbital import (
    BehaviorClass,
    OrbitRegime,
    elements_to_state,
    geo_target_elements,
    propagate_state,
    sample_orbit,
)
from proxsim.relmotion import curvature, kinematic_series, rtn_axes

rng = np.random.default_rng(1)
times = np.arange(0.0, 8640.0, 10.0)
tgt_pos, tgt_vel = propagate_state(elements_to_state(geo_target_elements()), times)
att_pos, att_vel = propagate_state(elements_to_state(sample_orbit(OrbitRegime.GEO, BehaviorClass.COVERT, rng)), times)

# %% the frame is orthonormal and right-handed
r_hat, t_hat, n_hat = rtn_axes(tgt_pos[0], tgt_vel[0])
print("R", r_hat.round(6), "T", t_hat.round(6), "N", n_hat.round(6))

# %% kinematics seen from a receiver that points at a ground station
to_ground = -tgt_pos / np.linalg.norm(tgt_pos, axis=1, keepdims=True)
kin = kinematic_series(times, att_pos, att_vel, tgt_pos, tgt_vel, 14.25e9, to_ground)
print(f"range {kin.range.min() / 1e3:.1f} to {kin.range.max() / 1e3:.1f} km")
print(f"closest approach at t={times[kin.tca.i_star]:.0f} s, {kin.range[kin.tca.i_star] / 1e3:.1f} km")
print(f"Doppler {kin.doppler_hz.min():.0f} to {kin.doppler_hz.max():.0f} Hz")
print(f"boresight angle {np.degrees(kin.boresight_rad).min():.2f} to {np.degrees(kin.boresight_rad).max():.2f} deg")

# %% a circular orbit bends with curvature 1/r
v, a = tgt_vel[0], -3.986004418e14 * tgt_pos[0] / np.linalg.norm(tgt_pos[0]) ** 3
print(f"curvature * r = {curvature(v, a) * np.linalg.norm(tgt_pos[0]):.12f}")
