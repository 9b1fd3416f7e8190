"""
Two-body orbits and impulsive burns
===================================

Propagate a GEO target and a nearby attacker, apply a burn and watch the
orbit change while energy stays put between burns.
"""

import numpy as np

from proxsim.orbital import (
    BehaviorClass,
    ManeuverSpec,
    StateVector,
    OrbitRegime,
    elements_to_state,
    geo_target_elements,
    propagate_state,
    propagate_with_maneuver,
    sample_orbit,
    specific_energy,
    state_to_elements,
)

rng = np.random.default_rng(0)
times = np.arange(0.0, 8640.0, 10.0)

# %% the target sits on the x axis of a circular GEO orbit
target = geo_target_elements()
tgt_pos, tgt_vel = propagate_state(elements_to_state(target), times)
print(f"target period {target.period / 3600:.3f} h, radius {np.linalg.norm(tgt_pos[0]) / 1e3:.1f} km")

# %% a threatening attacker drawn from the GEO band
attacker = sample_orbit(OrbitRegime.GEO, BehaviorClass.THREATENING, rng)
print(f"attacker a={attacker.semi_major_axis / 1e3:.1f} km e={attacker.eccentricity:.4f}")

# %% a 6 m/s radial-plus-along-track burn halfway through the horizon
burn = ManeuverSpec(t_burn=4320.0, delta_v=np.array([3.0, 5.2, 0.0]))
pos, vel = propagate_with_maneuver(attacker, burn, times)
energy = specific_energy(pos, vel)
before, after = energy[times < burn.t_burn], energy[times >= burn.t_burn]
print(f"energy spread before burn {np.ptp(before / before[0]):.1e}, after burn {np.ptp(after / after[0]):.1e}")
print(f"energy jump at the burn {after[0] - before[-1]:.1f} J/kg")

# %% elements after the burn
post = state_to_elements(StateVector(times[-1], pos[-1], vel[-1]))
print(f"post-burn a={post.semi_major_axis / 1e3:.1f} km e={post.eccentricity:.4f}")
print(f"range to target at end {np.linalg.norm(pos[-1] - tgt_pos[-1]) / 1e3:.1f} km")
