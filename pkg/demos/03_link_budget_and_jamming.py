"""
Link budget under bursty jamming
================================

Compute received powers, run a two-state burst jammer and look at what the
receiver reports with and without estimation noise.
"""

import numpy as np

from proxsim.rflink import (
    BurstParams,
    LinkConfig,
    apply_estimation_noise,
    fspl_db,
    link_metrics,
    received_power,
    sample_jammer_activity,
    segment_lengths,
)

cfg = LinkConfig().without_jitter()
rng = np.random.default_rng(2)

# %% path loss and the receive-antenna pattern
print(f"FSPL at 40000 km, 14.25 GHz: {fspl_db(40_000e3, 14.25e9):.3f} dB")
for deg in (0.0, 0.5, 1.0, 5.0):
    print(f"jammer 1000 km away, {deg:3.1f} deg off boresight: "
          f"{received_power(1e6, np.radians(deg), cfg, 'jammer', eirp_dbw=80.0):.1f} dBW")

# %% burst jammers for the three behaviour classes
for name, (p_on, p_off) in {"benign": (0.05, 0.8), "covert": (0.15, 0.6), "threatening": (0.5, 0.15)}.items():
    params = BurstParams(p_on, p_off)
    state = sample_jammer_activity(params, 100_000, rng)
    lengths, values = segment_lengths(state)
    print(f"{name:12s} duty {state.mean():.3f} (stationary {params.duty_cycle:.3f}), "
          f"mean burst {lengths[values == 1].mean():.1f} steps")

# %% what the receiver sees as a jammer switches on and off
state = sample_jammer_activity(BurstParams(0.5, 0.5), 20, rng)
p_sig = np.full(20, received_power(35_800e3, 0.0, cfg))
# a weak jammer 3000 km away, in the receive sidelobes
p_jam = np.where(state == 1, received_power(3e6, np.radians(3.0), cfg, "jammer", eirp_dbw=70.0), -np.inf)
clean = link_metrics(p_sig, p_jam, cfg)
noisy = apply_estimation_noise(clean, 1.0, cfg, rng)
for k in range(8):
    print(f"jam={state[k]} SJNR={clean.sjnr_db[k]:7.2f} dB  throughput={clean.throughput_mbps[k]:6.2f} -> "
          f"{noisy.throughput_mbps[k]:6.2f} Mbps  JSR={noisy.jsr_db[k]:7.2f} dB")
