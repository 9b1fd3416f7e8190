"""
Labelled scenarios and the on-disk dataset
==========================================

Simulate one scenario per class, then write a small sharded dataset with
its manifest.
"""

import tempfile
from pathlib import Path

import numpy as np

from proxsim.orbital import BehaviorClass, OrbitRegime
from proxsim.scenario import ScenarioConfig, generate_dataset, generate_scenario

cfg = ScenarioConfig(n_scenarios_per_cell=4)

# %% one GEO scenario per behaviour class
for k, behavior in enumerate(BehaviorClass):
    rec = generate_scenario(cfg, behavior, OrbitRegime.GEO, k)
    dv = np.linalg.norm(rec.maneuver.delta_v)
    print(f"{behavior.value:12s} rows={rec.n_rows} burn at {rec.maneuver.t_burn:.0f}s |dv|={dv:5.2f} m/s "
          f"min range={rec.kin.range.min() / 1e3:8.1f} km jam duty={rec.link.jam_state.mean():.2f}")

# %% nine CSV shards plus a manifest; the same config always writes the same bytes
with tempfile.TemporaryDirectory() as tmp:
    manifest = generate_dataset(cfg, tmp)
    print(f"{manifest['n_scenarios']} scenarios, {manifest['total_rows']} rows, status {manifest['status']}")
    print("shards:", ", ".join(sorted(p.name for p in Path(tmp).glob("*.csv"))))
    print("duty cycle by class:", {k: round(v, 3) for k, v in manifest["duty_cycle"].items()})
