"""
Feature views
=============

Turn raw scenario columns into the RF-only, kinematic-only and fused
feature matrices.
"""

import numpy as np

from proxsim.features import FeatureView, anomaly_flags, build_feature_matrix, rolling_stats, view_columns
from proxsim.scenario import ScenarioConfig, generate_records

# %% per-series statistics
std, grad = rolling_stats([1.0, 2.0, 3.0, 7.0, 7.0])
print("rolling std", std.round(3), "gradient", grad)
x = np.random.default_rng(3).normal(size=200)
x[150] += 8.0
print("flagged samples", np.flatnonzero(anomaly_flags(x)))

# %% three views over the same scenarios
records = list(generate_records(ScenarioConfig(n_scenarios_per_cell=2)))
for view in FeatureView:
    fm = build_feature_matrix(records, view)
    print(f"{view.value:5s} {fm.X.shape[0]} rows x {fm.X.shape[1]} columns")
print("fused-only interactions:", view_columns(FeatureView.FUSED)[-3:])
