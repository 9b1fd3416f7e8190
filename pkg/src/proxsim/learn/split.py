"""Scenario-grouped, class-stratified train/test split."""

from __future__ import annotations

import numpy as np


class SplitError(ValueError):
    pass


def grouped_split(groups, y, test_fraction: float = 0.3, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Boolean (train, test) row masks with whole scenarios on one side.

    Within each class, ``round(test_fraction * n_c)`` scenarios (clamped to
    [1, n_c - 1]) go to the test side.
    """
    if not 0.0 < test_fraction < 1.0:
        raise SplitError("test_fraction must lie in (0, 1)")
    groups = np.asarray(groups)
    y = np.asarray(y)
    uniq, first = np.unique(groups, return_index=True)
    group_label = y[first]
    # every row of a scenario must share its label
    _, inv = np.unique(groups, return_inverse=True)
    if np.any(group_label[inv] != y):
        raise SplitError("a scenario carries more than one label")
    rng = np.random.default_rng(seed)
    test_groups = []
    for c in np.unique(group_label):
        members = uniq[group_label == c]
        if members.size < 2:
            raise SplitError(f"class {c} has {members.size} scenario(s); need at least 2 to split")
        n_test = int(np.clip(round(test_fraction * members.size), 1, members.size - 1))
        test_groups.append(rng.permutation(members)[:n_test])
    test = np.isin(groups, np.concatenate(test_groups))
    return ~test, test
