"""Expansion of the single run seed into per-stage, per-course seeds."""

from __future__ import annotations

import numpy as np

STAGES = {"tsne": 1, "kmeans": 2}


def derive_seed(seed: int, stage: str, course: int) -> int:
    ss = np.random.SeedSequence([int(seed), STAGES[stage], int(course)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
