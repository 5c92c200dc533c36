"""Per-cluster score profiles and ordinal performance tiers."""

from __future__ import annotations

import dataclasses
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .dataset import Cohort
from .errors import ShapeMismatch
from .kmeans import ClusterModel
from .rounding import round_half_up

_NAMES = {2: ("low", "high"), 3: ("low", "medium", "high")}


@dataclass(frozen=True)
class TierLabel:
    rank: int
    name: str


def tier_name(rank: int, k: int) -> str:
    names = _NAMES.get(k)
    return names[rank] if names else f"tier-{rank}"


@dataclass(frozen=True)
class ClusterProfile:
    cluster_index: int
    mean_q: tuple[float, ...]
    share_pct: float
    count: int
    tier: TierLabel | None = None

    @property
    def grand_mean(self) -> float:
        return float(np.mean(self.mean_q))


def centroid_q_profiles(cohort: Cohort, model: ClusterModel) -> list[ClusterProfile]:
    """Mean Q vector and population share of each cluster, by cluster index."""
    assignments = np.asarray(model.assignments)
    if assignments.shape != (len(cohort),):
        raise ShapeMismatch(f"{assignments.shape[0]} assignments for a cohort of {len(cohort)}")
    scores = cohort.scores()
    n = len(cohort)
    profiles = []
    for j in range(model.k):
        members = scores[assignments == j]
        if len(members) == 0:
            raise ValueError(f"cluster {j} has no members")
        profiles.append(
            ClusterProfile(
                cluster_index=j,
                mean_q=tuple(float(v) for v in members.mean(axis=0)),
                share_pct=round_half_up(100.0 * len(members) / n, 2),
                count=len(members),
            )
        )
    return profiles


def label_clusters_by_performance(profiles: Sequence[ClusterProfile]) -> list[ClusterProfile]:
    """Rank clusters by the unweighted mean of their six task means.

    Ties fall back to the Q1 mean, then the cluster index. The returned list
    keeps the input (cluster index) order with ``tier`` filled in.
    """
    if not profiles:
        raise ValueError("no profiles to label")
    k = len(profiles)
    order = sorted(profiles, key=lambda p: (p.grand_mean, p.mean_q[0], p.cluster_index))
    rank_of = {p.cluster_index: r for r, p in enumerate(order)}
    return [
        dataclasses.replace(p, tier=TierLabel(rank_of[p.cluster_index], tier_name(rank_of[p.cluster_index], k)))
        for p in profiles
    ]


def tier_ranks(profiles: Sequence[ClusterProfile]) -> list[int]:
    """Cluster index -> tier rank lookup as a list."""
    ranks = [0] * len(profiles)
    for p in profiles:
        if p.tier is None:
            raise ValueError("profiles are not labelled yet")
        ranks[p.cluster_index] = p.tier.rank
    return ranks
