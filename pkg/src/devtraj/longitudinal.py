"""Year-over-year tier movement: transition matrices, mobility, stability.

Tiers are compared by rank, not by raw cluster index. When consecutive
years have different cluster counts, a source rank is mapped onto the
destination scale proportionally (endpoints to endpoints) before deciding
whether a child stayed, improved or declined.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .dataset import AlignedPair
from .errors import ChildMissingAssignment, EmptyPair
from .kmeans import ClusterModel
from .rounding import round_half_up


class Movement(enum.Enum):
    STABLE = "stable"
    IMPROVING = "improving"
    DECLINING = "declining"


@dataclass(frozen=True)
class TransitionMatrix:
    course_from: int
    course_to: int
    k_from: int
    k_to: int
    counts: np.ndarray
    probabilities: np.ndarray
    empty_rows: tuple[int, ...] = ()

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class MobilitySummary:
    course_from: int
    course_to: int
    stable_pct: float
    improving_pct: float
    declining_pct: float


@dataclass(frozen=True)
class StabilityTable:
    course_from: int
    course_to: int
    per_tier: dict[int, float | None] = field(default_factory=dict)


def tier_correspondence(k_from: int, k_to: int, rank_from: int) -> int:
    if not 0 <= rank_from < k_from:
        raise ValueError(f"rank {rank_from} outside 0..{k_from - 1}")
    if k_from == 1 or k_to == 1:
        return 0
    return math.floor(rank_from * (k_to - 1) / (k_from - 1) + 0.5)


def classify_transition(rank_from: int, k_from: int, rank_to: int, k_to: int) -> Movement:
    if not 0 <= rank_to < k_to:
        raise ValueError(f"rank {rank_to} outside 0..{k_to - 1}")
    expected = tier_correspondence(k_from, k_to, rank_from)
    if rank_to == expected:
        return Movement.STABLE
    return Movement.IMPROVING if rank_to > expected else Movement.DECLINING


def tier_assignment(child_ids: Sequence[str], model: ClusterModel, ranks: Sequence[int]) -> dict[str, int]:
    """child_id -> tier rank, given cluster index -> rank lookup ``ranks``."""
    return {cid: int(ranks[int(a)]) for cid, a in zip(child_ids, model.assignments)}


def build_transition_matrix(
    pair: AlignedPair,
    tiers_from: Mapping[str, int],
    tiers_to: Mapping[str, int],
    k_from: int,
    k_to: int,
) -> TransitionMatrix:
    """Count aligned children by (source tier, destination tier)."""
    return transition_matrix_from_tiers(
        pair.course_from, pair.course_to, pair.child_ids, tiers_from, tiers_to, k_from, k_to
    )


def transition_matrix_from_tiers(
    course_from: int,
    course_to: int,
    child_ids: Sequence[str],
    tiers_from: Mapping[str, int],
    tiers_to: Mapping[str, int],
    k_from: int,
    k_to: int,
) -> TransitionMatrix:
    counts = np.zeros((k_from, k_to), dtype=int)
    for child_id in child_ids:
        if child_id not in tiers_from:
            raise ChildMissingAssignment(child_id, course_from)
        if child_id not in tiers_to:
            raise ChildMissingAssignment(child_id, course_to)
        counts[tiers_from[child_id], tiers_to[child_id]] += 1
    row_sums = counts.sum(axis=1)
    probabilities = np.zeros((k_from, k_to))
    nonzero = row_sums > 0
    probabilities[nonzero] = counts[nonzero] / row_sums[nonzero, None]
    return TransitionMatrix(
        course_from=course_from,
        course_to=course_to,
        k_from=k_from,
        k_to=k_to,
        counts=counts,
        probabilities=probabilities,
        empty_rows=tuple(int(i) for i in np.flatnonzero(~nonzero)),
    )


def movement_counts(matrix: TransitionMatrix) -> dict[Movement, int]:
    tally = {m: 0 for m in Movement}
    for i in range(matrix.k_from):
        for j in range(matrix.k_to):
            tally[classify_transition(i, matrix.k_from, j, matrix.k_to)] += int(matrix.counts[i, j])
    return tally


def mobility_summary(matrix: TransitionMatrix) -> MobilitySummary:
    total = matrix.total
    if total == 0:
        raise EmptyPair(matrix.course_from, matrix.course_to)
    tally = movement_counts(matrix)

    def pct(m):
        return round_half_up(100.0 * tally[m] / total, 1)

    return MobilitySummary(
        matrix.course_from,
        matrix.course_to,
        stable_pct=pct(Movement.STABLE),
        improving_pct=pct(Movement.IMPROVING),
        declining_pct=pct(Movement.DECLINING),
    )


def tier_stability_rates(matrix: TransitionMatrix) -> StabilityTable:
    per_tier: dict[int, float | None] = {}
    for i in range(matrix.k_from):
        row_total = int(matrix.counts[i].sum())
        if row_total == 0:
            per_tier[i] = None
            continue
        stay = int(matrix.counts[i, tier_correspondence(matrix.k_from, matrix.k_to, i)])
        per_tier[i] = round_half_up(100.0 * stay / row_total, 1)
    return StabilityTable(matrix.course_from, matrix.course_to, per_tier)


def consecutive_transitions(
    tiers_by_course: Mapping[int, Mapping[str, int]],
    k_by_course: Mapping[int, int],
) -> list[TransitionMatrix]:
    """Transition matrices for every (c, c + 1) present in ``tiers_by_course``.

    Children are aligned on id in the earlier year's order; those missing
    either year are left out.
    """
    out = []
    for c in sorted(tiers_by_course):
        if c + 1 not in tiers_by_course:
            continue
        src, dst = tiers_by_course[c], tiers_by_course[c + 1]
        shared = [cid for cid in src if cid in dst]
        out.append(transition_matrix_from_tiers(c, c + 1, shared, src, dst, k_by_course[c], k_by_course[c + 1]))
    return out
