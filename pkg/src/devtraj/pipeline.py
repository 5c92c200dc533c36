"""End-to-end analysis of one panel: embed, cluster, profile, track."""

from __future__ import annotations

import dataclasses
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .dataset import Cohort, SessionRecord, build_cohorts
from .errors import CohortTooSmall, EmptyPair
from .kmeans import ClusterModel, KMeansParams, elbow_select_k, fit_kmeans, inertia_curve, n_distinct
from .longitudinal import (
    MobilitySummary,
    StabilityTable,
    TransitionMatrix,
    consecutive_transitions,
    mobility_summary,
    tier_assignment,
    tier_stability_rates,
)
from .profiles import ClusterProfile, centroid_q_profiles, label_clusters_by_performance, tier_ranks
from .seeding import derive_seed
from .tsne import MIN_COHORT, Embedding2D, TsneParams, run_tsne

log = logging.getLogger(__name__)

CLUSTER_SPACES = ("embedding", "raw")


@dataclass(frozen=True)
class AnalysisOptions:
    seed: int = 0
    perplexity: float | None = None
    k: int | None = None
    k_max: int = 6
    cluster_space: str = "embedding"
    tsne: TsneParams = TsneParams()
    kmeans: KMeansParams = KMeansParams()

    def __post_init__(self):
        if self.cluster_space not in CLUSTER_SPACES:
            raise ValueError(f"cluster_space must be one of {CLUSTER_SPACES}")
        if self.k is not None and self.k < 1:
            raise ValueError("--k must be >= 1")
        if self.k_max < 3:
            raise ValueError("--k-max must be >= 3 for elbow selection")


@dataclass(frozen=True)
class CourseResult:
    course: int
    cohort: Cohort
    embedding: Embedding2D
    curve: list[tuple[int, float]]
    k: int
    model: ClusterModel
    profiles: list[ClusterProfile]

    @property
    def ranks(self) -> list[int]:
        return tier_ranks(self.profiles)

    @property
    def tiers(self) -> dict[str, int]:
        return tier_assignment(self.cohort.child_ids, self.model, self.ranks)

    @property
    def point_tiers(self) -> list[int]:
        ranks = self.ranks
        return [ranks[int(a)] for a in self.model.assignments]


@dataclass(frozen=True)
class PanelResult:
    courses: dict[int, CourseResult]
    transitions: list[TransitionMatrix]
    mobility: list[MobilitySummary]
    stability: list[StabilityTable]
    skipped_transitions: list[tuple[int, int]]


def check_cohorts(cohorts: Mapping[int, Cohort]) -> None:
    for course, cohort in cohorts.items():
        if len(cohort) < MIN_COHORT:
            raise CohortTooSmall(len(cohort), MIN_COHORT, course)


def analyze_course(cohort: Cohort, options: AnalysisOptions) -> CourseResult:
    tsne_params = dataclasses.replace(
        options.tsne, perplexity=options.perplexity, seed=derive_seed(options.seed, "tsne", cohort.course)
    )
    embedding = run_tsne(cohort, tsne_params)
    points = embedding.coords if options.cluster_space == "embedding" else cohort.scores()

    base = dataclasses.replace(options.kmeans, seed=derive_seed(options.seed, "kmeans", cohort.course))
    k_max = min(options.k_max, n_distinct(points))
    curve = inertia_curve(points, 1, k_max, base) if k_max >= 2 else []
    k = options.k if options.k is not None else elbow_select_k(curve)
    model = fit_kmeans(points, dataclasses.replace(base, k=k))
    profiles = label_clusters_by_performance(centroid_q_profiles(cohort, model))
    log.info("course %d: n=%d, k=%d, inertia=%.4g", cohort.course, len(cohort), k, model.inertia)
    return CourseResult(cohort.course, cohort, embedding, curve, k, model, profiles)


def summarize_transitions(
    matrices: Sequence[TransitionMatrix],
) -> tuple[list[MobilitySummary], list[StabilityTable], list[tuple[int, int]]]:
    mobility, stability, skipped = [], [], []
    for m in matrices:
        try:
            mobility.append(mobility_summary(m))
        except EmptyPair:
            log.warning("no children measured in both course %d and %d", m.course_from, m.course_to)
            skipped.append((m.course_from, m.course_to))
            continue
        stability.append(tier_stability_rates(m))
    return mobility, stability, skipped


def analyze_panel(records: Sequence[SessionRecord], options: AnalysisOptions) -> PanelResult:
    cohorts = build_cohorts(records)
    check_cohorts(cohorts)
    results = {course: analyze_course(cohort, options) for course, cohort in cohorts.items()}
    matrices = consecutive_transitions(
        {c: r.tiers for c, r in results.items()}, {c: r.k for c, r in results.items()}
    )
    mobility, stability, skipped = summarize_transitions(matrices)
    return PanelResult(results, matrices, mobility, stability, skipped)


def recovered_means(result: CourseResult) -> np.ndarray:
    """Tier-ordered mean score vectors, shape (k, 6)."""
    by_rank = sorted(result.profiles, key=lambda p: p.tier.rank)
    return np.array([p.mean_q for p in by_rank])
