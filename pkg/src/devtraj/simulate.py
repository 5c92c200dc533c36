"""Synthetic longitudinal panels with known ground truth.

Each child carries a latent tier per course. The first course's tiers are
allocated from the configured shares; later tiers follow a per-transition
Markov kernel. Scores are the tier centroid plus isotropic Gaussian noise,
clipped to [0, 100]. All randomness comes from ``config.seed`` through
fixed, named streams so a config always yields the same panel.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import reference
from .dataset import MAX_COURSE, MIN_COURSE, N_TASKS, Cohort, SessionRecord
from .errors import ConfigError, LengthMismatch
from .longitudinal import tier_correspondence

_STREAM_INIT = 1
_STREAM_KERNEL = 2
_STREAM_DROPOUT = 3
_STREAM_SCORES = 4

DEFAULT_STABILITY_PCT = 80.0

Transition = tuple[int, int]


def _parse_transition(key) -> Transition:
    if isinstance(key, tuple):
        return int(key[0]), int(key[1])
    a, _, b = str(key).partition("-")
    try:
        return int(a), int(b)
    except ValueError:
        raise ConfigError(f"kernel key {key!r} is not of the form 'FROM-TO'") from None


def kernel_from_stability(
    stability_pct: Sequence[float | None],
    k_from: int,
    k_to: int,
    improving: float = 1.0,
    declining: float = 1.0,
) -> np.ndarray:
    """Complete per-tier stability percentages into a full tier kernel.

    The stay probability goes to the corresponding destination tier; the
    rest is split between the adjacent tiers above and below in the ratio
    ``improving:declining``, or evenly when that ratio is undefined for the
    sides that exist. Tiers without a value use the mean of the
    available ones.
    """
    known = [s for s in stability_pct[:k_from] if s is not None]
    fallback = float(np.mean(known)) if known else DEFAULT_STABILITY_PCT
    kernel = np.zeros((k_from, k_to))
    for i in range(k_from):
        s = stability_pct[i] if i < len(stability_pct) and stability_pct[i] is not None else fallback
        stay = s / 100.0
        e = tier_correspondence(k_from, k_to, i)
        kernel[i, e] = stay
        rest = 1.0 - stay
        sides = []
        if e + 1 < k_to:
            sides.append((e + 1, improving))
        if e - 1 >= 0:
            sides.append((e - 1, declining))
        if not sides:
            kernel[i, e] += rest
            continue
        weight = sum(w for _, w in sides)
        for j, w in sides:
            kernel[i, j] += rest * (w / weight if weight > 0 else 1.0 / len(sides))
    return kernel


@dataclass
class SimConfig:
    courses: list[int]
    centroids: dict[int, list[tuple[float, ...]]]
    shares: dict[int, list[float]]
    noise_sigma: float
    kernel: dict[Transition, np.ndarray]
    n_children: int
    dropout_prob: float
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def k(self, course: int) -> int:
        return len(self.centroids[course])

    def transitions(self) -> list[Transition]:
        return list(zip(self.courses, self.courses[1:]))

    def validate(self) -> None:
        if not self.courses:
            raise ConfigError("courses must be non-empty")
        if any(b <= a for a, b in zip(self.courses, self.courses[1:])):
            raise ConfigError("courses must be strictly increasing")
        for c in self.courses:
            if not MIN_COURSE <= c <= MAX_COURSE:
                raise ConfigError(f"course {c} outside {MIN_COURSE}..{MAX_COURSE}")
            if c not in self.centroids:
                raise ConfigError(f"course {c}: no centroids")
            if c not in self.shares:
                raise ConfigError(f"course {c}: no shares")
            cents = self.centroids[c]
            if not cents:
                raise ConfigError(f"course {c}: needs at least one centroid")
            for v in cents:
                if len(v) != N_TASKS or not all(0.0 <= q <= 100.0 for q in v):
                    raise ConfigError(f"course {c}: centroids must be {N_TASKS} values in [0, 100]")
            sh = self.shares[c]
            if len(sh) != len(cents):
                raise ConfigError(f"course {c}: {len(sh)} shares for {len(cents)} centroids")
            if any(s < 0 for s in sh) or not math.isclose(sum(sh), 1.0, abs_tol=1e-6):
                raise ConfigError(f"course {c}: shares must be non-negative and sum to 1 (got {sum(sh):.6g})")
        for a, b in self.transitions():
            if (a, b) not in self.kernel:
                raise ConfigError(f"transition {a}-{b}: no kernel")
            kern = np.asarray(self.kernel[(a, b)], dtype=float)
            if kern.shape != (self.k(a), self.k(b)):
                raise ConfigError(f"transition {a}-{b}: kernel shape {kern.shape}, expected {(self.k(a), self.k(b))}")
            if np.any(kern < 0) or not np.allclose(kern.sum(axis=1), 1.0, rtol=0, atol=1e-9):
                raise ConfigError(f"transition {a}-{b}: kernel rows must be non-negative and sum to 1")
        if not (self.noise_sigma >= 0 and math.isfinite(self.noise_sigma)):
            raise ConfigError("noise_sigma must be a finite non-negative number")
        if self.n_children < 1:
            raise ConfigError("n_children must be >= 1")
        if not 0.0 <= self.dropout_prob < 1.0:
            raise ConfigError("dropout_prob must lie in [0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_dict(cls, data: Mapping) -> SimConfig:
        """Build from a JSON-style mapping; missing fields and courses take defaults.

        Course keys may be strings (``"4"``); kernel keys are ``"FROM-TO"``.
        """
        if not isinstance(data, Mapping):
            raise ConfigError("config must be a JSON object")
        known = {"courses", "centroids", "shares", "noise_sigma", "kernel", "n_children", "dropout_prob", "seed"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            courses = [int(c) for c in data.get("courses", sorted(reference.CLUSTER_MEANS))]
            # per-course entries override the reference defaults individually
            centroids = {c: list(reference.CLUSTER_MEANS[c]) for c in courses if c in reference.CLUSTER_MEANS}
            centroids.update(
                {int(c): [tuple(float(q) for q in v) for v in vs] for c, vs in data.get("centroids", {}).items()}
            )
            shares = {c: default_shares(c) for c in courses if c in reference.CLUSTER_SHARES_PCT}
            shares.update({int(c): [float(x) for x in v] for c, v in data.get("shares", {}).items()})
            kernel = {
                (a, b): default_kernel(a, b, len(centroids[a]), len(centroids[b]))
                for a, b in zip(courses, courses[1:])
                if a in centroids and b in centroids
            }
            kernel.update(
                {_parse_transition(key): np.asarray(v, dtype=float) for key, v in data.get("kernel", {}).items()}
            )
            return cls(
                courses=courses,
                centroids=centroids,
                shares=shares,
                noise_sigma=float(data.get("noise_sigma", 3.0)),
                kernel=kernel,
                n_children=int(data.get("n_children", 200)),
                dropout_prob=float(data.get("dropout_prob", 0.3)),
                seed=int(data.get("seed", 0)),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid config: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "courses": list(self.courses),
            "centroids": {str(c): [list(v) for v in self.centroids[c]] for c in self.courses},
            "shares": {str(c): list(self.shares[c]) for c in self.courses},
            "noise_sigma": self.noise_sigma,
            "kernel": {f"{a}-{b}": np.asarray(self.kernel[(a, b)]).tolist() for a, b in self.transitions()},
            "n_children": self.n_children,
            "dropout_prob": self.dropout_prob,
            "seed": self.seed,
        }


def default_shares(course: int) -> list[float]:
    pct = reference.CLUSTER_SHARES_PCT[course]
    total = sum(pct)
    return [p / total for p in pct]


def default_kernel(course_from: int, course_to: int, k_from: int, k_to: int) -> np.ndarray:
    stability = reference.STABILITY_PCT.get((course_from, course_to), ())
    improving, declining = 1.0, 1.0
    if (course_from, course_to) in reference.MOBILITY_PCT:
        _, improving, declining = reference.MOBILITY_PCT[(course_from, course_to)]
    return kernel_from_stability(stability, k_from, k_to, improving, declining)


def default_config(**overrides) -> SimConfig:
    return SimConfig.from_dict(overrides)


@dataclass(frozen=True)
class GroundTruth:
    child_ids: tuple[str, ...]
    courses: tuple[int, ...]
    tiers: dict[int, np.ndarray] = field(default_factory=dict)
    present: dict[int, np.ndarray] = field(default_factory=dict)

    def present_tiers(self, course: int) -> dict[str, int]:
        """child_id -> latent tier for children measured in ``course``."""
        mask = self.present[course]
        return {cid: int(t) for cid, t, m in zip(self.child_ids, self.tiers[course], mask) if m}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["child_id", "course", "tier", "present"])
        for c in self.courses:
            for cid, t, m in zip(self.child_ids, self.tiers[c], self.present[c]):
                writer.writerow([cid, c, int(t), int(bool(m))])
        return buf.getvalue()


def _allocate(shares: Sequence[float], n: int) -> np.ndarray:
    """Largest-remainder integer counts for ``n`` items."""
    exact = np.asarray(shares, dtype=float) * n
    counts = np.floor(exact).astype(int)
    short = n - counts.sum()
    # stable sort keeps ties in tier order
    order = np.argsort(-(exact - counts), kind="stable")
    counts[order[:short]] += 1
    return counts


def child_ids(n: int) -> tuple[str, ...]:
    width = max(4, len(str(n - 1)))
    return tuple(f"S{i:0{width}d}" for i in range(n))


def evolve_tiers(config: SimConfig) -> GroundTruth:
    n = config.n_children
    first = config.courses[0]
    counts = _allocate(config.shares[first], n)
    initial = np.repeat(np.arange(len(counts)), counts)
    tiers = {first: np.random.default_rng([config.seed, _STREAM_INIT]).permutation(initial)}
    for a, b in config.transitions():
        rng = np.random.default_rng([config.seed, _STREAM_KERNEL, a])
        cum = np.cumsum(np.asarray(config.kernel[(a, b)], dtype=float), axis=1)
        u = rng.random(n)
        nxt = np.sum(cum[tiers[a]] <= u[:, None], axis=1)
        tiers[b] = np.minimum(nxt, config.k(b) - 1)
    drop = np.random.default_rng([config.seed, _STREAM_DROPOUT]).random((n, len(config.courses)))
    present = {c: drop[:, idx] >= config.dropout_prob for idx, c in enumerate(config.courses)}
    return GroundTruth(child_ids(n), tuple(config.courses), tiers, present)


def sample_cohort(config: SimConfig, course: int, tiers: Mapping[str, int]) -> Cohort:
    """Draw scores for the children in ``tiers`` (child_id -> tier), in order."""
    rng = np.random.default_rng([config.seed, _STREAM_SCORES, course])
    cents = np.asarray(config.centroids[course], dtype=float)
    ids = list(tiers)
    labels = np.array([tiers[c] for c in ids], dtype=int)
    noise = rng.normal(0.0, 1.0, size=(len(ids), N_TASKS)) * config.noise_sigma
    scores = np.clip(cents[labels] + noise, 0.0, 100.0) if len(ids) else np.zeros((0, N_TASKS))
    records = tuple(
        SessionRecord(cid, course, tuple(float(v) for v in row)) for cid, row in zip(ids, scores)
    )
    return Cohort(course, records)


def simulate_panel(config: SimConfig) -> tuple[list[SessionRecord], GroundTruth]:
    truth = evolve_tiers(config)
    records: list[SessionRecord] = []
    for c in config.courses:
        records.extend(sample_cohort(config, c, truth.present_tiers(c)).records)
    return records, truth


def adjusted_rand_index(a: Sequence[int], b: Sequence[int]) -> float:
    """Adjusted Rand index from the pair-counting contingency table."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise LengthMismatch(f"partitions have lengths {a.size} and {b.size}")
    n = a.size
    if n < 2:
        return 1.0
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)

    def pairs(x):
        x = np.asarray(x, dtype=np.int64)
        return float(np.sum(x * (x - 1) // 2))

    index = pairs(table)
    rows = pairs(table.sum(axis=1))
    cols = pairs(table.sum(axis=0))
    expected = rows * cols / (n * (n - 1) / 2)
    max_index = 0.5 * (rows + cols)
    if max_index == expected:
        return 1.0
    return (index - expected) / (max_index - expected)
