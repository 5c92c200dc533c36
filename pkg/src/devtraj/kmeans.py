"""K-Means++ seeding, Lloyd refinement and elbow selection of k."""

from __future__ import annotations

import dataclasses
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import CurveTooShort, TooFewDistinctPoints


@dataclass(frozen=True)
class KMeansParams:
    k: int = 3
    max_iters: int = 300
    tol: float = 1e-6
    n_restarts: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol >= 0:
            raise ValueError("tol must be >= 0")
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class ClusterModel:
    k: int
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    params: KMeansParams
    inertia_trace: tuple[float, ...] = ()
    restart: int = 0


def _sq_dist_to(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centers[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def n_distinct(points: np.ndarray) -> int:
    return len(np.unique(np.asarray(points, dtype=float), axis=0))


def kmeanspp_seed(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """D^2 seeding: uniform first pick, then picks weighted by squared
    distance to the nearest seed chosen so far."""
    x = np.asarray(points, dtype=float)
    n = x.shape[0]
    distinct = n_distinct(x)
    if k > distinct:
        raise TooFewDistinctPoints(k, distinct)
    seeds = [int(rng.integers(n))]
    closest = _sq_dist_to(x, x[seeds[0]][None, :])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        cum = np.cumsum(closest)
        # searchsorted with side="right" never lands on a zero-weight point
        idx = int(np.searchsorted(cum, rng.random() * total, side="right"))
        idx = min(idx, n - 1)
        while closest[idx] == 0.0:  # guard against round-off at the upper end
            idx -= 1
        seeds.append(idx)
        np.minimum(closest, _sq_dist_to(x, x[idx][None, :])[:, 0], out=closest)
    return x[seeds].copy()


def lloyd_iterate(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """One assignment + update step.

    Ties go to the lowest centroid index. A cluster left empty is moved onto
    the point farthest from its former centroid (taken from a cluster with
    more than one member), so the step stays deterministic.
    """
    x = np.asarray(points, dtype=float)
    c = np.asarray(centroids, dtype=float)
    k = c.shape[0]
    d = _sq_dist_to(x, c)
    assignments = np.argmin(d, axis=1)
    counts = np.bincount(assignments, minlength=k)
    new = np.zeros_like(c)
    for j in range(k):
        if counts[j]:
            new[j] = x[assignments == j].mean(axis=0)
    member_d = np.sum((x - new[assignments]) ** 2, axis=1)
    inertia = float(member_d.sum())
    movable = counts[assignments] > 1
    for j in np.flatnonzero(counts == 0):
        if not movable.any():
            break
        far = np.where(movable, np.sum((x - c[j]) ** 2, axis=1), -np.inf)
        pick = int(np.argmax(far))
        new[j] = x[pick]
        movable[pick] = False
    return assignments, new, inertia


def _single_run(x: np.ndarray, params: KMeansParams, rng: np.random.Generator):
    centroids = kmeanspp_seed(x, params.k, rng)
    trace = []
    assignments = np.zeros(x.shape[0], dtype=int)
    for _ in range(params.max_iters):
        assignments, new, inertia = lloyd_iterate(x, centroids)
        trace.append(inertia)
        shift = float(np.sqrt(np.max(np.sum((new - centroids) ** 2, axis=1))))
        centroids = new
        if shift < params.tol:
            break
    if len(np.unique(assignments)) < params.k:
        # max_iters ran out right after an empty-cluster repair; settle once more.
        assignments, centroids, inertia = lloyd_iterate(x, centroids)
        trace.append(inertia)
    return assignments, centroids, trace


def fit_kmeans(points: np.ndarray, params: KMeansParams) -> ClusterModel:
    """Best of ``n_restarts`` seeded runs by inertia (ties: lowest restart)."""
    x = np.asarray(points, dtype=float)
    if x.ndim != 2:
        raise ValueError("points must be an (n, d) matrix")
    streams = np.random.SeedSequence(params.seed).spawn(params.n_restarts)
    best = None
    for r, ss in enumerate(streams):
        assignments, centroids, trace = _single_run(x, params, np.random.default_rng(ss))
        inertia = float(np.sum((x - centroids[assignments]) ** 2))
        if best is None or inertia < best.inertia:
            best = ClusterModel(
                k=params.k,
                assignments=assignments,
                centroids=centroids,
                inertia=inertia,
                params=params,
                inertia_trace=tuple(trace),
                restart=r,
            )
    return best


def inertia_curve(points: np.ndarray, k_min: int, k_max: int, params: KMeansParams) -> list[tuple[int, float]]:
    n = np.asarray(points).shape[0]
    if not 1 <= k_min < k_max <= n:
        raise ValueError(f"need 1 <= k_min < k_max <= n, got k_min={k_min}, k_max={k_max}, n={n}")
    return [
        (k, fit_kmeans(points, dataclasses.replace(params, k=k)).inertia) for k in range(k_min, k_max + 1)
    ]


def elbow_select_k(curve: Sequence[tuple[int, float]]) -> int:
    """k with the largest discrete second difference of inertia.

    Only interior points of the curve are candidates; ties keep the smallest k.
    """
    if len(curve) < 3:
        raise CurveTooShort(len(curve))
    ks = [k for k, _ in curve]
    if any(b != a + 1 for a, b in zip(ks, ks[1:])):
        raise ValueError("curve must cover consecutive k values")
    inertias = [float(i) for _, i in curve]
    best_k, best = None, -np.inf
    for idx in range(1, len(curve) - 1):
        second = inertias[idx - 1] - 2.0 * inertias[idx] + inertias[idx + 1]
        if second > best:
            best_k, best = ks[idx], second
    return best_k
