from __future__ import annotations

import itertools

import numpy as np
import pytest

from devtraj.dataset import Cohort, SessionRecord


def make_cohort(scores, course=4, prefix="c") -> Cohort:
    scores = np.asarray(scores, dtype=float)
    return Cohort(course, tuple(SessionRecord(f"{prefix}{i}", course, tuple(row)) for i, row in enumerate(scores)))


def naive_sq_distances(x):
    n = len(x)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = sum((a - b) ** 2 for a, b in zip(x[i], x[j]))
    return out


def naive_q(y):
    n = len(y)
    num = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                num[i, j] = 1.0 / (1.0 + sum((a - b) ** 2 for a, b in zip(y[i], y[j])))
    return num / num.sum()


def silhouette(points, labels) -> float:
    """Mean silhouette by explicit double loop."""
    points = np.asarray(points, dtype=float)
    labels = list(labels)
    scores = []
    for i, (p, li) in enumerate(zip(points, labels)):
        dist = {}
        for j, (r, lj) in enumerate(zip(points, labels)):
            if i == j:
                continue
            dist.setdefault(lj, []).append(float(np.sqrt(np.sum((p - r) ** 2))))
        a = np.mean(dist[li]) if dist.get(li) else 0.0
        b = min(np.mean(v) for k, v in dist.items() if k != li)
        scores.append(0.0 if max(a, b) == 0 else (b - a) / max(a, b))
    return float(np.mean(scores))


def pair_counting_ari(a, b) -> float:
    """ARI straight from the definition over all unordered pairs."""
    n = len(a)
    both = only_a = only_b = 0
    for i, j in itertools.combinations(range(n), 2):
        sa, sb = a[i] == a[j], b[i] == b[j]
        both += sa and sb
        only_a += sa and not sb
        only_b += sb and not sa
    total = n * (n - 1) / 2
    pairs_a, pairs_b = both + only_a, both + only_b
    expected = pairs_a * pairs_b / total
    maximum = (pairs_a + pairs_b) / 2
    if maximum == expected:
        return 1.0
    return (both - expected) / (maximum - expected)


def central_differences(f, x, h=1e-5):
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        up, down = x.copy(), x.copy()
        up[idx] += h
        down[idx] -= h
        g[idx] = (f(up) - f(down)) / (2 * h)
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
