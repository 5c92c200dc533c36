"""Reference per-course values used as simulator defaults.

Cluster mean scores and shares per course, plus the cross-course mobility
and per-cluster stability percentages of a real longitudinal cohort.
Course 3 has two clusters; see ``simulate.default_kernel`` for how the
values are combined into transition kernels.
"""

from __future__ import annotations

# course -> [(q1..q6), ...] in cluster order 0, 1, (2)
CLUSTER_MEANS: dict[int, list[tuple[float, ...]]] = {
    2: [(2.39, 6.26, 0.03, 2.34, 17.04, 29.44), (52.99, 5.07, 0.00, 3.81, 16.51, 20.42)],
    3: [(2.82, 5.86, 0.50, 2.00, 16.34, 28.04), (60.60, 14.64, 4.68, 11.88, 23.36, 36.78)],
    4: [
        (2.49, 7.37, 0.33, 2.84, 17.96, 29.66),
        (63.20, 15.77, 1.21, 8.86, 26.43, 42.90),
        (74.33, 52.65, 23.25, 44.33, 63.27, 78.00),
    ],
    5: [
        (4.93, 8.35, 0.43, 3.17, 17.41, 30.94),
        (69.92, 34.46, 6.20, 20.97, 31.24, 58.25),
        (80.62, 64.87, 32.68, 47.05, 71.94, 84.97),
    ],
    6: [
        (53.03, 18.98, 3.23, 13.79, 22.72, 35.64),
        (74.20, 74.86, 17.29, 28.41, 58.64, 89.13),
        (86.26, 62.97, 42.43, 56.83, 77.18, 88.21),
    ],
    7: [
        (73.90, 42.02, 7.16, 25.23, 43.23, 66.43),
        (73.15, 83.89, 30.77, 37.76, 43.77, 89.15),
        (86.23, 69.84, 38.19, 50.13, 86.44, 90.97),
    ],
    8: [(85.13, 60.09, 25.69, 30.11, 62.34, 86.77), (78.41, 88.39, 31.53, 52.10, 77.35, 91.77)],
}

# course -> cluster shares in percent
CLUSTER_SHARES_PCT: dict[int, list[float]] = {
    2: [67.31, 32.69],
    3: [40.80, 59.20],
    4: [25.36, 40.71, 33.93],
    5: [20.30, 38.01, 41.70],
    6: [21.62, 38.61, 39.77],
    7: [28.57, 27.62, 43.81],
    8: [58.93, 41.07],
}

# (from, to) -> (stable, improving, declining) percent
MOBILITY_PCT: dict[tuple[int, int], tuple[float, float, float]] = {
    (2, 3): (94.1, 5.9, 0.0),
    (3, 4): (85.7, 9.4, 4.9),
    (4, 5): (78.6, 0.0, 21.4),
    (5, 6): (73.2, 11.0, 15.8),
    (6, 7): (69.4, 14.3, 16.3),
    (7, 8): (82.0, 7.0, 11.0),
}

# (from, to) -> stability percent for clusters 0, 1, 2 (None where not reported)
STABILITY_PCT: dict[tuple[int, int], tuple[float | None, ...]] = {
    (2, 3): (100.0, 88.0, None),
    (3, 4): (92.7, 80.1, 66.6),
    (4, 5): (94.1, 77.4, 60.0),
    (5, 6): (91.3, 68.2, 62.4),
    (6, 7): (89.5, 70.4, 66.1),
    (7, 8): (68.5, 95.1, None),
}
