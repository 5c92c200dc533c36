"""Longitudinal cohort phenotyping from cognitive-motor task scores.

Per-course cohorts are embedded with exact t-SNE, partitioned into
performance tiers with K-Means++ (k chosen by the elbow rule), and tracked
year over year through tier transition matrices.
"""

__version__ = "0.1.0"
