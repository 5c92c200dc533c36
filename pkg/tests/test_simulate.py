import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from devtraj import reference
from devtraj.dataset import build_cohorts, format_records, parse_lines
from devtraj.errors import ConfigError, LengthMismatch
from devtraj.kmeans import KMeansParams, fit_kmeans
from devtraj.simulate import (
    SimConfig,
    _allocate,
    adjusted_rand_index,
    default_config,
    evolve_tiers,
    kernel_from_stability,
    sample_cohort,
    simulate_panel,
)

from .conftest import pair_counting_ari


def one_course(course=4, **kw):
    base = {"courses": [course], "dropout_prob": 0.0, "n_children": 280}
    base.update(kw)
    return SimConfig.from_dict(base)


def two_courses(kernel, n=2000, k=3, seed=0):
    cents = [[10.0 * (j + 1)] * 6 for j in range(k)]
    return SimConfig.from_dict(
        {
            "courses": [4, 5],
            "centroids": {"4": cents, "5": cents},
            "shares": {"4": [1 / k] * k, "5": [1 / k] * k},
            "kernel": {"4-5": kernel},
            "n_children": n,
            "dropout_prob": 0.0,
            "noise_sigma": 1.0,
            "seed": seed,
        }
    )


def test_zero_noise_reproduces_centroids():
    config = one_course(noise_sigma=0.0)
    truth = evolve_tiers(config).present_tiers(4)
    cohort = sample_cohort(config, 4, truth)
    cents = np.array(reference.CLUSTER_MEANS[4])
    np.testing.assert_array_equal(cohort.scores(), cents[list(truth.values())])


def test_noise_mean_within_standard_error():
    # a centroid far from the clip bounds keeps the sample mean unbiased
    config = SimConfig.from_dict(
        {
            "courses": [5],
            "centroids": {"5": [[50.0] * 6]},
            "shares": {"5": [1.0]},
            "noise_sigma": 3.0,
            "n_children": 1000,
            "dropout_prob": 0.0,
        }
    )
    records, _ = simulate_panel(config)
    scores = np.array([r.q_scores for r in records])
    se = 3.0 / np.sqrt(len(scores))
    assert np.all(np.abs(scores.mean(axis=0) - 50.0) <= 4 * se)
    assert abs(scores.std() - 3.0) < 0.1


def test_scores_are_clipped():
    config = one_course(noise_sigma=10.0)
    records, _ = simulate_panel(config)
    scores = np.array([r.q_scores for r in records])
    assert scores.min() >= 0.0 and scores.max() <= 100.0
    assert np.any(scores == 0.0)


def test_initial_shares_are_exact():
    config = one_course(shares={"4": [0.2536, 0.4071, 0.3393]})
    tiers = evolve_tiers(config).tiers[4]
    assert np.bincount(tiers).tolist() == [71, 114, 95]


@pytest.mark.parametrize(
    "shares, n, expected",
    [
        ([0.5, 0.5], 3, [2, 1]),
        ([1 / 3] * 3, 10, [4, 3, 3]),
        ([0.2536, 0.4071, 0.3393], 280, [71, 114, 95]),
        ([1.0], 7, [7]),
    ],
)
def test_largest_remainder(shares, n, expected):
    assert _allocate(shares, n).tolist() == expected


def test_identity_kernel_keeps_tiers():
    truth = evolve_tiers(two_courses(np.eye(3).tolist(), n=500))
    np.testing.assert_array_equal(truth.tiers[4], truth.tiers[5])


def test_deterministic_row_kernel():
    kernel = [[1, 0, 0], [0, 0, 1], [0, 1, 0]]
    truth = evolve_tiers(two_courses(kernel, n=300))
    np.testing.assert_array_equal(truth.tiers[5], np.array([0, 2, 1])[truth.tiers[4]])


def test_diagonal_kernel_frequency():
    kernel = kernel_from_stability([90, 90, 90], 3, 3)
    truth = evolve_tiers(two_courses(kernel.tolist()))
    a, b = truth.tiers[4], truth.tiers[5]
    for t in range(3):
        assert abs(100 * np.mean(b[a == t] == t) - 90) <= 2


def test_dropout_rate():
    config = default_config(n_children=2000, dropout_prob=0.3, courses=[4, 5, 6])
    truth = evolve_tiers(config)
    for c in config.courses:
        assert abs(truth.present[c].mean() - 0.7) < 0.035


def test_ari_identical():
    assert adjusted_rand_index([0, 0, 1, 1, 2], [0, 0, 1, 1, 2]) == 1.0


def test_ari_singletons_against_one_cluster():
    assert adjusted_rand_index(range(6), [0] * 6) == 0.0


def test_ari_label_permutation():
    assert adjusted_rand_index([0, 0, 1, 1, 2, 2], [2, 2, 0, 0, 1, 1]) == 1.0


def test_ari_length_mismatch():
    with pytest.raises(LengthMismatch):
        adjusted_rand_index([0, 1], [0, 1, 1])


@settings(max_examples=60)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 4)), min_size=2, max_size=40))
def test_ari_matches_pair_counting(pairs):
    a, b = zip(*pairs)
    assert adjusted_rand_index(a, b) == pytest.approx(pair_counting_ari(a, b), abs=1e-12)


def test_panel_is_deterministic():
    config = default_config(n_children=50)
    r1, t1 = simulate_panel(config)
    r2, t2 = simulate_panel(config)
    assert r1 == r2 and t1.to_csv() == t2.to_csv()
    r3, _ = simulate_panel(default_config(n_children=50, seed=1))
    assert r1 != r3


def test_panel_round_trips_through_csv():
    records, _ = simulate_panel(default_config(n_children=30))
    assert parse_lines(format_records(records).splitlines()) == records


def test_raw_space_recovery_is_exact():
    config = one_course(noise_sigma=3.0, shares={"4": [0.2536, 0.4071, 0.3393]}, seed=2)
    truth = evolve_tiers(config).present_tiers(4)
    cohort = sample_cohort(config, 4, truth)
    model = fit_kmeans(cohort.scores(), KMeansParams(k=3, seed=0))
    assert adjusted_rand_index(model.assignments, list(truth.values())) == 1.0


def test_default_config_covers_all_courses():
    config = default_config()
    assert config.courses == [2, 3, 4, 5, 6, 7, 8]
    assert [config.k(c) for c in config.courses] == [2, 2, 3, 3, 3, 3, 2]
    records, truth = simulate_panel(config)
    cohorts = build_cohorts(records)
    assert list(cohorts) == config.courses
    assert sum(len(c.records) for c in cohorts.values()) == sum(int(m.sum()) for m in truth.present.values())


def test_config_round_trip():
    config = default_config(seed=5)
    again = SimConfig.from_dict(config.to_dict())
    assert again.to_dict() == config.to_dict()


@pytest.mark.parametrize(
    "patch, fragment",
    [
        ({"shares": {"4": [0.5, 0.4, 0.2]}}, "course 4"),
        ({"courses": [4, 4]}, "increasing"),
        ({"courses": [9]}, "course 9"),
        ({"noise_sigma": -1}, "noise_sigma"),
        ({"dropout_prob": 1.0}, "dropout_prob"),
        ({"kernel": {"4-5": [[1, 0]]}}, "4-5"),
        ({"bogus": 1}, "bogus"),
    ],
)
def test_config_validation(patch, fragment):
    data = {"courses": [4, 5]}
    data.update(patch)
    with pytest.raises(ConfigError, match=fragment):
        SimConfig.from_dict(data)


def test_kernel_from_stability_rows():
    kern = kernel_from_stability([90, 80, 70], 3, 3, improving=1, declining=3)
    np.testing.assert_allclose(kern.sum(axis=1), 1.0)
    np.testing.assert_allclose(np.diag(kern), [0.9, 0.8, 0.7])
    # low tier can only move up, high tier only down
    np.testing.assert_allclose(kern[0], [0.9, 0.1, 0.0])
    np.testing.assert_allclose(kern[2], [0.0, 0.3, 0.7])
    np.testing.assert_allclose(kern[1], [0.15, 0.8, 0.05])


def test_kernel_missing_values_use_mean():
    kern = kernel_from_stability([90, None], 2, 2)
    np.testing.assert_allclose(kern, [[0.9, 0.1], [0.1, 0.9]])


def test_kernel_across_k():
    kern = kernel_from_stability([100, 100, 50], 3, 2)
    np.testing.assert_allclose(kern, [[1, 0], [0, 1], [0.5, 0.5]])
