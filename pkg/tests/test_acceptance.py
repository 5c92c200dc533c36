"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]`` or ``[FAIL]`` line (visible even under
output capture) before asserting, so ``pytest tests/test_acceptance.py -v``
doubles as a report.
"""

import json
import time

import numpy as np
import pytest

from devtraj import reference
from devtraj.cli import main
from devtraj.dataset import build_cohorts
from devtraj.kmeans import KMeansParams, elbow_select_k, fit_kmeans
from devtraj.longitudinal import (
    consecutive_transitions,
    mobility_summary,
    tier_assignment,
    tier_stability_rates,
    transition_matrix_from_tiers,
)
from devtraj.pipeline import AnalysisOptions, analyze_course, recovered_means
from devtraj.profiles import centroid_q_profiles, label_clusters_by_performance, tier_ranks
from devtraj.simulate import (
    SimConfig,
    adjusted_rand_index,
    evolve_tiers,
    kernel_from_stability,
    sample_cohort,
    simulate_panel,
)
from devtraj.tsne import (
    TsneParams,
    calibrate_perplexity,
    joint_affinities,
    kl_divergence,
    kl_gradient,
    low_dim_affinities,
    pairwise_sq_distances,
    run_tsne,
    symmetrize_affinities,
)

from .conftest import central_differences, make_cohort, silhouette


@pytest.fixture
def report(capsys):
    def _report(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({detail})")
        assert ok, detail

    return _report


def test_c01_gradient_matches_finite_differences(report):
    start = time.perf_counter()
    worst_rel, worst_abs = 0.0, 0.0
    ok = True
    for i in range(25):
        rng = np.random.default_rng(1000 + i)
        n = int(rng.integers(4, 11))
        x = rng.normal(size=(n, 3))
        params = TsneParams(perplexity=min(3.0, (n - 1) / 2)).resolve(n)
        p = joint_affinities(x, params)[0].p
        y = rng.normal(size=(n, 2))
        analytic = kl_gradient(p, y)
        numeric = central_differences(lambda z: kl_divergence(p, low_dim_affinities(z)[0]), y, h=1e-5)
        diff = np.abs(analytic - numeric)
        tiny = np.abs(numeric) < 1e-4
        rel = diff / np.maximum(np.abs(numeric), 1e-300)
        ok &= bool(np.all(np.where(tiny, diff < 1e-8, rel < 1e-4)))
        worst_rel = max(worst_rel, float(rel[~tiny].max(initial=0.0)))
        worst_abs = max(worst_abs, float(diff[tiny].max(initial=0.0)))
    elapsed = time.perf_counter() - start
    ok &= elapsed < 5
    report(1, "t-SNE gradient", ok, f"max rel err {worst_rel:.2e}, tiny abs err {worst_abs:.2e}, {elapsed:.2f}s")


def test_c02_perplexity_calibration(report):
    start = time.perf_counter()
    worst = 0.0
    for i in range(20):
        x = np.random.default_rng(2000 + i).normal(size=(50, 6)) * (1 + 10 * i)
        d = pairwise_sq_distances(x)
        for target in (5, 10, 30):
            cond = calibrate_perplexity(d, target).conditional
            for row_i, row in enumerate(cond):
                probs = np.delete(row, row_i)
                probs = probs[probs > 0]
                entropy = -float(np.sum(probs * np.log2(probs)))
                worst = max(worst, abs(entropy - np.log2(target)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-5 and elapsed < 5
    report(2, "perplexity calibration", ok, f"max |H - log2 perp| {worst:.2e} bits, {elapsed:.2f}s")


def test_c03_affinity_invariants(report):
    worst = 0.0
    ok = True
    for i in range(100):
        rng = np.random.default_rng(3000 + i)
        n = int(rng.integers(5, 40))
        x = rng.normal(size=(n, int(rng.integers(1, 7))))
        cond = calibrate_perplexity(pairwise_sq_distances(x), min(5.0, (n - 1) / 3)).conditional
        p = symmetrize_affinities(cond).p
        ok &= np.array_equal(p, p.T) and np.all(np.diag(p) == 0) and np.all(p >= 0)
        worst = max(worst, abs(p.sum() - 1))
    ok &= worst <= 1e-9
    report(3, "affinity invariants", bool(ok), f"100 instances, max |sum - 1| {worst:.1e}")


def test_c04_kmeans_properties(report):
    ok = True
    worst_centroid = 0.0
    for i in range(100):
        rng = np.random.default_rng(4000 + i)
        n = int(rng.integers(8, 80))
        k = int(rng.integers(1, 7))
        x = rng.normal(size=(n, int(rng.integers(1, 7)))) * rng.uniform(0.5, 30)
        model = fit_kmeans(x, KMeansParams(k=k, seed=i, n_restarts=3))
        trace = np.asarray(model.inertia_trace)
        ok &= bool(np.all(np.diff(trace) <= 1e-9 * max(1.0, trace[0])))
        for j in range(k):
            dev = np.abs(model.centroids[j] - x[model.assignments == j].mean(axis=0)).max()
            worst_centroid = max(worst_centroid, float(dev))
        m = min(n, 10)
        full = fit_kmeans(x[:m], KMeansParams(k=m, seed=i, n_restarts=1))
        ok &= full.inertia == 0.0
    ok &= worst_centroid <= 1e-9
    report(4, "K-Means properties", ok, f"100 instances, max centroid deviation {worst_centroid:.1e}")


def test_c05_elbow(report):
    knee = elbow_select_k(list(enumerate([300, 280, 60, 50, 45], start=1)))
    flat = elbow_select_k(list(enumerate([10.0] * 5, start=1)))
    report(5, "elbow arithmetic", knee == 3 and flat == 2, f"knee curve -> {knee}, flat curve -> {flat}")


@pytest.mark.slow
def test_c06_table_anchored_recovery(report):
    generators = np.array(reference.CLUSTER_MEANS[4])
    k3 = ari_ok = mean_ok = 0
    worst_mean, slowest = 0.0, 0.0
    for seed in range(10):
        start = time.perf_counter()
        config = SimConfig.from_dict(
            {
                "courses": [4],
                "shares": {"4": [0.2536, 0.4071, 0.3393]},
                "noise_sigma": 3.0,
                "n_children": 280,
                "dropout_prob": 0.0,
                "seed": seed,
            }
        )
        truth = evolve_tiers(config).present_tiers(4)
        cohort = sample_cohort(config, 4, truth)
        result = analyze_course(cohort, AnalysisOptions(seed=seed))
        slowest = max(slowest, time.perf_counter() - start)
        ari = adjusted_rand_index(result.model.assignments, list(truth.values()))
        ari_ok += ari >= 0.9
        if result.k == 3:
            k3 += 1
            err = float(np.abs(recovered_means(result) - generators).max())
            worst_mean = max(worst_mean, err)
            mean_ok += err <= 1.5
    ok = k3 >= 9 and ari_ok >= 9 and mean_ok == k3 and slowest < 60
    detail = (
        f"k=3 in {k3}/10, ARI>=0.9 in {ari_ok}/10, worst mean-Q error {worst_mean:.2f}, "
        f"slowest seed {slowest:.1f}s"
    )
    report(6, "course-4 centroid recovery", ok, detail)


def test_c07_mobility_arithmetic(report):
    # 16 children stay in the low tier, one moves low -> high
    ids = [f"c{i}" for i in range(17)]
    before = {c: 0 for c in ids}
    after = {c: 0 for c in ids}
    after["c16"] = 1
    matrix = transition_matrix_from_tiers(2, 3, ids, before, after, 2, 2)
    m = mobility_summary(matrix)
    row = (m.stable_pct, m.improving_pct, m.declining_pct)
    stable_low = tier_stability_rates(
        transition_matrix_from_tiers(2, 3, ids[:16], before, after, 2, 2)
    ).per_tier[0]
    ok = row == (94.1, 5.9, 0.0) and f"{stable_low:.1f}" == "100.0"
    report(7, "mobility arithmetic", ok, f"census of 17 -> {row}, all-stable tier 0 -> {stable_low:.1f}")


@pytest.mark.slow
def test_c08_markov_recovery(report):
    start = time.perf_counter()
    courses = [4, 5, 6, 7]
    kernel = kernel_from_stability([90.0, 90.0, 90.0], 3, 3)
    config = SimConfig.from_dict(
        {
            "courses": courses,
            "kernel": {f"{a}-{b}": kernel.tolist() for a, b in zip(courses, courses[1:])},
            "n_children": 2000,
            "dropout_prob": 0.0,
            "noise_sigma": 3.0,
            "seed": 0,
        }
    )
    records, _ = simulate_panel(config)
    tiers, ks = {}, {}
    for course, cohort in build_cohorts(records).items():
        model = fit_kmeans(cohort.scores(), KMeansParams(k=3, seed=0))
        profiles = label_clusters_by_performance(centroid_q_profiles(cohort, model))
        tiers[course] = tier_assignment(cohort.child_ids, model, tier_ranks(profiles))
        ks[course] = 3
    worst_stab, worst_prob = 0.0, 0.0
    for matrix in consecutive_transitions(tiers, ks):
        rates = tier_stability_rates(matrix).per_tier.values()
        worst_stab = max(worst_stab, max(abs(r - 90.0) for r in rates))
        worst_prob = max(worst_prob, float(np.abs(matrix.probabilities - kernel).max()))
    elapsed = time.perf_counter() - start
    ok = worst_stab <= 2.0 and worst_prob <= 0.03 and elapsed < 120
    detail = f"worst stability error {worst_stab:.2f} pts, worst probability error {worst_prob:.3f}, {elapsed:.1f}s"
    report(8, "Markov recovery", ok, detail)


@pytest.mark.slow
def test_c09_determinism(report, tmp_path):
    assert main(["simulate", "--out", str(tmp_path / "sim"), "--seed", "5"]) == 0
    panel = str(tmp_path / "sim" / "panel.csv")
    for name in ("a", "b"):
        assert main(["analyze", "--input", panel, "--out", str(tmp_path / name), "--seed", "3"]) == 0
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    names = sorted(manifest["files"]) + ["manifest.json"]
    differing = [n for n in names if (tmp_path / "a" / n).read_bytes() != (tmp_path / "b" / n).read_bytes()]
    report(9, "determinism", not differing, f"{len(names)} files compared, {len(differing)} differ")


def test_c10_blob_silhouette(report):
    rng = np.random.default_rng(10)
    # centres 50 apart along the diagonal, shifted into the score range
    a = rng.normal(0, 1, size=(30, 6)) + 25
    points = np.vstack([a, rng.normal(0, 1, size=(30, 6)) + 25 + 50 / np.sqrt(6)])
    labels = [0] * 30 + [1] * 30
    emb = run_tsne(make_cohort(points), TsneParams(seed=0))
    score = silhouette(emb.coords, labels)
    report(10, "embedding silhouette", score > 0.8, f"silhouette {score:.3f}")
