import itertools

import numpy as np
import pytest

from app.clustering.kmeans import kmeans, kmeans_plus_plus, lloyd
from app.utils.exceptions import ParameterError, SizeLimitError


def _inertia(points, assignment, k):
    total = 0.0
    for c in range(k):
        members = points[assignment == c]
        if members.size:
            total += ((members - members.mean(axis=0)) ** 2).sum()
    return total


def test_line_example(rng):
    points = np.array([[0.0], [1.0], [10.0], [11.0]])
    result = kmeans(points, 2, restarts=10, rng=rng)
    assert sorted(result.centroids.ravel().tolist()) == pytest.approx([0.5, 10.5])
    assert result.inertia == pytest.approx(1.0)


def test_k_equals_n(rng):
    points = rng.normal(size=(6, 2))
    result = kmeans(points, 6, rng=rng)
    assert result.inertia == pytest.approx(0.0, abs=1e-12)
    assert len(set(result.assignment.tolist())) == 6


def test_k_one_is_the_mean(rng):
    points = rng.normal(size=(30, 3))
    result = kmeans(points, 1, rng=rng)
    assert result.centroids[0] == pytest.approx(points.mean(axis=0))
    assert result.inertia == pytest.approx(points.var(axis=0).sum() * 30)


def test_invalid_k(rng):
    points = rng.normal(size=(5, 2))
    with pytest.raises(ParameterError):
        kmeans(points, 0, rng=rng)
    with pytest.raises(SizeLimitError):
        kmeans(points, 6, rng=rng)


def test_assignment_and_inertia_are_consistent(rng):
    points = rng.normal(size=(60, 2))
    result = kmeans(points, 4, rng=rng)
    dist = ((points[:, None, :] - result.centroids[None]) ** 2).sum(axis=2)
    assert np.array_equal(result.assignment, dist.argmin(axis=1))
    assert result.inertia == pytest.approx(dist.min(axis=1).sum(), rel=1e-9)


def test_inertia_non_increasing_within_a_run(rng):
    points = rng.normal(size=(200, 3))
    result = lloyd(points, kmeans_plus_plus(points, 5, rng), max_iter=300)
    trace = np.array(result.inertia_trace)
    assert np.all(np.diff(trace) <= 1e-9)


def test_best_of_restarts_beats_each_run():
    points = np.random.default_rng(5).normal(size=(80, 2))
    best = kmeans(points, 5, restarts=10, rng=np.random.default_rng(9))
    for stream in np.random.default_rng(9).spawn(10):
        single = lloyd(points, kmeans_plus_plus(points, 5, stream), max_iter=300)
        assert best.inertia <= single.inertia + 1e-12


def test_deterministic_for_a_seed():
    points = np.random.default_rng(1).normal(size=(50, 2))
    first = kmeans(points, 3, rng=np.random.default_rng(2))
    second = kmeans(points, 3, rng=np.random.default_rng(2))
    assert np.array_equal(first.assignment, second.assignment)


def test_identical_points_do_not_break_seeding(rng):
    points = np.zeros((20, 2))
    result = kmeans(points, 4, rng=rng)
    assert result.inertia == 0.0


def test_matches_exhaustive_optimum_on_small_instances(record_property):
    corpus_rng = np.random.default_rng(77)
    matches = 0
    trials = 30
    for trial in range(trials):
        n = int(corpus_rng.integers(5, 9))
        k = int(corpus_rng.integers(2, 4))
        points = corpus_rng.normal(size=(n, 2))
        optimum = min(
            _inertia(points, np.array(labels), k)
            for labels in itertools.product(range(k), repeat=n)
            if len(set(labels)) == k
        )
        result = kmeans(points, k, restarts=20, rng=np.random.default_rng(trial))
        matches += result.inertia == pytest.approx(optimum, rel=1e-9, abs=1e-12)
    record_property("exhaustive_match_rate", matches / trials)
    assert matches == trials
