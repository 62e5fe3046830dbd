import itertools
import json
from pathlib import Path

import numpy as np
import pytest

from app.clustering.graph import CostGraph, Partition, edge_labels, read_graph, read_partition, write_graph, write_partition
from app.clustering.multicut import brute_force, gaec, kl_refine, objective, validate_cycles
from app.utils.exceptions import InputShapeError, NumericError, SizeLimitError

ORACLE_FIXTURE = Path(__file__).parent / "fixtures" / "multicut_oracle.json"


def _triangle(c01, c02, c12):
    return CostGraph(3, np.array([[0, 1], [0, 2], [1, 2]]), np.array([c01, c02, c12], dtype=float))


def _random_complete(rng, n, low=-1.0, high=1.0):
    return CostGraph.complete(n, lambda u, v: rng.uniform(low, high))


def _oracle_settings():
    return json.loads(ORACLE_FIXTURE.read_text(encoding="utf-8"))


def _corpus(settings):
    rng = np.random.default_rng(settings["corpus_seed"])
    return [
        _random_complete(
            rng,
            int(rng.integers(settings["min_nodes"], settings["max_nodes"] + 1)),
            settings["cost_low"],
            settings["cost_high"],
        )
        for _ in range(settings["instances"])
    ]


def test_objective_examples():
    graph = _triangle(-5.0, -5.0, 1.0)
    assert objective(graph, Partition.single(3)) == 0.0
    assert objective(graph, Partition([0, 1, 1])) == pytest.approx(-10.0)
    assert objective(graph, Partition.singletons(3)) == pytest.approx(graph.total_cost())


def test_objective_checks_cover():
    with pytest.raises(InputShapeError):
        objective(_triangle(1.0, 1.0, 1.0), Partition([0, 1]))


def test_objective_relabeling_and_shift(rng):
    graph = _random_complete(rng, 7)
    partition = Partition(rng.integers(0, 3, size=7))
    relabeled = Partition((partition.labels + 5) * 2)
    assert objective(graph, relabeled) == pytest.approx(objective(graph, partition))

    shifted = CostGraph(graph.n, graph.edges, graph.costs + 0.25)
    cut = edge_labels(graph, partition).sum()
    assert objective(shifted, partition) == pytest.approx(objective(graph, partition) + 0.25 * cut)


def test_brute_force_triangle():
    partition, value = brute_force(_triangle(-5.0, -5.0, 1.0))
    assert value == pytest.approx(-10.0)
    assert partition.same_as(Partition([0, 1, 1]))


def test_brute_force_sign_extremes(rng):
    positive = CostGraph.complete(6, lambda u, v: rng.uniform(0.1, 1.0))
    partition, value = brute_force(positive)
    assert partition.n_components == 1 and value == 0.0

    negative = CostGraph.complete(6, lambda u, v: rng.uniform(-1.0, -0.1))
    partition, value = brute_force(negative)
    assert partition.n_components == 6
    assert value == pytest.approx(negative.total_cost())


def test_brute_force_size_limit():
    graph = CostGraph.complete(13, lambda u, v: 1.0)
    with pytest.raises(SizeLimitError):
        brute_force(graph)


def test_brute_force_matches_enumeration(rng):
    graph = _random_complete(rng, 5)
    best = min(
        objective(graph, Partition(labels))
        for labels in itertools.product(range(5), repeat=5)
    )
    assert brute_force(graph)[1] == pytest.approx(best)


def test_gaec_examples(rng):
    negative = CostGraph.complete(5, lambda u, v: -rng.uniform(0.1, 1.0))
    assert gaec(negative).n_components == 5

    partition = gaec(_triangle(3.0, 3.0, -1.0))
    assert partition.n_components == 1
    assert objective(_triangle(3.0, 3.0, -1.0), partition) == 0.0


def test_kl_refine_from_singletons_on_triangle():
    graph = _triangle(3.0, 3.0, -1.0)
    refined = kl_refine(graph, Partition.singletons(3))
    assert objective(graph, refined) == 0.0


def test_kl_refine_takes_first_improving_move():
    # Node 0 improves by joining node 1 (gain 1) or node 2 (gain 2); the lower id is taken
    graph = _triangle(1.0, 2.0, -10.0)
    refined = kl_refine(graph, Partition.singletons(3), max_passes=1)
    assert refined.same_as(Partition([0, 0, 1]))
    assert objective(graph, refined) == pytest.approx(-8.0)


def test_kl_refine_keeps_optimum(rng):
    graph = _random_complete(rng, 7)
    optimum, value = brute_force(graph)
    assert objective(graph, kl_refine(graph, optimum)) == pytest.approx(value)


def test_kl_refine_never_increases(rng):
    for _ in range(50):
        graph = _random_complete(rng, int(rng.integers(3, 15)))
        start = Partition(rng.integers(0, 4, size=graph.n))
        assert objective(graph, kl_refine(graph, start)) <= objective(graph, start) + 1e-12


def test_heuristics_against_oracle(record_property):
    settings = _oracle_settings()
    gaec_hits = 0
    refined_hits = 0
    corpus = _corpus(settings)
    assert len(corpus) == 200
    for graph in corpus:
        _, optimum = brute_force(graph)
        initial = gaec(graph)
        refined = kl_refine(graph, initial)
        gaec_value = objective(graph, initial)
        refined_value = objective(graph, refined)
        assert gaec_value >= optimum - 1e-9
        assert refined_value >= optimum - 1e-9
        gaec_hits += np.isclose(gaec_value, optimum, rtol=0.0, atol=1e-9)
        refined_hits += np.isclose(refined_value, optimum, rtol=0.0, atol=1e-9)

    gaec_rate = gaec_hits / len(corpus)
    refined_rate = refined_hits / len(corpus)
    record_property("gaec_rate", gaec_rate)
    record_property("gaec_kl_rate", refined_rate)
    assert refined_rate >= gaec_rate
    assert refined_rate >= settings["min_gaec_kl_rate"]


def test_validate_cycles_on_partitions(rng):
    for _ in range(1000):
        n = int(rng.integers(3, 9))
        graph = _random_complete(rng, n)
        partition = Partition(rng.integers(0, n, size=n))
        assert validate_cycles(graph, partition)
        assert validate_cycles(graph, edge_labels(graph, partition))


def test_validate_cycles_rejects_inconsistent_labelings(rng):
    triangle = _triangle(1.0, 1.0, 1.0)
    assert not validate_cycles(triangle, np.array([1, 0, 0]))

    for _ in range(100):
        n = int(rng.integers(3, 9))
        graph = _random_complete(rng, n)
        labels = rng.integers(0, n, size=n)
        labels[1] = labels[2] = labels[0]
        y = edge_labels(graph, Partition(labels))
        # Cut 0-1 while 0-2 and 1-2 stay joined
        edge = int(np.flatnonzero((graph.edges[:, 0] == 0) & (graph.edges[:, 1] == 1))[0])
        y[edge] = 1
        assert not validate_cycles(graph, y)


def test_validate_cycles_ignores_missing_edges():
    path = CostGraph(3, np.array([[0, 1], [1, 2]]), np.array([1.0, 1.0]))
    assert validate_cycles(path, np.array([1, 0]))


def test_graph_validation():
    with pytest.raises(NumericError):
        CostGraph(2, np.array([[0, 1]]), np.array([np.nan]))
    with pytest.raises(InputShapeError):
        CostGraph(2, np.array([[0, 0]]), np.array([1.0]))
    with pytest.raises(InputShapeError):
        CostGraph(3, np.array([[0, 1], [1, 0]]), np.array([1.0, 2.0]))
    with pytest.raises(InputShapeError):
        CostGraph.from_matrix(np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_graph_and_partition_files_round_trip(tmp_path, rng):
    graph = _random_complete(rng, 6)
    loaded = read_graph(write_graph(graph, tmp_path / "graph.txt"))
    assert loaded.n == graph.n
    assert np.array_equal(loaded.edges, graph.edges)
    assert np.array_equal(loaded.costs, graph.costs)

    partition = Partition([2, 0, 2, 1, 1, 0])
    assert np.array_equal(read_partition(write_partition(partition, tmp_path / "p.txt")).labels, partition.labels)
