"""
Minimum cost multicut: objective, exhaustive oracle and primal heuristics.

The objective of a partition is the summed cost of the edges it cuts.
Minimizing it is the same as maximizing the summed cost of joined edges,
since the two add up to the constant total cost.
"""
import heapq
import logging
import math
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from app.clustering.graph import CostGraph, Partition, edge_labels, _check_cover
from app.config.settings import get_settings
from app.utils.exceptions import InputShapeError, SizeLimitError

logger = logging.getLogger(__name__)

# Smallest objective decrease kl_refine accepts
IMPROVEMENT_TOLERANCE = 1e-12


def objective(graph: CostGraph, partition: Partition) -> float:
    """Sum of the costs of edges whose endpoints lie in different components."""
    _check_cover(graph, partition)
    if graph.m == 0:
        return 0.0
    cut = edge_labels(graph, partition).astype(bool)
    return float(graph.costs[cut].sum())


def brute_force(graph: CostGraph, max_nodes: Optional[int] = None) -> Tuple[Partition, float]:
    """
    Exhaustive minimization over all set partitions.

    Partitions are enumerated as restricted-growth strings; the cut cost is
    accumulated node by node, so each leaf costs O(1) beyond its parent.

    Args:
        graph: Cost graph
        max_nodes: Size limit (BRUTE_FORCE_MAX_NODES by default)

    Returns:
        A global minimizer (the first in enumeration order) and its objective

    Raises:
        SizeLimitError: If graph.n exceeds the limit
    """
    limit = max_nodes if max_nodes is not None else get_settings().BRUTE_FORCE_MAX_NODES
    n = graph.n
    if n > limit:
        raise SizeLimitError(f"brute force is limited to {limit} nodes, graph has {n}", {"n": n, "limit": limit})
    if n == 0:
        return Partition(np.zeros(0, dtype=np.int64)), 0.0

    costs = graph.dense().tolist()
    prefix = [sum(costs[i][:i]) for i in range(n)]
    labels = [0] * n
    best: Dict[str, object] = {"value": math.inf, "labels": None}

    def assign(i: int, n_blocks: int, value: float) -> None:
        if i == n:
            if value < best["value"]:
                best["value"] = value
                best["labels"] = list(labels)
            return
        row = costs[i]
        joined = [0.0] * (n_blocks + 1)
        for j in range(i):
            joined[labels[j]] += row[j]
        for block in range(n_blocks + 1):
            labels[i] = block
            assign(i + 1, max(n_blocks, block + 1), value + prefix[i] - joined[block])

    labels[0] = 0
    assign(1, 1, 0.0)

    partition = Partition(np.asarray(best["labels"], dtype=np.int64))
    return partition, objective(graph, partition)


def gaec(graph: CostGraph) -> Partition:
    """
    Greedy additive edge contraction.

    Starting from singletons, repeatedly contract the cluster pair with the
    largest positive aggregated cost. Candidates sit in a max-priority queue
    and are invalidated lazily through per-cluster version counters; ties go
    to the lowest pair of cluster identifiers (a merged cluster keeps the
    smaller identifier).

    Args:
        graph: Cost graph

    Returns:
        Partition in canonical labeling
    """
    n = graph.n
    adjacency: List[Dict[int, float]] = [dict() for _ in range(n)]
    for (u, v), cost in zip(graph.edges.tolist(), graph.costs.tolist()):
        adjacency[u][v] = cost
        adjacency[v][u] = cost

    alive = [True] * n
    version = [0] * n
    members: List[List[int]] = [[i] for i in range(n)]

    heap = [(-cost, u, v, 0, 0) for (u, v), cost in zip(graph.edges.tolist(), graph.costs.tolist()) if cost > 0]
    heapq.heapify(heap)

    merges = 0
    while heap:
        neg_cost, u, v, version_u, version_v = heapq.heappop(heap)
        if not (alive[u] and alive[v]) or version[u] != version_u or version[v] != version_v:
            continue

        # Contract v into u (u < v)
        for x, cost in adjacency[v].items():
            if x == u:
                continue
            merged = adjacency[u].get(x, 0.0) + cost
            adjacency[u][x] = merged
            adjacency[x][u] = merged
            del adjacency[x][v]
        del adjacency[u][v]
        adjacency[v] = {}
        alive[v] = False
        members[u].extend(members[v])
        members[v] = []
        version[u] += 1
        merges += 1

        for x, cost in adjacency[u].items():
            if cost > 0:
                lo, hi = (u, x) if u < x else (x, u)
                heapq.heappush(heap, (-cost, lo, hi, version[lo], version[hi]))

    labels = np.empty(n, dtype=np.int64)
    for cluster, nodes in enumerate(m for m in members if m):
        labels[nodes] = cluster
    logger.debug(f"GAEC performed {merges} contractions on {n} nodes")
    return Partition(labels).canonical()


def _merge_positive_components(costs: np.ndarray, labels: np.ndarray) -> bool:
    """Greedily merge component pairs with positive inter-component cost, in place."""
    ids, compact = np.unique(labels, return_inverse=True)
    k = ids.size
    if k < 2:
        return False
    indicator = np.zeros((labels.size, k))
    indicator[np.arange(labels.size), compact] = 1.0
    between = indicator.T @ costs @ indicator
    np.fill_diagonal(between, -np.inf)
    alive = np.ones(k, dtype=bool)

    changed = False
    while True:
        flat = int(np.argmax(between))
        a, b = divmod(flat, k)
        if between[a, b] <= IMPROVEMENT_TOLERANCE:
            break
        a, b = min(a, b), max(a, b)
        between[a, :] += between[b, :]
        between[:, a] += between[:, b]
        between[a, a] = -np.inf
        between[b, :] = -np.inf
        between[:, b] = -np.inf
        alive[b] = False
        compact[compact == b] = a
        changed = True

    if changed:
        labels[:] = compact
    return changed


def kl_refine(graph: CostGraph, partition: Partition, max_passes: int = 1000) -> Partition:
    """
    Local search with single-node moves and component merges.

    Each pass visits nodes in ascending order. For the current node the
    candidate targets are scanned in ascending component order, followed by
    a new singleton, and the first strictly improving relocation is applied.
    The pass ends by greedily merging component pairs whose inter-component
    cost is positive. Passes repeat until one changes nothing.

    Args:
        graph: Cost graph
        partition: Starting partition
        max_passes: Safety cap on passes

    Returns:
        Partition whose objective is not larger than the input's
    """
    _check_cover(graph, partition)
    n = graph.n
    if n == 0:
        return partition
    costs = graph.dense()
    labels = np.array(partition.canonical().labels)

    for passes in range(1, max_passes + 1):
        moves = 0
        for node in range(n):
            sizes = np.bincount(labels, minlength=n)
            joined = np.bincount(labels, weights=costs[node], minlength=n)
            current = labels[node]

            delta = joined[current] - joined
            delta[current] = np.inf
            delta[sizes == 0] = np.inf
            improving = np.flatnonzero(delta < -IMPROVEMENT_TOLERANCE)
            if improving.size:
                labels[node] = int(improving[0])
                moves += 1
            elif sizes[current] > 1 and joined[current] < -IMPROVEMENT_TOLERANCE:
                # Leaving for a new singleton cuts every edge into the current component
                labels[node] = int(np.flatnonzero(sizes == 0)[0])
                moves += 1

        merged = _merge_positive_components(costs, labels)
        logger.debug(f"KL pass {passes}: {moves} node moves, merged={merged}")
        if moves == 0 and not merged:
            break
        labels = np.array(Partition(labels).canonical().labels)

    return Partition(labels).canonical()


def validate_cycles(graph: CostGraph, labeling: Union[Partition, np.ndarray]) -> bool:
    """
    Check the cycle inequality y_ij <= y_ik + y_kj on every triangle of the graph.

    On complete graphs the triangles are exactly the chordless cycles, so
    the check is exhaustive there.

    Args:
        graph: Cost graph
        labeling: Partition, or 0/1 edge labels aligned with graph.edges

    Returns:
        True iff no triangle violates the inequality
    """
    if isinstance(labeling, Partition):
        y = edge_labels(graph, labeling)
    else:
        y = np.asarray(labeling, dtype=np.int64).reshape(-1)
        if y.shape[0] != graph.m:
            raise InputShapeError(f"{y.shape[0]} edge labels for {graph.m} edges")

    n = graph.n
    cut = np.zeros((n, n), dtype=np.int64)
    if graph.m:
        cut[graph.edges[:, 0], graph.edges[:, 1]] = y
        cut[graph.edges[:, 1], graph.edges[:, 0]] = y
    present = graph.adjacency()

    for i in range(n):
        row_cut = cut[i]
        row_present = present[i]
        # (j, k) entry: y_ij > y_ik + y_kj on an existing triangle i-j-k
        violated = (row_cut[:, None] > row_cut[None, :] + cut) & row_present[:, None] & row_present[None, :] & present
        if violated.any():
            return False
    return True
