"""
Cost graphs and node partitions of the multicut problem.

Edge label convention: y_e = 1 means the edge is CUT.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from app.utils.exceptions import FormatError, InputShapeError, NumericError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True)
class CostGraph:
    """
    Undirected graph on nodes 0..n-1 with real edge costs.

    Edges are stored once with u < v. Absent edges behave as cost 0.
    """

    n: int
    edges: np.ndarray
    costs: np.ndarray

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        costs = np.array(self.costs, dtype=np.float64).reshape(-1)
        if edges.shape[0] != costs.shape[0]:
            raise InputShapeError(f"{edges.shape[0]} edges but {costs.shape[0]} costs")
        if not np.all(np.isfinite(costs)):
            raise NumericError("edge costs must be finite")
        if edges.size and (edges.min() < 0 or edges.max() >= self.n):
            raise InputShapeError(f"edge endpoint outside 0..{self.n - 1}")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise InputShapeError("self-loops carry no cost")

        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        edges = np.stack([lo, hi], axis=1)
        if edges.size and np.unique(lo * self.n + hi).size != lo.size:
            raise InputShapeError("duplicate edges")

        edges.setflags(write=False)
        costs.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "costs", costs)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, mask: Optional[np.ndarray] = None) -> "CostGraph":
        """
        Build a graph from a symmetric cost matrix.

        Args:
            matrix: (n, n) symmetric costs; the diagonal is ignored
            mask: Optional (n, n) boolean adjacency; complete graph when omitted

        Returns:
            CostGraph over the upper triangle
        """
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InputShapeError(f"cost matrix must be square, got {matrix.shape}")
        if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12):
            raise InputShapeError("cost matrix must be symmetric")
        n = matrix.shape[0]
        rows, cols = np.triu_indices(n, k=1)
        if mask is not None:
            mask = np.asarray(mask, dtype=bool)
            keep = mask[rows, cols] | mask[cols, rows]
            rows, cols = rows[keep], cols[keep]
        return cls(n, np.stack([rows, cols], axis=1), matrix[rows, cols])

    @classmethod
    def complete(cls, n: int, cost_fn) -> "CostGraph":
        """Complete graph whose edge costs come from cost_fn(u, v)."""
        rows, cols = np.triu_indices(n, k=1)
        costs = [cost_fn(int(u), int(v)) for u, v in zip(rows, cols)]
        return cls(n, np.stack([rows, cols], axis=1), np.asarray(costs, dtype=np.float64))

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    def dense(self) -> np.ndarray:
        """Symmetric (n, n) cost matrix, zero where no edge exists."""
        matrix = np.zeros((self.n, self.n))
        if self.m:
            matrix[self.edges[:, 0], self.edges[:, 1]] = self.costs
            matrix[self.edges[:, 1], self.edges[:, 0]] = self.costs
        return matrix

    def adjacency(self) -> np.ndarray:
        """Symmetric (n, n) boolean edge indicator."""
        mask = np.zeros((self.n, self.n), dtype=bool)
        if self.m:
            mask[self.edges[:, 0], self.edges[:, 1]] = True
            mask[self.edges[:, 1], self.edges[:, 0]] = True
        return mask

    def total_cost(self) -> float:
        return float(self.costs.sum())


@dataclass(frozen=True)
class Partition:
    """Component identifier per node."""

    labels: np.ndarray

    def __post_init__(self) -> None:
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(np.arange(n))

    @classmethod
    def single(cls, n: int) -> "Partition":
        return cls(np.zeros(n, dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @property
    def n_components(self) -> int:
        return int(np.unique(self.labels).size)

    def canonical(self) -> "Partition":
        """Relabel components 0, 1, ... in order of first appearance."""
        _, first, inverse = np.unique(self.labels, return_index=True, return_inverse=True)
        order = np.argsort(np.argsort(first))
        return Partition(order[inverse])

    def same_as(self, other: "Partition") -> bool:
        """Equality up to relabeling of components."""
        return self.n == other.n and np.array_equal(self.canonical().labels, other.canonical().labels)


def edge_labels(graph: CostGraph, partition: Partition) -> np.ndarray:
    """0/1 labeling y of graph edges induced by a partition (1 = cut)."""
    _check_cover(graph, partition)
    labels = partition.labels
    return (labels[graph.edges[:, 0]] != labels[graph.edges[:, 1]]).astype(np.int64)


def _check_cover(graph: CostGraph, partition: Partition) -> None:
    if partition.n != graph.n:
        raise InputShapeError(f"partition labels {partition.n} nodes, graph has {graph.n}")


def write_graph(graph: CostGraph, path: PathLike) -> Path:
    """Write the graph as a 'n m' header followed by 'u v cost' lines."""
    path = Path(path)
    lines = [f"{graph.n} {graph.m}"]
    lines.extend(f"{int(u)} {int(v)} {float(c)!r}" for (u, v), c in zip(graph.edges, graph.costs))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Wrote graph with {graph.n} nodes and {graph.m} edges to {path}")
    return path


def read_graph(path: PathLike) -> CostGraph:
    """Read a graph written by write_graph."""
    path = Path(path)
    lines = [line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines:
        raise FormatError(f"{path} is empty")
    try:
        n, m = (int(tok) for tok in lines[0].split())
        records = [line.split() for line in lines[1:]]
        edges = [(int(r[0]), int(r[1])) for r in records]
        costs = [float(r[2]) for r in records]
    except (ValueError, IndexError) as e:
        raise FormatError(f"Malformed graph file {path}: {str(e)}") from e
    if len(edges) != m:
        raise FormatError(f"{path} announces {m} edges but holds {len(edges)}")
    return CostGraph(n, np.asarray(edges, dtype=np.int64).reshape(-1, 2), np.asarray(costs, dtype=np.float64))


def write_partition(partition: Partition, path: PathLike) -> Path:
    """Write one 'node component' line per node."""
    path = Path(path)
    path.write_text("".join(f"{i} {int(c)}\n" for i, c in enumerate(partition.labels)), encoding="utf-8")
    logger.info(f"Wrote partition with {partition.n_components} components to {path}")
    return path


def read_partition(path: PathLike) -> Partition:
    """Read a partition written by write_partition."""
    path = Path(path)
    try:
        records = [tuple(int(tok) for tok in line.split()) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    except ValueError as e:
        raise FormatError(f"Malformed partition file {path}: {str(e)}") from e
    records.sort()
    if [r[0] for r in records] != list(range(len(records))):
        raise FormatError(f"{path} does not list nodes 0..n-1 exactly once")
    return Partition(np.asarray([r[1] for r in records], dtype=np.int64))

