"""
Clustering accuracy under the best one-to-one cluster-to-label map, and
inter/intra-class distance statistics.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist, pdist

from app.utils.constants import DISTANCE_STATS_COLUMNS
from app.utils.exceptions import InputShapeError


@dataclass
class ClusterEval:
    acc: float
    n_pred_clusters: int
    mapping: Dict[int, int]
    confusion: np.ndarray
    cluster_ids: np.ndarray
    label_ids: np.ndarray
    cluster_sizes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    n_small_clusters: int = 0
    top_k_share: Optional[float] = None
    n_matched: int = 0


def contingency(pred: Sequence[int], truth: Sequence[int]):
    """Counts of (predicted cluster, true label) pairs with their id arrays."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    cluster_ids, pred_idx = np.unique(pred, return_inverse=True)
    label_ids, truth_idx = np.unique(truth, return_inverse=True)
    table = np.zeros((cluster_ids.size, label_ids.size), dtype=np.int64)
    np.add.at(table, (pred_idx, truth_idx), 1)
    return table, cluster_ids, label_ids


def accuracy(
    pred: Sequence[int],
    truth: Sequence[int],
    small_cluster_size: int = 10,
    top_k: Optional[int] = None,
) -> ClusterEval:
    """
    Fraction of items matched under the best one-to-one map from clusters to labels.

    The contingency table is padded with zero-count dummy labels so every
    cluster can be assigned; clusters mapped to a dummy match nothing.

    Args:
        pred: Predicted cluster id per item
        truth: True label per item
        small_cluster_size: Clusters below this size count as small
        top_k: Report the share of items in the top_k largest clusters
            (defaults to the number of true labels)

    Returns:
        ClusterEval

    Raises:
        InputShapeError: On empty input or length mismatch
    """
    pred = np.asarray(pred).reshape(-1)
    truth = np.asarray(truth).reshape(-1)
    if pred.size == 0:
        raise InputShapeError("accuracy needs at least one item")
    if pred.shape != truth.shape:
        raise InputShapeError(f"{pred.size} predictions but {truth.size} labels")

    table, cluster_ids, label_ids = contingency(pred, truth)
    n_clusters, n_labels = table.shape
    padded = np.zeros((n_clusters, max(n_clusters, n_labels)), dtype=np.int64)
    padded[:, :n_labels] = table

    rows, cols = linear_sum_assignment(padded, maximize=True)
    matched = int(padded[rows, cols].sum())
    mapping = {int(cluster_ids[r]): int(label_ids[c]) for r, c in zip(rows, cols) if c < n_labels}

    sizes = np.sort(table.sum(axis=1))[::-1]
    top = top_k if top_k is not None else n_labels
    return ClusterEval(
        acc=matched / pred.size,
        n_pred_clusters=n_clusters,
        mapping=mapping,
        confusion=table,
        cluster_ids=cluster_ids,
        label_ids=label_ids,
        cluster_sizes=sizes,
        n_small_clusters=int((sizes < small_cluster_size).sum()),
        top_k_share=float(sizes[:top].sum() / pred.size),
        n_matched=matched,
    )


def _finite_or_none(value) -> Optional[float]:
    return float(value) if np.isfinite(value) else None


@dataclass
class DistanceStats:
    classes: np.ndarray
    intra_mean: np.ndarray
    intra_std: np.ndarray
    inter_mean: np.ndarray
    inter_std: np.ndarray
    nearest_class: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "class": self.classes,
                "intra_mean": self.intra_mean,
                "intra_std": self.intra_std,
                "inter_mean": self.inter_mean,
                "inter_std": self.inter_std,
                "nearest_class": self.nearest_class,
            },
            columns=DISTANCE_STATS_COLUMNS,
        )

    def rows(self) -> List[Dict[str, float]]:
        return [
            {
                "class": int(c),
                "intra_mean": float(self.intra_mean[i]),
                "intra_std": float(self.intra_std[i]),
                "inter_mean": _finite_or_none(self.inter_mean[i]),
                "inter_std": _finite_or_none(self.inter_std[i]),
                "nearest_class": int(self.nearest_class[i]),
            }
            for i, c in enumerate(self.classes)
        ]


def distance_stats(embeddings: np.ndarray, labels: Sequence[int]) -> DistanceStats:
    """
    Per-class intra-class and nearest-class distance statistics.

    intra(c) is the mean pairwise distance within c; inter(c) is the mean
    cross distance to the class c' minimizing that mean. Standard deviations
    are taken over the same pairwise-distance samples.

    Raises:
        InputShapeError: If a class has fewer than two members
    """
    embeddings = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels).reshape(-1)
    if embeddings.ndim != 2 or embeddings.shape[0] != labels.size:
        raise InputShapeError("embeddings and labels must align")
    classes = np.unique(labels)
    members = {c: embeddings[labels == c] for c in classes}
    for c, rows in members.items():
        if rows.shape[0] < 2:
            raise InputShapeError(f"class {c} has a single member", {"class": int(c)})

    intra_mean, intra_std = [], []
    inter_mean, inter_std, nearest = [], [], []
    for c in classes:
        within = pdist(members[c])
        intra_mean.append(within.mean())
        intra_std.append(within.std())

        best = None
        for other in classes:
            if other == c:
                continue
            cross = cdist(members[c], members[other]).ravel()
            if best is None or cross.mean() < best[1].mean():
                best = (other, cross)
        if best is None:
            # Single class: no nearest class exists
            nearest.append(-1)
            inter_mean.append(np.nan)
            inter_std.append(np.nan)
        else:
            nearest.append(best[0])
            inter_mean.append(best[1].mean())
            inter_std.append(best[1].std())

    return DistanceStats(
        classes=classes,
        intra_mean=np.asarray(intra_mean),
        intra_std=np.asarray(intra_std),
        inter_mean=np.asarray(inter_mean),
        inter_std=np.asarray(inter_std),
        nearest_class=np.asarray(nearest),
    )
