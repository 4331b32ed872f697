"""User clustering on normalized beam directions.

Agglomerative bottom-up merging under Ward's criterion produces a full
merge history; the L-method picks the knee of the merge-cost evaluation
graph to fix the cluster count automatically. A restarted Lloyd k-means
on the same scalar feature serves as the baseline.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import lloyd_cluster, ward_merge_sequence

KMEANS_RESTARTS = 10
KMEANS_MAX_ITER = 100


@dataclass(frozen=True)
class Partition:
    assignment: np.ndarray
    num_clusters: int

    def __post_init__(self):
        labels = np.unique(self.assignment)
        if len(labels) != self.num_clusters or labels[0] != 0 \
                or labels[-1] != self.num_clusters - 1:
            raise ValueError("assignment must use every label in "
                             "[0, num_clusters)")

    def members(self, k):
        return np.flatnonzero(self.assignment == k)


@dataclass(frozen=True)
class MergeStep:
    merged_pair: tuple
    cost: float
    resulting_cluster_count: int


@dataclass(frozen=True)
class MergeHistory:
    """Ordered Ward merges from initial_count singletons down to one
    cluster. Cluster ids are the lowest original user index of each
    cluster, so a pair (i, j) always has i < j and the merge survives
    under id i."""
    steps: tuple
    initial_count: int


@dataclass(frozen=True)
class EvaluationGraph:
    """Merge cost y(x) against resulting cluster count x = 1 .. b-1."""
    x: np.ndarray
    y: np.ndarray


def centroid(thetas):
    """Arithmetic mean direction of one cluster."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.size == 0:
        raise ValueError("centroid of an empty cluster is undefined")
    return float(np.mean(thetas))


def merge_cost(count_k, mean_k, count_l, mean_l):
    """Ward cost of merging two clusters:
    N_k*N_l/(N_k+N_l) * (mean_k - mean_l)^2."""
    if count_k < 1 or count_l < 1:
        raise ValueError("cluster sizes must be >= 1")
    d = mean_k - mean_l
    return count_k * count_l / (count_k + count_l) * (d * d)


def distortion_mse(partition, thetas):
    """Mean squared deviation from each cluster's centroid, over all
    users."""
    thetas = np.asarray(thetas, dtype=float)
    if len(thetas) != len(partition.assignment):
        raise ValueError("partition does not match the feature vector")
    total = 0.0
    for k in range(partition.num_clusters):
        member_thetas = thetas[partition.members(k)]
        total += np.sum((member_thetas - np.mean(member_thetas)) ** 2)
    return float(total / len(thetas))


def ahc_run(thetas):
    """Run the full agglomerative merge sequence on the users'
    directions and record every step."""
    thetas = np.ascontiguousarray(thetas, dtype=np.float64)
    b = thetas.size
    if b < 1:
        raise ValueError("need at least one user")
    if b == 1:
        return MergeHistory(steps=(), initial_count=1)
    merge_i, merge_j, cost = ward_merge_sequence(thetas)
    steps = tuple(
        MergeStep(merged_pair=(int(merge_i[t]), int(merge_j[t])),
                  cost=float(cost[t]),
                  resulting_cluster_count=b - 1 - t)
        for t in range(b - 1))
    return MergeHistory(steps=steps, initial_count=b)


def evaluation_graph(history):
    """Merge costs re-indexed by the cluster count each merge produced."""
    b = history.initial_count
    if b < 2:
        raise ValueError("need at least two singleton clusters")
    x = np.arange(1, b)
    y = np.empty(b - 1)
    for step in history.steps:
        y[step.resulting_cluster_count - 1] = step.cost
    return EvaluationGraph(x=x, y=y)


def _line_rmse(x, y):
    # ordinary least squares through the centroid; rmse over the fitted
    # points themselves
    xm = np.mean(x)
    ym = np.mean(y)
    dx = x - xm
    var = np.sum(dx * dx)
    slope = np.sum(dx * (y - ym)) / var
    resid = y - (ym + slope * dx)
    return np.sqrt(np.mean(resid * resid))


def split_rmse(graph):
    """Weighted two-line fit quality for every candidate knee c.

    For each c in 2 .. b-3 a line is fit to the points left of the split
    (x = 1..c) and another to the right (x = c+1..b-1); the total is
    c/(b-1)*RMSE(left) + (b-c)/(b-1)*RMSE(right). Returns (cs, totals).
    """
    x = np.asarray(graph.x, dtype=float)
    y = np.asarray(graph.y, dtype=float)
    b = len(x) + 1
    if b < 5:
        raise ValueError("need at least 4 evaluation points")
    cs = np.arange(2, b - 2)
    totals = np.empty(len(cs))
    for idx, c in enumerate(cs):
        left = _line_rmse(x[:c], y[:c])
        right = _line_rmse(x[c:], y[c:])
        totals[idx] = (c * left + (b - c) * right) / (b - 1)
    return cs, totals


def l_method(graph):
    """Knee of the evaluation graph: the split with the lowest weighted
    two-line RMSE, ties toward the smaller cluster count.

    Graphs with fewer than 4 points cannot be split; those fall back to
    K = min(2, b) (the degenerate-drop rule).
    """
    b = len(graph.x) + 1
    if b < 5:
        return min(2, b)
    cs, totals = split_rmse(graph)
    return int(cs[np.argmin(totals)])


def select_partition(history, num_clusters):
    """Cut the dendrogram: replay merges until exactly num_clusters
    clusters remain, then relabel them 0..K-1 in order of their lowest
    member index."""
    b = history.initial_count
    if not 1 <= num_clusters <= b:
        raise ValueError(f"num_clusters must be in [1, {b}]")
    assignment = np.arange(b)
    for step in history.steps[:b - num_clusters]:
        i, j = step.merged_pair
        assignment[assignment == j] = i
    _, labels = np.unique(assignment, return_inverse=True)
    return Partition(assignment=labels, num_clusters=num_clusters)


def kmeans_1d(thetas, num_clusters, rng):
    """Restarted Lloyd k-means on the scalar directions.

    Means start at the directions of num_clusters distinct users; the
    best of KMEANS_RESTARTS runs by distortion wins. Deterministic for a
    fixed generator state.
    """
    thetas = np.ascontiguousarray(thetas, dtype=np.float64)
    n = thetas.size
    if not 1 <= num_clusters <= n:
        raise ValueError("num_clusters must be in [1, num_users]")
    best_partition = None
    best_mse = np.inf
    for _ in range(KMEANS_RESTARTS):
        init = rng.choice(n, size=num_clusters, replace=False)
        means = thetas[init].copy()
        assignment, _ = lloyd_cluster(thetas, means, KMEANS_MAX_ITER)
        partition = _repair_labels(assignment, num_clusters, thetas)
        mse = distortion_mse(partition, thetas)
        if mse < best_mse:
            best_mse = mse
            best_partition = partition
    return best_partition


def _repair_labels(assignment, num_clusters, thetas):
    # duplicate-heavy inputs can leave a cluster empty even after
    # re-seeding; hand each missing label the farthest point of a
    # donor cluster that keeps >= 1 members
    assignment = assignment.copy()
    counts = np.bincount(assignment, minlength=num_clusters)
    for label in range(num_clusters):
        if counts[label] > 0:
            continue
        far_p = -1
        far_d = -1.0
        for p in range(len(assignment)):
            if counts[assignment[p]] <= 1:
                continue
            members = thetas[assignment == assignment[p]]
            d = abs(thetas[p] - np.mean(members))
            if d > far_d:
                far_d = d
                far_p = p
        counts[assignment[far_p]] -= 1
        assignment[far_p] = label
        counts[label] += 1
    return Partition(assignment=assignment, num_clusters=num_clusters)
