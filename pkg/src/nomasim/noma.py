"""Per-cluster beams and QoS-constrained NOMA power allocation.

Each cluster gets one beam steered at its centroid direction and an
equal share of the transmit power. Inside a cluster, users are ordered
by effective gain for SIC; every non-strongest user is pinned exactly at
the minimum QoS rate by a closed-form power split and the strongest user
takes the residual.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel import steering_vector
from .clustering import centroid


@dataclass(frozen=True)
class NomaConfig:
    total_power: float
    noise_power: float
    min_rate_qos: float = 0.02

    def __post_init__(self):
        if self.total_power <= 0:
            raise ValueError("total_power must be positive")
        if self.noise_power <= 0:
            raise ValueError("noise_power must be positive")
        if self.min_rate_qos < 0:
            raise ValueError("min_rate_qos must be >= 0")


@dataclass(frozen=True)
class Beam:
    cluster_index: int
    weights: np.ndarray
    power: float


@dataclass(frozen=True)
class ClusterAllocation:
    """Power split of one cluster. sic_order holds the member user
    indices sorted by effective gain descending; betas align with it."""
    sic_order: np.ndarray
    betas: np.ndarray
    feasible: bool


@dataclass(frozen=True)
class RateReport:
    per_user_rate: np.ndarray
    sum_rate: float
    outage: bool
    num_clusters: int


def beamformer(cluster_thetas, num_antennas):
    """Beam weights for one cluster: the steering vector at its centroid
    direction."""
    return steering_vector(centroid(cluster_thetas), num_antennas)


def effective_gain(h, w):
    """|h^H w|^2 of a channel against beam weights."""
    entries = getattr(h, "entries", h)
    entries = np.asarray(entries)
    w = np.asarray(w)
    if entries.shape != w.shape:
        raise ValueError("channel and beam dimensions differ")
    return float(np.abs(np.vdot(entries, w)) ** 2)


def split_inter_cluster_power(num_clusters, total_power):
    """Equal split of the power budget over the clusters."""
    if num_clusters < 1:
        raise ValueError("num_clusters must be >= 1")
    return np.full(num_clusters, total_power / num_clusters)


def allocate_cluster(gains, inter_interference, p_k, cfg):
    """QoS-tight power split factors for one cluster.

    Members are sorted by gain descending (the SIC order). Walking from
    the weakest up, each beta is the closed-form solution that makes
    that user's rate exactly min_rate_qos given the betas of the users
    below it; the strongest user gets the remainder. Infeasible when the
    remainder is not positive or leaves the strongest user short of the
    QoS target. A zero-gain member in a multi-user cluster is infeasible
    outright (it gets beta = 0).
    """
    gains = np.asarray(gains, dtype=float)
    inter = np.asarray(inter_interference, dtype=float)
    n = gains.size
    if n < 1:
        raise ValueError("cluster must be nonempty")
    if p_k <= 0:
        raise ValueError("cluster power must be positive")
    order = np.argsort(-gains, kind="stable")
    g = gains[order]
    intf = inter[order]
    eps = 2.0 ** cfg.min_rate_qos - 1.0

    betas = np.zeros(n)
    zero_gain_member = False
    tail = 0.0  # sum of betas already fixed below position i
    for i in range(n - 1, 0, -1):
        if g[i] == 0.0:
            zero_gain_member = True
            continue
        betas[i] = eps * (p_k * g[i] * (1.0 - tail) + intf[i]
                          + cfg.noise_power) / (p_k * g[i] * (1.0 + eps))
        tail += betas[i]
    betas[0] = 1.0 - tail

    feasible = betas[0] > 0.0 and not (zero_gain_member
                                       and cfg.min_rate_qos > 0)
    if feasible:
        strongest_rate = user_rate(0, g, betas, p_k, intf[0],
                                   cfg.noise_power)
        feasible = strongest_rate >= cfg.min_rate_qos
    return ClusterAllocation(sic_order=order, betas=betas,
                             feasible=feasible)


def user_rate(i, gains, betas, p_k, inter_interference_i, sigma2):
    """Achievable rate of the user at SIC position i (0 = strongest).

    SINR_i = p_k*beta_i*g_i / (p_k*g_i*sum(beta_j, j < i) + I_i + sigma2):
    signals of stronger users cannot be cancelled, those of weaker users
    are removed by SIC. Non-physical SINRs from infeasible splits are
    clamped to rate 0.
    """
    intra = betas[:i].sum() * p_k * gains[i]
    sinr = p_k * betas[i] * gains[i] / (intra + inter_interference_i
                                        + sigma2)
    if sinr <= -1.0:
        return 0.0
    return max(0.0, math.log2(1.0 + sinr))


def evaluate_partition(scenario, channels, partition, cfg):
    """Rates of every user under one clustering of the drop.

    Builds a centroid beam and equal power share per cluster, computes
    each user's inter-cluster interference, allocates power inside every
    cluster and sums the rates. A drop with any infeasible cluster is
    flagged as an outage (rates are still reported).
    """
    thetas = scenario.thetas
    num_users = len(thetas)
    num_clusters = partition.num_clusters
    matrix = np.stack([getattr(h, "entries", h) for h in channels])
    num_antennas = matrix.shape[1]

    powers = split_inter_cluster_power(num_clusters, cfg.total_power)
    beams = [
        Beam(cluster_index=k,
             weights=beamformer(thetas[partition.members(k)], num_antennas),
             power=powers[k])
        for k in range(num_clusters)
    ]
    weight_matrix = np.stack([b.weights for b in beams], axis=1)
    gains = np.abs(matrix.conj() @ weight_matrix) ** 2  # users x clusters

    # interference at user u: power-weighted gains of every other beam
    total = gains @ powers
    own = gains[np.arange(num_users), partition.assignment] \
        * powers[partition.assignment]
    interference = total - own

    rates = np.zeros(num_users)
    outage = False
    for k in range(num_clusters):
        members = partition.members(k)
        alloc = allocate_cluster(gains[members, k], interference[members],
                                 powers[k], cfg)
        outage = outage or not alloc.feasible
        g = gains[members, k][alloc.sic_order]
        intf = interference[members][alloc.sic_order]
        for i in range(len(members)):
            rates[members[alloc.sic_order[i]]] = user_rate(
                i, g, alloc.betas, powers[k], intf[i], cfg.noise_power)
    return RateReport(per_user_rate=rates, sum_rate=float(rates.sum()),
                      outage=outage, num_clusters=num_clusters)
