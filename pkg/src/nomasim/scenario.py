"""Clustered user drops on a disk around the base station.

Parent points follow a Poisson point process on a disk (count conditioned
to be >= 1); users attach uniformly to parents and scatter uniformly on a
smaller disk around them. The base station sits at the origin.
"""

from dataclasses import dataclass, field

import numpy as np

_MAX_PARENT_RESAMPLES = 10 ** 6


@dataclass(frozen=True)
class ScenarioConfig:
    num_users: int
    parent_disk_radius: float = 5.0
    cluster_radius: float = 1.0
    expected_parent_count: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.num_users < 1:
            raise ValueError("num_users must be >= 1")
        if self.parent_disk_radius <= 0 or self.cluster_radius <= 0:
            raise ValueError("disk radii must be positive")
        if self.expected_parent_count <= 0:
            raise ValueError("expected_parent_count must be positive")


@dataclass(frozen=True)
class UserGeometry:
    """Position plus the derived quantities the channel model needs.

    aod_phi is the planar angle of departure seen from the BS, in
    [0, 2*pi); normalized_direction_theta = sin(aod_phi) for
    half-wavelength antenna spacing.
    """
    position: np.ndarray
    distance_d: float
    aod_phi: float
    normalized_direction_theta: float


@dataclass(frozen=True)
class Scenario:
    users: tuple
    parent_assignment: np.ndarray
    parents: np.ndarray = field(repr=False, default=None)

    @property
    def num_users(self):
        return len(self.users)

    @property
    def thetas(self):
        """Normalized directions of all users, as one array."""
        return np.array([u.normalized_direction_theta for u in self.users])


def _uniform_disk(center, radius, count, rng):
    # inverse-CDF radial sampling: P(r <= x) = (x/R)^2
    r = radius * np.sqrt(rng.random(count))
    ang = rng.uniform(0.0, 2.0 * np.pi, count)
    pts = np.column_stack((r * np.cos(ang), r * np.sin(ang)))
    return pts + np.asarray(center, dtype=float)


def sample_parent_points(config, rng):
    """Parent cluster centers: uniform on the parent disk, Poisson count
    conditioned on being >= 1 (zero draws are rejected)."""
    for _ in range(_MAX_PARENT_RESAMPLES):
        count = rng.poisson(config.expected_parent_count)
        if count >= 1:
            return _uniform_disk((0.0, 0.0), config.parent_disk_radius,
                                 count, rng)
    raise RuntimeError("parent count resampling failed to draw a nonzero "
                       "Poisson variate")


def sample_cluster_users(parent, cluster_radius, count, rng):
    """`count` i.i.d. positions uniform on the disk of radius
    `cluster_radius` around `parent`."""
    if count < 0:
        raise ValueError("count must be >= 0")
    if cluster_radius <= 0:
        raise ValueError("cluster_radius must be positive")
    return _uniform_disk(parent, cluster_radius, count, rng)


def user_geometry(position):
    """Distance, angle of departure and normalized direction for one user.

    A user exactly at the origin gets aod_phi = 0 by convention.
    """
    position = np.asarray(position, dtype=float)
    d = float(np.hypot(position[0], position[1]))
    if d == 0.0:
        phi = 0.0
    else:
        phi = float(np.arctan2(position[1], position[0])) % (2.0 * np.pi)
    return UserGeometry(position=position, distance_d=d, aod_phi=phi,
                        normalized_direction_theta=float(np.sin(phi)))


def generate_scenario(config, rng=None):
    """Draw one full user drop.

    Parents are sampled first, then each of the num_users users picks a
    parent uniformly at random and scatters on that parent's disk. With
    rng=None a fresh generator is seeded from config.seed, making the
    drop a pure function of the config.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    parents = sample_parent_points(config, rng)
    assignment = rng.integers(0, len(parents), size=config.num_users)
    users = []
    for parent_idx in assignment:
        pos = sample_cluster_users(parents[parent_idx],
                                   config.cluster_radius, 1, rng)[0]
        users.append(user_geometry(pos))
    return Scenario(users=tuple(users), parent_assignment=assignment,
                    parents=parents)
