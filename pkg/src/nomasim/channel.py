"""mmWave channel vectors for a uniform linear array at the BS.

Default mode keeps only the LOS path:

    h = sqrt(M) * alpha * a(theta) / (1 + d^eta_los)

with a(theta) the unit-norm ULA steering vector; optional NLOS paths add
independent complex-Gaussian rays with uniform directions.
"""

from dataclasses import dataclass

import numpy as np

# below this the Dirichlet-kernel denominator counts as the removable
# singularity (delta-theta == 0 mod 2)
_SINGULARITY_EPS = 1e-12


@dataclass(frozen=True)
class ChannelConfig:
    num_antennas: int
    pathloss_exp_los: float = 2.0
    pathloss_exp_nlos: float = 4.0
    num_nlos_paths: int = 0
    gain_variance: float = 1.0

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ValueError("num_antennas must be >= 1")
        if self.pathloss_exp_los <= 0 or self.pathloss_exp_nlos <= 0:
            raise ValueError("path loss exponents must be positive")
        if self.num_nlos_paths < 0:
            raise ValueError("num_nlos_paths must be >= 0")
        if self.gain_variance <= 0:
            raise ValueError("gain_variance must be positive")


@dataclass(frozen=True)
class ChannelVector:
    entries: np.ndarray
    owner_theta: float
    owner_gain: complex
    owner_distance: float


def _entries(h):
    return h.entries if isinstance(h, ChannelVector) else np.asarray(h)


def steering_vector(theta, num_antennas):
    """ULA response a(theta): entry m is exp(-j*pi*m*theta)/sqrt(M)."""
    if num_antennas < 1:
        raise ValueError("num_antennas must be >= 1")
    m = np.arange(num_antennas)
    return np.exp(-1j * np.pi * m * theta) / np.sqrt(num_antennas)


def complex_gain(rng, variance=1.0):
    """One circularly-symmetric complex Gaussian draw with the given
    variance (E|alpha|^2 = variance)."""
    scale = np.sqrt(variance / 2.0)
    return complex(rng.normal(0.0, scale), rng.normal(0.0, scale))


def los_channel(user, alpha, cfg):
    """LOS-only channel vector for one user."""
    a = steering_vector(user.normalized_direction_theta, cfg.num_antennas)
    scale = np.sqrt(cfg.num_antennas) * alpha \
        / (1.0 + user.distance_d ** cfg.pathloss_exp_los)
    return ChannelVector(entries=scale * a,
                         owner_theta=user.normalized_direction_theta,
                         owner_gain=complex(alpha),
                         owner_distance=user.distance_d)


def full_channel(user, rng, cfg):
    """Multipath channel: LOS term plus cfg.num_nlos_paths NLOS rays.

    The LOS gain and every NLOS (gain, direction) pair are drawn from
    rng, so a fixed generator state fixes the vector. With zero NLOS
    paths this reduces to los_channel with the drawn LOS gain.
    """
    alpha = complex_gain(rng, cfg.gain_variance)
    los = los_channel(user, alpha, cfg)
    if cfg.num_nlos_paths == 0:
        return los
    entries = los.entries.copy()
    nlos_denom = 1.0 + user.distance_d ** cfg.pathloss_exp_nlos
    for _ in range(cfg.num_nlos_paths):
        alpha_l = complex_gain(rng, cfg.gain_variance)
        theta_l = rng.uniform(-1.0, 1.0)
        entries += (np.sqrt(cfg.num_antennas) * alpha_l / nlos_denom) \
            * steering_vector(theta_l, cfg.num_antennas)
    return ChannelVector(entries=entries,
                         owner_theta=user.normalized_direction_theta,
                         owner_gain=alpha,
                         owner_distance=user.distance_d)


def cosine_similarity(h_i, h_j):
    """|h_i^H h_j| / (||h_i|| ||h_j||), in [0, 1]."""
    vi = _entries(h_i)
    vj = _entries(h_j)
    ni = np.linalg.norm(vi)
    nj = np.linalg.norm(vj)
    if ni == 0.0 or nj == 0.0:
        raise ValueError("cosine similarity of a zero vector is undefined")
    return float(np.abs(np.vdot(vi, vj)) / (ni * nj))


def dirichlet_similarity(theta_i, theta_j, num_antennas):
    """Closed form of |a(theta_i)^H a(theta_j)|:

        (1/M) * |sin(pi*M*dt/2) / sin(pi*dt/2)|,  dt = theta_i - theta_j,

    with value 1 at the removable singularity dt == 0 (mod 2).
    """
    if num_antennas < 1:
        raise ValueError("num_antennas must be >= 1")
    dt = theta_i - theta_j
    denom = np.sin(np.pi * dt / 2.0)
    if abs(denom) < _SINGULARITY_EPS:
        return 1.0
    return float(abs(np.sin(np.pi * num_antennas * dt / 2.0) / denom)
                 / num_antennas)


def noise_power(bandwidth_hz, noise_figure_db):
    """Thermal noise power in watts: -174 + 10*log10(W) + Nf dBm."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    dbm = -174.0 + 10.0 * np.log10(bandwidth_hz) + noise_figure_db
    return float(10.0 ** ((dbm - 30.0) / 10.0))
