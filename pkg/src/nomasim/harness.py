"""Seeded Monte Carlo sweeps over transmit power, antenna count and
clustering method, with CSV output.

Every drop owns RNG substreams derived from (seed, drop index), so the
scenario and channel realizations are identical for every method, power
and antenna count inside a drop (paired comparisons) and results do not
depend on execution order.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig, full_channel, noise_power
from .clustering import ahc_run, evaluation_graph, kmeans_1d, l_method, \
    select_partition
from .noma import NomaConfig, evaluate_partition
from .scenario import ScenarioConfig, generate_scenario

METHODS = ("ahc", "kmeans")
FROM_AHC = "from-ahc"
CSV_HEADER = ("drop,method,M,power_dbm,K_selected,sum_rate_bps_hz,"
              "outage,min_user_rate_bps_hz")

_Z95 = 1.959963984540054


def dbm_to_watts(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig
    antennas: tuple = (8,)
    power_sweep_dbm: tuple = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    methods: tuple = ("ahc",)
    kmeans_k: object = 2          # int, or FROM_AHC
    num_drops: int = 500
    seed: int = 1
    output_path: str = None      # None: do not write a file
    min_rate_qos: float = 0.02
    bandwidth_hz: float = 2e9
    noise_figure_db: float = 10.0
    pathloss_exp_los: float = 2.0
    pathloss_exp_nlos: float = 4.0
    num_nlos_paths: int = 0
    gain_variance: float = 1.0

    def __post_init__(self):
        if self.num_drops < 1:
            raise ValueError("num_drops must be >= 1")
        if len(self.power_sweep_dbm) == 0:
            raise ValueError("power sweep must be nonempty")
        if len(self.antennas) == 0 or any(m < 1 for m in self.antennas):
            raise ValueError("need at least one antenna count >= 1")
        if len(self.methods) == 0 or any(m not in METHODS
                                         for m in self.methods):
            raise ValueError(f"methods must be a nonempty subset of "
                             f"{METHODS}")
        if self.kmeans_k != FROM_AHC:
            if not isinstance(self.kmeans_k, int) \
                    or not 1 <= self.kmeans_k <= self.scenario.num_users:
                raise ValueError("kmeans_k must be 'from-ahc' or an "
                                 "integer in [1, num_users]")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")

    def channel_config(self, num_antennas):
        return ChannelConfig(num_antennas=num_antennas,
                             pathloss_exp_los=self.pathloss_exp_los,
                             pathloss_exp_nlos=self.pathloss_exp_nlos,
                             num_nlos_paths=self.num_nlos_paths,
                             gain_variance=self.gain_variance)

    @property
    def noise_power_watts(self):
        return noise_power(self.bandwidth_hz, self.noise_figure_db)


@dataclass(frozen=True)
class ResultRow:
    drop_index: int
    method: str
    num_antennas: int
    power_dbm: float
    k_selected: int
    sum_rate: float
    outage: bool
    min_user_rate: float


def _substream(seed, drop_index, *tag):
    return np.random.default_rng([seed, drop_index, *tag])


def choose_num_clusters(history):
    """AHC cluster count: knee of the merge-cost graph, with the
    documented small-drop fallbacks (single user -> 1)."""
    if history.initial_count == 1:
        return 1
    return l_method(evaluation_graph(history))


def run_drop(config, drop_index):
    """All result rows of one drop (every method x antenna x power)."""
    scenario = generate_scenario(config.scenario,
                                 _substream(config.seed, drop_index, 0))
    thetas = scenario.thetas

    k_ahc = None
    history = None
    if "ahc" in config.methods or config.kmeans_k == FROM_AHC:
        history = ahc_run(thetas)
        k_ahc = choose_num_clusters(history)

    partitions = {}
    if "ahc" in config.methods:
        partitions["ahc"] = (select_partition(history, k_ahc), k_ahc)
    if "kmeans" in config.methods:
        k = k_ahc if config.kmeans_k == FROM_AHC else config.kmeans_k
        partitions["kmeans"] = (
            kmeans_1d(thetas, k, _substream(config.seed, drop_index, 2)), k)

    sigma2 = config.noise_power_watts
    rows = []
    for num_antennas in config.antennas:
        ch_cfg = config.channel_config(num_antennas)
        # per-user substreams recreated per antenna count, so the drawn
        # path gains/directions are shared across the antenna sweep
        channels = [
            full_channel(user, _substream(config.seed, drop_index, 1, u),
                         ch_cfg)
            for u, user in enumerate(scenario.users)
        ]
        for method, (partition, k_used) in partitions.items():
            for power_dbm in config.power_sweep_dbm:
                noma_cfg = NomaConfig(total_power=dbm_to_watts(power_dbm),
                                      noise_power=sigma2,
                                      min_rate_qos=config.min_rate_qos)
                report = evaluate_partition(scenario, channels, partition,
                                            noma_cfg)
                rows.append(ResultRow(
                    drop_index=drop_index,
                    method=method,
                    num_antennas=num_antennas,
                    power_dbm=float(power_dbm),
                    k_selected=k_used,
                    sum_rate=report.sum_rate,
                    outage=report.outage,
                    min_user_rate=float(report.per_user_rate.min())))
    return rows


def run_experiment(config):
    """Run the full sweep; returns (rows, summary) and writes the CSV
    when the config names an output path."""
    out = None
    if config.output_path is not None:
        # fail on an unwritable path before any computation happens
        out = open(config.output_path, "w", newline="")
    try:
        rows = []
        for drop_index in range(config.num_drops):
            rows.extend(run_drop(config, drop_index))
        rows.sort(key=lambda r: (r.drop_index, r.method, r.num_antennas,
                                 r.power_dbm))
        if out is not None:
            _write_csv(out, rows)
    finally:
        if out is not None:
            out.close()
    return rows, summarize(rows)


def _fmt(value):
    return format(value, ".9g")


def _write_csv(handle, rows):
    handle.write(CSV_HEADER + "\n")
    for r in rows:
        handle.write(",".join([
            str(r.drop_index), r.method, str(r.num_antennas),
            _fmt(r.power_dbm), str(r.k_selected), _fmt(r.sum_rate),
            str(int(r.outage)), _fmt(r.min_user_rate)]) + "\n")


def write_csv(rows, path):
    with open(path, "w", newline="") as handle:
        _write_csv(handle, rows)


@dataclass(frozen=True)
class SummaryRow:
    method: str
    num_antennas: int
    power_dbm: float
    num_drops: int
    outage_fraction: float
    mean_sum_rate: float        # None when every drop was in outage
    ci_half_width: float
    mean_k_selected: float


def summarize(rows):
    """Per (method, M, power): mean sum-rate over feasible drops with a
    95% normal-approximation half-width, the outage fraction and the
    mean selected cluster count."""
    if not rows:
        raise ValueError("no rows to summarize")
    groups = {}
    for r in rows:
        groups.setdefault((r.method, r.num_antennas, r.power_dbm),
                          []).append(r)
    out = []
    for (method, m, power), members in sorted(groups.items()):
        feasible = [r.sum_rate for r in members if not r.outage]
        n_feas = len(feasible)
        if n_feas == 0:
            mean = None
            half = 0.0
        else:
            mean = float(np.mean(feasible))
            half = float(_Z95 * np.std(feasible, ddof=1)
                         / np.sqrt(n_feas)) if n_feas > 1 else 0.0
        out.append(SummaryRow(
            method=method, num_antennas=m, power_dbm=power,
            num_drops=len(members),
            outage_fraction=1.0 - n_feas / len(members),
            mean_sum_rate=mean, ci_half_width=half,
            mean_k_selected=float(np.mean([r.k_selected
                                           for r in members]))))
    return out
