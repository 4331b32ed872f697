"""End-to-end acceptance checks.

Each test is one release criterion; its pass/fail line in the pytest -v
output is the acceptance record. Tolerances are stated inline. The
simulation-scale checks share module-scoped runs so the whole module
stays within desk runtime.
"""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from nomasim.channel import (ChannelConfig, complex_gain, cosine_similarity,
                             dirichlet_similarity, full_channel, los_channel,
                             noise_power)
from nomasim.clustering import (EvaluationGraph, ahc_run, evaluation_graph,
                                l_method, merge_cost, select_partition,
                                split_rmse)
from nomasim.harness import ExperimentConfig, dbm_to_watts, run_experiment
from nomasim.noma import (NomaConfig, allocate_cluster, beamformer,
                          evaluate_partition, split_inter_cluster_power,
                          user_rate)
from nomasim.scenario import ScenarioConfig, generate_scenario

Z95 = 1.959963984540054
POWERS = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)


def _paired_gap(rows_a, rows_b):
    """Mean and 95% half-width of per-drop differences, both feasible."""
    by_a = {r.drop_index: r for r in rows_a}
    by_b = {r.drop_index: r for r in rows_b}
    diffs = [by_a[d].sum_rate - by_b[d].sum_rate
             for d in sorted(set(by_a) & set(by_b))
             if not by_a[d].outage and not by_b[d].outage]
    n = len(diffs)
    mean = sum(diffs) / n
    sd = math.sqrt(sum((x - mean) ** 2 for x in diffs) / (n - 1))
    return mean, Z95 * sd / math.sqrt(n), n


@pytest.fixture(scope="module")
def fig3_run():
    """Paired 500-drop sweep over antennas and both methods."""
    config = ExperimentConfig(
        scenario=ScenarioConfig(num_users=10),
        antennas=(2, 4, 8),
        power_sweep_dbm=POWERS,
        methods=("ahc", "kmeans"),
        kmeans_k=2,
        num_drops=500,
        seed=1)
    rows, summary = run_experiment(config)
    cells = {}
    for row in rows:
        key = (row.method, row.num_antennas, row.power_dbm)
        cells.setdefault(key, []).append(row)
    means = {(s.method, s.num_antennas, s.power_dbm): s.mean_sum_rate
             for s in summary}
    return cells, means


@pytest.fixture(scope="module")
def subset_run():
    """Larger paired run at M = 8: the adaptive-K subset is only a few
    percent of drops, so statistical power needs more of them."""
    config = ExperimentConfig(
        scenario=ScenarioConfig(num_users=10),
        antennas=(8,),
        power_sweep_dbm=POWERS,
        methods=("ahc", "kmeans"),
        kmeans_k=2,
        num_drops=5000,
        seed=1)
    rows, _ = run_experiment(config)
    return rows


@pytest.fixture(scope="module")
def parity_run():
    """500 drops at M = 8 with k-means fed the per-drop adaptive K."""
    config = ExperimentConfig(
        scenario=ScenarioConfig(num_users=10),
        antennas=(8,),
        power_sweep_dbm=POWERS,
        methods=("ahc", "kmeans"),
        kmeans_k="from-ahc",
        num_drops=500,
        seed=1)
    _, summary = run_experiment(config)
    return {(s.method, s.power_dbm): s.mean_sum_rate for s in summary}


def test_criterion_01_closed_form_similarity_matches_channels():
    # |a(ti)^H a(tj)| computed through full LOS channel vectors must
    # equal the Dirichlet closed form within 1e-10 on 1000 random cases
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(1000):
        ti, tj = rng.uniform(-1.0, 1.0, 2)
        m = int(rng.choice([2, 4, 8]))
        cfg = ChannelConfig(num_antennas=m)
        geom_i = _geometry_at(ti, float(rng.uniform(0.5, 5.0)))
        geom_j = _geometry_at(tj, float(rng.uniform(0.5, 5.0)))
        h_i = los_channel(geom_i, complex_gain(rng, 1.0), cfg)
        h_j = los_channel(geom_j, complex_gain(rng, 1.0), cfg)
        err = abs(cosine_similarity(h_i, h_j)
                  - dirichlet_similarity(ti, tj, m))
        worst = max(worst, err)
    assert worst <= 1e-10, f"worst similarity mismatch {worst:.3e}"


def _geometry_at(theta, distance):
    from nomasim.scenario import user_geometry
    phi = math.asin(theta)
    return user_geometry(
        distance * np.array([math.cos(phi), math.sin(phi)]))


def test_criterion_02_merge_cost_equals_sse_increase():
    # every recorded Ward cost must equal the SSE increase of that
    # merge within 1e-12, over 200 random drops with U <= 12
    def sse(values):
        values = np.asarray(values)
        return float(np.sum((values - values.mean()) ** 2))

    rng = np.random.default_rng(202)
    worst = 0.0
    for drop in range(200):
        users = int(rng.integers(2, 13))
        scenario = generate_scenario(
            ScenarioConfig(num_users=users), np.random.default_rng([202, drop]))
        thetas = scenario.thetas
        clusters = {i: [i] for i in range(users)}
        for step in ahc_run(thetas).steps:
            i, j = step.merged_pair
            merged = clusters[i] + clusters[j]
            increase = (sse(thetas[merged]) - sse(thetas[clusters[i]])
                        - sse(thetas[clusters[j]]))
            worst = max(worst, abs(step.cost - increase))
            clusters[i] = merged
            del clusters[j]
    assert worst <= 1e-12, f"worst Ward identity error {worst:.3e}"


def test_criterion_03_greedy_choice_matches_exhaustive_argmin():
    # each executed merge must be the exhaustive pairwise argmin, with
    # ties resolved to the lowest (i, j) cluster-id pair; exact match
    import itertools

    rng = np.random.default_rng(303)
    for _ in range(100):
        users = int(rng.integers(2, 9))
        thetas = rng.uniform(-1.0, 1.0, users)
        state = {i: [i] for i in range(users)}
        for step in ahc_run(thetas).steps:
            best = None
            for a, b in itertools.combinations(sorted(state), 2):
                cost = merge_cost(
                    len(state[a]), float(np.mean(thetas[state[a]])),
                    len(state[b]), float(np.mean(thetas[state[b]])))
                if best is None or cost < best[0]:
                    best = (cost, (a, b))
            assert step.merged_pair == best[1]
            i, j = step.merged_pair
            state[i] = state[i] + state[j]
            del state[j]


def test_criterion_04_knee_selection_exact_and_noise_robust():
    # two-segment graph, 9 points, slopes -2 then -0.2 with a corner at
    # x = 4: the clean selection is exactly 4 with zero total RMSE
    # (within 1e-12); under additive uniform noise of 1% of the y-range
    # the selection stays 4 in at least 95% of 1000 trials
    x = np.arange(1, 10, dtype=float)
    y = np.where(x <= 4, 9.0 - 2.0 * (x - 1), 2.0 - 0.2 * (x - 5))
    graph = EvaluationGraph(x=x, y=y)
    assert l_method(graph) == 4
    cs, totals = split_rmse(graph)
    assert totals[list(cs).index(4)] <= 1e-12

    amplitude = 0.01 * (y.max() - y.min())
    rng = np.random.default_rng(404)
    hits = 0
    for _ in range(1000):
        noisy = EvaluationGraph(
            x=x, y=y + rng.uniform(-amplitude, amplitude, y.size))
        hits += l_method(noisy) == 4
    assert hits >= 950, f"knee recovered in only {hits}/1000 noisy trials"


def test_criterion_05_allocation_qos_tight_and_matches_bisection():
    # 500 feasible drops at U = 10, M = 8, P = 20 dBm, QoS 0.02,
    # noise from 2 GHz bandwidth and 10 dB noise figure:
    #  - every non-strongest user's rate within 1e-9 of 0.02
    #  - each cluster's splits sum to 1 within 1e-9
    #  - closed-form splits match a bisection solve within 1e-9
    sigma2 = noise_power(2e9, 10.0)
    p_total = dbm_to_watts(20.0)
    channel_cfg = ChannelConfig(num_antennas=8)
    noma_cfg = NomaConfig(total_power=p_total, noise_power=sigma2,
                          min_rate_qos=0.02)
    worst_rate = worst_sum = worst_beta = 0.0
    feasible = 0
    drop = 0
    while feasible < 500:
        scenario = generate_scenario(
            ScenarioConfig(num_users=10), np.random.default_rng([505, drop]))
        channels = [full_channel(u, np.random.default_rng([505, drop, 1, i]),
                                 channel_cfg)
                    for i, u in enumerate(scenario.users)]
        history = ahc_run(scenario.thetas)
        partition = select_partition(
            history, l_method(evaluation_graph(history)))
        report = evaluate_partition(scenario, channels, partition, noma_cfg)
        drop += 1
        if report.outage:
            continue
        feasible += 1

        beams = np.array(
            [beamformer(scenario.thetas[partition.members(k)], 8)
             for k in range(partition.num_clusters)]).T
        h_matrix = np.array([c.entries for c in channels])
        gains = np.abs(h_matrix.conj() @ beams) ** 2
        powers = split_inter_cluster_power(partition.num_clusters, p_total)
        for k in range(partition.num_clusters):
            members = partition.members(k)
            inter = gains[members] @ powers - gains[members, k] * powers[k]
            alloc = allocate_cluster(gains[members, k], inter, powers[k],
                                     noma_cfg)
            assert alloc.feasible
            worst_sum = max(worst_sum, abs(alloc.betas.sum() - 1.0))

            order = np.argsort(-gains[members, k], kind="stable")
            sorted_gains = gains[members, k][order]
            sorted_inter = inter[order]
            for i in range(1, len(members)):
                rate = user_rate(i, sorted_gains, alloc.betas, powers[k],
                                 sorted_inter[i], sigma2)
                worst_rate = max(worst_rate, abs(rate - 0.02))
            oracle = _bisection_splits(sorted_gains, sorted_inter,
                                       powers[k], sigma2, 0.02)
            worst_beta = max(worst_beta,
                             float(np.max(np.abs(alloc.betas - oracle))))
    assert worst_rate <= 1e-9, f"worst QoS deviation {worst_rate:.3e}"
    assert worst_sum <= 1e-9, f"worst split-sum deviation {worst_sum:.3e}"
    assert worst_beta <= 1e-9, f"worst bisection mismatch {worst_beta:.3e}"


def _bisection_splits(gains, inter, p_k, sigma2, r_min):
    """Independent allocation oracle: solve each weak user's
    rate-equals-QoS condition by bisection on the rate function."""
    n = len(gains)
    betas = np.zeros(n)
    for i in range(n - 1, 0, -1):
        tail = betas[i + 1:].sum()
        lo, hi = 0.0, 1.0 - tail
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            trial = betas.copy()
            trial[i] = mid
            trial[0] = 1.0 - tail - mid
            if user_rate(i, gains, trial, p_k, inter[i], sigma2) < r_min:
                lo = mid
            else:
                hi = mid
        betas[i] = 0.5 * (lo + hi)
    betas[0] = 1.0 - betas[1:].sum()
    return betas


def test_criterion_06_sum_rate_increases_with_antennas(fig3_run):
    # paired 500-drop means: 8 > 4 > 2 antennas at every power, each gap
    # larger than the 95% half-width of the paired per-drop differences
    cells, _ = fig3_run
    for power in POWERS:
        for m_hi, m_lo in ((8, 4), (4, 2)):
            gap, half_width, pairs = _paired_gap(
                cells[("ahc", m_hi, power)], cells[("ahc", m_lo, power)])
            assert gap > 0, f"M={m_hi} not above M={m_lo} at {power} dBm"
            assert gap > half_width, (
                f"gap {gap:.3f} within noise {half_width:.3f} "
                f"(M={m_hi} vs {m_lo}, {power} dBm, n={pairs})")


def test_criterion_07_method_order_flips_with_beam_width(fig3_run):
    # adaptive clustering wins with narrow beams (M = 8) and the fixed
    # two-cluster baseline wins with wide beams (M = 2), at every power
    _, means = fig3_run
    for power in POWERS:
        assert means[("ahc", 8, power)] >= means[("kmeans", 8, power)], (
            f"baseline above adaptive at M=8, {power} dBm")
        assert means[("kmeans", 2, power)] >= means[("ahc", 2, power)], (
            f"adaptive above baseline at M=2, {power} dBm")


def test_criterion_08_adaptive_k_pays_off_when_k_exceeds_two(subset_run):
    # restricted to drops where the knee picks K > 2 at M = 8, the
    # adaptive method must beat the K = 2 baseline by more than the 95%
    # half-width of the paired differences, at every power
    by_key = {}
    for row in subset_run:
        by_key.setdefault((row.method, row.power_dbm), []).append(row)
    chosen_k = {r.drop_index: r.k_selected
                for r in by_key[("ahc", POWERS[0])]}
    subset = {d for d, k in chosen_k.items() if k > 2}
    assert len(subset) >= 30, f"only {len(subset)} adaptive-K drops"
    for power in POWERS:
        ahc_rows = [r for r in by_key[("ahc", power)]
                    if r.drop_index in subset]
        km_rows = [r for r in by_key[("kmeans", power)]
                   if r.drop_index in subset]
        margin, half_width, pairs = _paired_gap(ahc_rows, km_rows)
        assert margin > half_width, (
            f"margin {margin:.3f} within noise {half_width:.3f} "
            f"at {power} dBm (n={pairs})")


def test_criterion_09_baseline_with_adaptive_k_reaches_parity(parity_run):
    # k-means given the per-drop adaptive K must land within 10%
    # relative of the adaptive mean sum-rate at every power
    for power in POWERS:
        ahc = parity_run[("ahc", power)]
        km = parity_run[("kmeans", power)]
        relative = abs(ahc - km) / ahc
        assert relative <= 0.10, (
            f"{relative:.2%} divergence at {power} dBm")


def test_criterion_10_csv_byte_identical_across_runs(tmp_path):
    # one config, one seed: repeated runs, a different thread count, and
    # the pure-Python kernel path must produce byte-identical CSVs
    args = ["--users", "10", "--antennas", "2", "--antennas", "8",
            "--power-dbm", "0:15:30", "--drops", "25", "--seed", "7",
            "--method", "ahc", "--method", "kmeans"]
    variants = {
        "base": {},
        "repeat": {},
        "threads": {"NUMBA_NUM_THREADS": "1"},
        "pure_python": {"NOMASIM_NO_NUMBA": "1"},
    }
    outputs = {}
    for name, extra_env in variants.items():
        out = tmp_path / f"{name}.csv"
        env = dict(os.environ, **extra_env)
        proc = subprocess.run(
            [sys.executable, "-m", "nomasim.cli", *args,
             "--output", str(out)],
            capture_output=True, text=True, env=env, timeout=300)
        assert proc.returncode == 0, proc.stderr
        outputs[name] = out.read_bytes()
    assert outputs["repeat"] == outputs["base"]
    assert outputs["threads"] == outputs["base"]
    assert outputs["pure_python"] == outputs["base"]
