"""Command-line front end.

Flags mirror a flat `key = value` config file (flags win on conflict).
Exit codes: 0 success, 1 invalid configuration, 2 I/O failure.
"""

import argparse
import sys

from .harness import (FROM_AHC, ExperimentConfig, run_experiment)
from .scenario import ScenarioConfig


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; that code is reserved for
    # I/O failures here
    def error(self, message):
        raise ConfigError(message)


def _build_parser():
    p = _Parser(prog="nomasim", description=__doc__)
    p.add_argument("--config", help="flat key = value config file; "
                   "explicit flags override it")
    p.add_argument("--users", type=int, help="users per drop")
    p.add_argument("--antennas", action="append", type=int,
                   help="BS antenna count (repeatable)")
    p.add_argument("--power-dbm", help="transmit power sweep, lo:step:hi "
                   "or a single value")
    p.add_argument("--drops", type=int, help="Monte Carlo drops")
    p.add_argument("--seed", type=int, help="non-negative RNG seed")
    p.add_argument("--method", action="append", choices=["ahc", "kmeans"],
                   help="clustering method (repeatable)")
    p.add_argument("--kmeans-k", help="cluster count for k-means: an "
                   f"integer or '{FROM_AHC}'")
    p.add_argument("--qos", type=float, help="minimum per-user rate, "
                   "bits/s/Hz")
    p.add_argument("--bandwidth-hz", type=float)
    p.add_argument("--noise-figure-db", type=float)
    p.add_argument("--parent-radius", type=float,
                   help="parent-point disk radius, m")
    p.add_argument("--cluster-radius", type=float,
                   help="per-cluster disk radius, m")
    p.add_argument("--expected-parents", type=float,
                   help="mean parent count (Poisson, conditioned >= 1)")
    p.add_argument("--nlos-paths", type=int,
                   help="NLOS rays per user (0 = LOS only)")
    p.add_argument("--output", help="result CSV path")
    return p


_DEFAULTS = {
    "users": 10,
    "antennas": [8],
    "power_dbm": "0:5:30",
    "drops": 500,
    "seed": 1,
    "method": ["ahc"],
    "kmeans_k": "2",
    "qos": 0.02,
    "bandwidth_hz": 2e9,
    "noise_figure_db": 10.0,
    "parent_radius": 5.0,
    "cluster_radius": 1.0,
    "expected_parents": 3.0,
    "nlos_paths": 0,
    "output": "results.csv",
}

_LIST_KEYS = {"antennas", "method"}
_TYPES = {
    "users": int, "drops": int, "seed": int, "nlos_paths": int,
    "qos": float, "bandwidth_hz": float, "noise_figure_db": float,
    "parent_radius": float, "cluster_radius": float,
    "expected_parents": float,
    "antennas": int, "method": str, "power_dbm": str, "kmeans_k": str,
    "output": str,
}


def _read_config_file(path):
    values = {}
    try:
        with open(path) as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower().replace("-", "_")
        if key not in _DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
        try:
            if key in _LIST_KEYS:
                values[key] = [_TYPES[key](v.strip())
                               for v in value.split(",")]
            else:
                values[key] = _TYPES[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    return values


def _parse_power_sweep(text):
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("power sweep must be lo:step:hi")
        try:
            lo, step, hi = (float(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"bad power sweep: {exc}") from exc
        if step <= 0 or hi < lo:
            raise ConfigError("power sweep needs step > 0 and hi >= lo")
        sweep = []
        value = lo
        while value <= hi + 1e-9:
            sweep.append(round(value, 9))
            value += step
        return tuple(sweep)
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad power sweep: {exc}") from exc


def _parse_kmeans_k(text):
    text = str(text).strip()
    if text == FROM_AHC:
        return FROM_AHC
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"kmeans-k must be an integer or "
                          f"'{FROM_AHC}'") from exc


def build_config(argv=None):
    args = _build_parser().parse_args(argv)
    values = dict(_DEFAULTS)
    if args.config:
        values.update(_read_config_file(args.config))
    for key in _DEFAULTS:
        flag_value = getattr(args, key)
        if flag_value is not None:
            values[key] = flag_value

    try:
        scenario = ScenarioConfig(
            num_users=values["users"],
            parent_disk_radius=values["parent_radius"],
            cluster_radius=values["cluster_radius"],
            expected_parent_count=values["expected_parents"],
            seed=values["seed"])
        return ExperimentConfig(
            scenario=scenario,
            antennas=tuple(values["antennas"]),
            power_sweep_dbm=_parse_power_sweep(values["power_dbm"]),
            methods=tuple(sorted(set(values["method"]))),
            kmeans_k=_parse_kmeans_k(values["kmeans_k"]),
            num_drops=values["drops"],
            seed=values["seed"],
            output_path=values["output"],
            min_rate_qos=values["qos"],
            bandwidth_hz=values["bandwidth_hz"],
            noise_figure_db=values["noise_figure_db"],
            num_nlos_paths=values["nlos_paths"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def print_summary(summary, stream=None):
    stream = sys.stdout if stream is None else stream
    header = (f"{'method':<8}{'M':>4}{'P_dBm':>8}{'drops':>7}"
              f"{'outage':>8}{'mean_rate':>12}{'ci95':>10}{'mean_K':>8}")
    print(header, file=stream)
    print("-" * len(header), file=stream)
    for row in summary:
        mean = "-" if row.mean_sum_rate is None \
            else f"{row.mean_sum_rate:.4f}"
        print(f"{row.method:<8}{row.num_antennas:>4}"
              f"{row.power_dbm:>8.1f}{row.num_drops:>7}"
              f"{row.outage_fraction:>8.3f}{mean:>12}"
              f"{row.ci_half_width:>10.4f}"
              f"{row.mean_k_selected:>8.2f}", file=stream)


def main(argv=None):
    try:
        config = build_config(argv)
    except ConfigError as exc:
        print(f"nomasim: error: {exc}", file=sys.stderr)
        return 1
    try:
        rows, summary = run_experiment(config)
    except OSError as exc:
        print(f"nomasim: I/O error: {exc}", file=sys.stderr)
        return 2
    print_summary(summary)
    if config.output_path:
        print(f"\nwrote {len(rows)} rows to {config.output_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
