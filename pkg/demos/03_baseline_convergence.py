"""Benign network converging toward the omniscient ranking.

A reduced network keeps this under a minute; pass --full for 100 nodes and
10 000 ticks.

Run: python3 demos/03_baseline_convergence.py [--full]
"""

import sys

from grank.catalog import load_fixture
from grank.simulator import ExperimentConfig, run_experiment

full = "--full" in sys.argv
cfg = ExperimentConfig(scenario="baseline", F=0.0, seed=0,
                       n_nodes=100 if full else 50,
                       total_ticks=10_000 if full else 8_000,
                       eval_interval=100 if full else 400)


def show(snap):
    bar = "#" * int(snap.mean_distance)
    print(f"tick {snap.tick:6d}  distance {snap.mean_distance:6.2f}  "
          f"top song {snap.median_top_song_pct:5.1f}%  log {snap.mean_clicklog_size:7.0f}  {bar}")


print(f"{cfg.n_nodes} nodes, {cfg.total_ticks} ticks, F={cfg.F:g}")
snaps = run_experiment(cfg, load_fixture(), progress=show)
print(f"\nfinal/first distance ratio: {snaps[-1].mean_distance / snaps[0].mean_distance:.3f}")
