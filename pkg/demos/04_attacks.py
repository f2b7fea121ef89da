"""Compare the attack scenarios on a reduced network.

Everything is seeded, so the numbers below are the same on every machine.

Run: python3 demos/04_attacks.py
"""

from grank.catalog import load_fixture
from grank.simulator import ExperimentConfig, run_experiment

catalog = load_fixture()
common = dict(n_nodes=30, total_ticks=3000, bootstrap_tick=750, attack_tick=1500,
              eval_interval=100, seed=2)

print(f"{'scenario':<16}{'F':>3}{'adv':>5}{'pre-attack min':>16}{'peak after':>12}{'final':>8}")
for scenario in ("baseline", "targeted_sybil", "inflation", "push_vs_pull", "epic_sybil"):
    for F in (0.0, 1.0):
        cfg = ExperimentConfig(scenario=scenario, F=F, **common)
        snaps = run_experiment(cfg, catalog)
        pre = min(s.mean_distance for s in snaps if s.tick < cfg.attack_tick)
        post = max(s.mean_distance for s in snaps if s.tick >= cfg.attack_tick)
        print(f"{scenario:<16}{F:>3g}{cfg.n_adversaries:>5}{pre:>16.2f}{post:>12.2f}"
              f"{snaps[-1].mean_distance:>8.2f}")

# Distances are measured against the ranking implied by every click in the
# network, adversarial ones included, so an attack moves the target as well as
# the local rankings.
