"""Spread clicklogs through a small network with pull and with push gossip.

Run: python3 demos/02_gossip_dissemination.py
"""

import numpy as np

from grank.catalog import load_fixture
from grank.gossip import deliver, pull, push_gossip
from grank.simulator import ExperimentConfig, initialize_network

catalog = load_fixture()
N, ROUNDS = 12, 60


def coverage(nodes):
    everything = set().union(*(n.clicklog.keys() for n in nodes))
    return np.mean([len(n.clicklog) / len(everything) for n in nodes])


for mode in ("pull", "push"):
    rng = np.random.default_rng(1)
    nodes = initialize_network(ExperimentConfig(n_nodes=N), catalog, rng)
    sent = 0
    print(f"\n{mode} gossip, {N} nodes; each starts knowing one neighbour")
    for r in range(1, ROUNDS + 1):
        node = nodes[int(rng.integers(N))]
        if mode == "pull":
            peers = node.sorted_peers()
            sent += pull(node, nodes[peers[int(rng.integers(len(peers)))]]).byte_size
        else:
            for msg in push_gossip(node, 1, rng):
                deliver(msg, nodes[msg.target])
                sent += msg.byte_size
        if r % 10 == 0:
            peers = np.mean([len(n.known_peers) for n in nodes])
            print(f"  round {r:3d}: mean log coverage {coverage(nodes):5.1%}, "
                  f"mean known peers {peers:4.1f}, {sent / 1e3:8.1f} kB sent")

# Progress tracking means a repeated pull with nothing new costs nothing.
a, b = nodes[0], nodes[1]
pull(a, b)
print("\nrepeat pull with no new entries carries", len(pull(a, b).entries), "entries")
