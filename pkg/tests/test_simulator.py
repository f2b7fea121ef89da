import math

import numpy as np
import pytest

from grank.metrics import compute_global_optimum, snapshots_csv
from grank.node import Behavior
from grank.simulator import (ConfigError, ExperimentConfig, build_world, draw_query,
                             initialize_network, run_experiment, tick)


def small(**kw):
    base = dict(n_nodes=20, total_ticks=600, bootstrap_tick=150, attack_tick=300, eval_interval=100)
    base.update(kw)
    return ExperimentConfig(**base)


def test_post_init_log_sizes(fixture_catalog):
    nodes = initialize_network(ExperimentConfig(), fixture_catalog, np.random.default_rng(0))
    for node in nodes:
        assert 39 <= len(node.clicklog) <= 44
        assert len(node.library) == 26
        assert sum(e.origin_node == node.node_id for e in node.clicklog) == 39
        assert node.local_query_counter == 39


def test_init_needs_two_nodes(fixture_catalog):
    with pytest.raises(ConfigError):
        initialize_network(ExperimentConfig(n_nodes=1), fixture_catalog, np.random.default_rng(0))


def test_seed_clicks_are_tagged_when_possible(fixture_catalog):
    nodes = initialize_network(small(), fixture_catalog, np.random.default_rng(4))
    for node in nodes:
        for e in node.clicklog:
            if e.origin_node != node.node_id:
                continue
            tagged = [k for k in node.library if e.query_term in fixture_catalog[k].tags]
            if tagged:
                assert e.clicked in tagged
            assert e.clicked in node.library


def test_same_seed_same_world(fixture_catalog):
    a = build_world(small(seed=5), fixture_catalog)
    b = build_world(small(seed=5), fixture_catalog)
    assert [n.clicklog.entries for n in a.nodes] == [n.clicklog.entries for n in b.nodes]
    assert [n.library for n in a.nodes] == [n.library for n in b.nodes]


def test_run_is_deterministic(fixture_catalog):
    cfg = small(scenario="targeted_sybil", seed=2)
    assert snapshots_csv(run_experiment(cfg, fixture_catalog)) == \
        snapshots_csv(run_experiment(cfg, fixture_catalog))


def test_different_seeds_same_schema(fixture_catalog):
    a = run_experiment(small(seed=1, total_ticks=200), fixture_catalog)
    b = run_experiment(small(seed=2, total_ticks=200), fixture_catalog)
    assert snapshots_csv(a).splitlines()[0] == snapshots_csv(b).splitlines()[0]
    assert snapshots_csv(a) != snapshots_csv(b)


def test_snapshot_count(fixture_catalog):
    assert len(run_experiment(small(total_ticks=500), fixture_catalog)) == 5


@pytest.mark.parametrize("scenario,burst", [("targeted_sybil", 100), ("inflation", 1000),
                                            ("epic_sybil", 100)])
def test_attack_burst_sizes(fixture_catalog, scenario, burst):
    cfg = small(scenario=scenario, adversary_count=3)
    world = build_world(cfg, fixture_catalog)
    while world.tick < cfg.attack_tick - 1:
        tick(world)
    adv = [world.nodes[i] for i in world.adversary_ids]
    assert len(adv) == 3
    before = [len(n.clicklog) for n in adv]
    assert all(n.local_query_counter == 0 for n in adv)
    tick(world)
    for n, b in zip(adv, before):
        assert n.local_query_counter == burst
        assert len(n.clicklog) - b == burst
        own = [e for e in n.clicklog if e.origin_node == n.node_id]
        assert len(own) == burst
    if scenario != "inflation":
        for n in adv:
            terms = {e.query_term for e in n.clicklog if e.origin_node == n.node_id}
            assert len(terms) == 1


def test_epic_sizing():
    assert ExperimentConfig(scenario="epic_sybil").n_adversaries == 300
    assert ExperimentConfig(scenario="epic_sybil", epic_interpretation="additive").n_adversaries == 75
    for s in ("targeted_sybil", "inflation", "push_vs_pull"):
        assert ExperimentConfig(scenario=s).n_adversaries == 10
    assert ExperimentConfig().n_adversaries == 0


def test_adversaries_join_and_are_reachable(fixture_catalog):
    cfg = small(scenario="targeted_sybil", adversary_count=4)
    world = build_world(cfg, fixture_catalog)
    while world.tick < cfg.bootstrap_tick:
        tick(world)
    adv = world.adversary_ids
    assert adv == [20, 21, 22, 23]
    for a in adv:
        node = world.nodes[a]
        assert node.behavior is Behavior.TARGETED_SYBIL and node.known_peers
        assert any(a in world.nodes[b].known_peers for b in world.benign_ids)


def test_adversaries_never_query_before_attack(fixture_catalog):
    cfg = small(scenario="inflation", adversary_count=2)
    world = build_world(cfg, fixture_catalog)
    while world.tick < cfg.attack_tick - 1:
        tick(world)
        assert all(world.nodes[a].local_query_counter == 0 for a in world.adversary_ids)
        assert all(q < 20 for q in world.queriers)


def test_conservation_of_queries(fixture_catalog):
    cfg = small(scenario="targeted_sybil", adversary_count=2)
    world = build_world(cfg, fixture_catalog)
    run_experiment(cfg, fixture_catalog, world=world)
    keys = set()
    for n in world.nodes:
        keys.update(n.clicklog.keys())
    assert len(keys) == 39 * 20 + cfg.total_ticks + 2 * 100
    assert world.queries == cfg.total_ticks + 2 * 100


def test_zero_adversaries_reduces_to_baseline(fixture_catalog):
    base = run_experiment(small(), fixture_catalog)
    for s in ("targeted_sybil", "inflation", "epic_sybil"):
        other = run_experiment(small(scenario=s, adversary_count=0), fixture_catalog)
        assert snapshots_csv(other) == snapshots_csv(base)


def test_push_mode_changes_gossip_only(fixture_catalog):
    world = build_world(small(scenario="push_vs_pull", adversary_count=0), fixture_catalog)
    for _ in range(50):
        tick(world)
    assert world.total_messages <= 50
    assert not world.adversary_ids


def test_incremental_optimum_matches_union(fixture_catalog):
    cfg = small(scenario="targeted_sybil", adversary_count=2)
    world = build_world(cfg, fixture_catalog)
    run_experiment(cfg, fixture_catalog, world=world)
    union = compute_global_optimum(world.nodes)
    for term in world.terms:
        counts = world.global_counts.get(term, {})
        expect = sorted(counts, key=lambda k: (-counts[k], k))
        assert list(union[term]) == expect


def test_geometric_gossip_timing(fixture_catalog):
    n, ticks = 20, 10_000
    cfg = ExperimentConfig(n_nodes=n, total_ticks=ticks, eval_interval=ticks)
    world = build_world(cfg, fixture_catalog)
    # the querier draw alone; ranking and gossip do not touch the schedule
    for _ in range(ticks):
        draw_query(world)
    p = 1 / n
    waits = []
    for node in range(n):
        times = [t + 1 for t, q in enumerate(world.queriers) if q == node]
        waits.extend(b - a for a, b in zip([0] + times, times))
    waits = np.array(waits)
    # mean waiting time 1/p with variance (1-p)/p^2
    se = math.sqrt((1 - p) / p ** 2 / len(waits))
    assert abs(waits.mean() - 1 / p) < 3 * se
    # Pr(X = 1) = p and Pr(X <= t) = 1 - (1-p)^t
    for t in (1, 10, 30, 60):
        expect = 1 - (1 - p) ** t
        got = (waits <= t).mean()
        assert abs(got - expect) < 3 * math.sqrt(expect * (1 - expect) / len(waits))


def test_real_tick_querier_frequencies(fixture_catalog):
    cfg = ExperimentConfig(n_nodes=10, total_ticks=400)
    world = build_world(cfg, fixture_catalog)
    for _ in range(400):
        tick(world)
    counts = np.bincount(world.queriers, minlength=10)
    assert counts.sum() == 400
    # each node is picked with p = 1/10
    assert np.all(np.abs(counts - 40) < 3 * math.sqrt(400 * 0.1 * 0.9))


@pytest.mark.parametrize("bad", [
    dict(scenario="nope"), dict(n_nodes=1), dict(F=-1.0), dict(adversary_count=-2),
    dict(scenario="baseline", adversary_count=3), dict(swap_prob=1.5),
    dict(scenario="targeted_sybil", bootstrap_tick=6000), dict(library_fraction=0.0),
    dict(epic_interpretation="huh"), dict(benign_fanout=0),
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig(**bad).validate()


def test_config_from_strings():
    cfg = ExperimentConfig.from_mapping({"scenario": "inflation", "F": "1", "seed": "7",
                                         "adversary_count": "none"})
    assert cfg.F == 1.0 and cfg.seed == 7 and cfg.adversary_count is None
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"colour": "blue"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"seed": "seven"})


def test_tick_past_end(fixture_catalog):
    cfg = small(total_ticks=3)
    world = build_world(cfg, fixture_catalog)
    for _ in range(3):
        tick(world)
    with pytest.raises(RuntimeError):
        tick(world)
