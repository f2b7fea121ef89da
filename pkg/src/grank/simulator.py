"""Deterministic discrete-tick simulation of a G-Rank network.

Every tick one benign node, chosen uniformly, issues one query for a uniformly
chosen corpus term, clicks according to the click model, and then gossips
(one pull from a random known peer, or a fanout-1 push in ``push_vs_pull``).
Adversaries join at ``bootstrap_tick`` and run their attack burst at
``attack_tick``. All randomness comes from one ``numpy`` generator seeded by
``config.seed``.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from . import gossip
from .catalog import Catalog
from .clicklog import ClicklogEntry
from .node import Behavior, NodeState
from .ranker import RankedResults, rank

log = logging.getLogger(__name__)

SCENARIOS = ("baseline", "targeted_sybil", "inflation", "epic_sybil", "push_vs_pull")
_BEHAVIOR = {
    "targeted_sybil": Behavior.TARGETED_SYBIL,
    "inflation": Behavior.INFLATION,
    "epic_sybil": Behavior.EPIC_SYBIL,
    "push_vs_pull": Behavior.PUSH_SYBIL,
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    scenario: str = "baseline"
    F: float = 0.0
    n_nodes: int = 100
    total_ticks: int = 10_000
    adversary_count: int | None = None   # None: scenario default
    bootstrap_tick: int = 2500
    attack_tick: int = 5000
    eval_interval: int = 100
    seed: int = 0
    result_len: int = 10
    swap_prob: float = 0.5
    library_fraction: float = 0.1
    init_share_fraction: float = 0.1
    bootstrap_fraction: float = 0.1
    top_k_terms: int = 10
    fallback_window: int = 100
    sybil_queries: int = 100
    inflation_queries: int = 1000
    benign_fanout: int = 1
    adversary_fanout: int = 2
    epic_interpretation: str = "literal"   # or "additive"
    transcript: bool = False

    @property
    def n_adversaries(self) -> int:
        if self.adversary_count is not None:
            return self.adversary_count
        if self.scenario == "baseline":
            return 0
        if self.scenario == "epic_sybil":
            # 75% of all participants: a / (n + a) = 0.75, or 75% of n added on top
            if self.epic_interpretation == "additive":
                return math.ceil(0.75 * self.n_nodes)
            return 3 * self.n_nodes
        return 10

    @property
    def push_mode(self) -> bool:
        return self.scenario == "push_vs_pull"

    def validate(self) -> "ExperimentConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.n_nodes < 2:
            raise ConfigError("n_nodes must be >= 2")
        if self.total_ticks < 1 or self.eval_interval < 1:
            raise ConfigError("total_ticks and eval_interval must be positive")
        if self.F < 0:
            raise ConfigError("isolation constant F must be >= 0")
        if self.adversary_count is not None and self.adversary_count < 0:
            raise ConfigError("adversary_count must be >= 0")
        if self.scenario == "baseline" and self.n_adversaries > 0:
            raise ConfigError("baseline scenario cannot have adversaries")
        if self.epic_interpretation not in ("literal", "additive"):
            raise ConfigError("epic_interpretation must be 'literal' or 'additive'")
        if self.n_adversaries and not (0 < self.bootstrap_tick < self.attack_tick <= self.total_ticks):
            raise ConfigError("need 0 < bootstrap_tick < attack_tick <= total_ticks")
        for name in ("library_fraction", "init_share_fraction", "bootstrap_fraction"):
            if not 0 < getattr(self, name) <= 1:
                raise ConfigError(f"{name} must be in (0, 1]")
        if not 0 <= self.swap_prob <= 1:
            raise ConfigError("swap_prob must be in [0, 1]")
        if self.result_len < 1 or self.top_k_terms < 1:
            raise ConfigError("result_len and top_k_terms must be >= 1")
        if self.benign_fanout < 1 or self.adversary_fanout < 1:
            raise ConfigError("fanouts must be >= 1")
        return self

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        """Build from string-or-typed values (config files, CLI overrides)."""
        fields = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in data.items():
            if key not in fields:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(key, fields[key].type, value)
        return cls(**kwargs).validate()

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _coerce(key, type_name, value):
    if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none", "null")):
        if "None" in str(type_name):
            return None
        raise ConfigError(f"{key} cannot be empty")
    t = str(type_name)
    try:
        if t.startswith("bool"):
            if isinstance(value, str):
                if value.lower() in ("1", "true", "yes", "on"):
                    return True
                if value.lower() in ("0", "false", "no", "off"):
                    return False
                raise ValueError(value)
            return bool(value)
        if t.startswith("int"):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if t.startswith("float"):
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


# --- world -------------------------------------------------------------------

@dataclass(eq=False)
class World:
    config: ExperimentConfig
    catalog: Catalog
    nodes: list[NodeState]
    rng: np.random.Generator
    tick: int = 0
    queries: int = 0
    global_counts: dict[str, Counter] = field(default_factory=dict)
    benign_counts: dict[str, Counter] = field(default_factory=dict)
    window_messages: list[int] = field(default_factory=list)
    total_messages: int = 0
    transcript: list[str] = field(default_factory=list)
    queriers: list[int] = field(default_factory=list)

    @property
    def benign_ids(self) -> list[int]:
        return [n.node_id for n in self.nodes if not n.is_adversary]

    @property
    def adversary_ids(self) -> list[int]:
        return [n.node_id for n in self.nodes if n.is_adversary]

    @property
    def terms(self) -> tuple[str, ...]:
        return self.catalog.term_corpus

    def register(self, entry: ClicklogEntry, adversarial: bool):
        self.queries += 1
        self.global_counts.setdefault(entry.query_term, Counter())[entry.clicked] += 1
        if not adversarial:
            self.benign_counts.setdefault(entry.query_term, Counter())[entry.clicked] += 1

    def record_message(self, msg: gossip.GossipResponse):
        self.window_messages.append(msg.byte_size)
        self.total_messages += 1
        if self.config.transcript:
            self.transcript.append(msg.transcript_line())

    def take_message_window(self) -> list[int]:
        sizes, self.window_messages = self.window_messages, []
        return sizes


def _library(rng, catalog: Catalog, fraction: float) -> frozenset[int]:
    k = math.ceil(fraction * len(catalog))
    return frozenset(int(i) for i in rng.choice(len(catalog), size=k, replace=False))


def seed_queries(node: NodeState, terms, rng) -> None:
    """One unranked query per corpus term: a random tag-matching library item, else any library item."""
    lib = sorted(node.library)
    for term in terms:
        tagged = [k for k in lib if term in node.catalog[k].tags]
        if tagged:
            clicked = tagged[int(rng.integers(len(tagged)))]
            node.record_click(term, tagged, clicked)
        else:
            clicked = lib[int(rng.integers(len(lib)))]
            node.record_click(term, [clicked], clicked)


def initialize_network(config: ExperimentConfig, catalog: Catalog, rng) -> list[NodeState]:
    if config.n_nodes < 2:
        raise ConfigError("n_nodes must be >= 2")
    nodes = [NodeState(i, catalog, _library(rng, catalog, config.library_fraction))
             for i in range(config.n_nodes)]
    for node in nodes:
        seed_queries(node, catalog.term_corpus, rng)
    n = len(nodes)
    for i, node in enumerate(nodes):
        target = nodes[(i - 1) % n]
        batch = gossip.sample_entries(node, config.init_share_fraction, rng)
        target.clicklog.merge_remote(batch)
        gossip.discover_peers(target, batch)
    return nodes


def build_world(config: ExperimentConfig, catalog: Catalog) -> World:
    config.validate()
    rng = np.random.default_rng(config.seed)
    nodes = initialize_network(config, catalog, rng)
    world = World(config, catalog, nodes, rng)
    for node in nodes:
        for e in node.clicklog:
            if e.origin_node == node.node_id:
                world.register(e, False)
    world.queries = 0   # seed entries are not simulation queries
    return world


# --- click models ------------------------------------------------------------

def click_top(res: RankedResults, rng=None) -> int:
    """Highest displayed item; among items tied with it, the lowest id."""
    k0, s0 = res.items[0]
    m0 = k0 in res.metadata_matched
    return min(k for k, s in res.items if s == s0 and (k in res.metadata_matched) == m0)


def click_bottom(res: RankedResults, rng=None) -> int:
    return res.items[-1][0]


def click_random(res: RankedResults, rng) -> int:
    return res.items[int(rng.integers(len(res.items)))][0]


def perform_query(world: World, node: NodeState, term: str,
                  click: Callable[[RankedResults, Any], int] = click_top) -> ClicklogEntry | None:
    cfg = world.config
    res = rank(node, term, cfg.F, world.rng, swap_prob=cfg.swap_prob, result_len=cfg.result_len,
               window=cfg.fallback_window, top_k=cfg.top_k_terms)
    if not res.items:
        return None
    entry = node.record_click(term, res.ids, click(res, world.rng))
    world.register(entry, node.is_adversary)
    return entry


# --- adversaries -------------------------------------------------------------

def add_adversaries(world: World) -> list[NodeState]:
    """Bootstrap the scenario's attackers into the network via random benign sponsors."""
    cfg = world.config
    behavior = _BEHAVIOR.get(cfg.scenario)
    if behavior is None or cfg.n_adversaries == 0:
        return []
    benign = world.benign_ids
    joined = []
    for _ in range(cfg.n_adversaries):
        node = NodeState(len(world.nodes), world.catalog,
                         _library(world.rng, world.catalog, cfg.library_fraction),
                         behavior=behavior)
        world.nodes.append(node)
        sponsor = world.nodes[benign[int(world.rng.integers(len(benign)))]]
        gossip.bootstrap(node, sponsor, cfg.bootstrap_fraction, world.rng)
        joined.append(node)
    log.debug("tick %d: %d adversaries joined", world.tick, len(joined))
    return joined


def run_adversary_attack(world: World, node: NodeState) -> NodeState:
    cfg = world.config
    terms = world.terms
    if node.behavior in (Behavior.TARGETED_SYBIL, Behavior.EPIC_SYBIL, Behavior.PUSH_SYBIL):
        term = terms[int(world.rng.integers(len(terms)))]
        for _ in range(cfg.sybil_queries):
            perform_query(world, node, term, click_bottom)
    elif node.behavior is Behavior.INFLATION:
        for _ in range(cfg.inflation_queries):
            perform_query(world, node, terms[int(world.rng.integers(len(terms)))], click_random)
    else:
        raise ValueError(f"node {node.node_id} is not an adversary")
    if node.behavior is Behavior.PUSH_SYBIL:
        for msg in gossip.push_gossip(node, cfg.adversary_fanout, world.rng, world.tick):
            gossip.deliver(msg, world.nodes[msg.target])
            world.record_message(msg)
    return node


# --- tick loop ---------------------------------------------------------------

def draw_query(world: World) -> tuple[NodeState, str]:
    """Uniform benign querier (p = 1/|benign| per tick) and uniform corpus term."""
    benign = world.benign_ids
    node = world.nodes[benign[int(world.rng.integers(len(benign)))]]
    term = world.terms[int(world.rng.integers(len(world.terms)))]
    world.queriers.append(node.node_id)
    return node, term


def tick(world: World) -> World:
    cfg = world.config
    t = world.tick + 1
    if t > cfg.total_ticks:
        raise RuntimeError("simulation already finished")
    world.tick = t
    if cfg.n_adversaries:
        if t == cfg.bootstrap_tick:
            add_adversaries(world)
        if t == cfg.attack_tick:
            for a in world.adversary_ids:
                run_adversary_attack(world, world.nodes[a])

    node, term = draw_query(world)
    perform_query(world, node, term)

    if cfg.push_mode:
        for msg in gossip.push_gossip(node, cfg.benign_fanout, world.rng, t):
            gossip.deliver(msg, world.nodes[msg.target])
            world.record_message(msg)
    else:
        peers = node.sorted_peers()
        if peers:
            target = world.nodes[peers[int(world.rng.integers(len(peers)))]]
            world.record_message(gossip.pull(node, target, t))
    return world


def run_experiment(config: ExperimentConfig, catalog: Catalog, *, world: World | None = None,
                   progress: Callable[[Any], None] | None = None) -> list:
    """Run the full tick loop, snapshotting every ``eval_interval`` ticks."""
    from .metrics import snapshot

    world = world or build_world(config, catalog)
    snaps = []
    while world.tick < config.total_ticks:
        tick(world)
        if world.tick % config.eval_interval == 0:
            snap = snapshot(world)
            snaps.append(snap)
            if progress:
                progress(snap)
    return snaps
