"""Global optimum, positional distance and per-round metrics snapshots."""

from __future__ import annotations

import csv
import io
import json
import statistics
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .node import NodeState
from .ranker import rank_terms


def positional_distance(local: Sequence[int], global_opt: Sequence[int],
                        index: Mapping[int, int] | None = None) -> int:
    """Sum of |local index - global index| over the local list.

    Items missing from ``global_opt`` count as sitting at index ``len(global_opt)``.
    """
    if len(set(local)) != len(local):
        raise ValueError("duplicate items in local ranking")
    if index is None:
        if len(set(global_opt)) != len(global_opt):
            raise ValueError("duplicate items in global ranking")
        index = {k: i for i, k in enumerate(global_opt)}
    miss = len(global_opt)
    return sum(abs(i - index.get(k, miss)) for i, k in enumerate(local))


@dataclass
class GlobalOptimum:
    """Per-term items by total click count (descending), item id ascending on ties."""
    rankings: dict[str, tuple[int, ...]]
    counts: dict[str, dict[int, int]] = field(default_factory=dict)
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_counts(cls, counts: Mapping[str, Mapping[int, int]]) -> "GlobalOptimum":
        rankings, plain = {}, {}
        for term in sorted(counts):
            c = {k: v for k, v in counts[term].items() if v > 0}
            plain[term] = c
            rankings[term] = tuple(k for k, _ in sorted(c.items(), key=lambda kv: (-kv[1], kv[0])))
        return cls(rankings, plain)

    def __getitem__(self, term: str) -> tuple[int, ...]:
        return self.rankings.get(term, ())

    def top(self, term: str) -> int | None:
        r = self.rankings.get(term)
        return r[0] if r else None

    def index(self, term: str) -> dict[int, int]:
        idx = self._index.get(term)
        if idx is None:
            idx = self._index[term] = {k: i for i, k in enumerate(self[term])}
        return idx


def compute_global_optimum(all_nodes: Iterable[NodeState], include=None) -> GlobalOptimum:
    """Omniscient ranking from the union of every clicklog, deduplicated by query key.

    ``include`` optionally filters origin ids (e.g. benign-only optimum).
    """
    seen: dict[str, tuple[str, int]] = {}
    for node in all_nodes:
        for e in node.clicklog:
            if include is not None and e.origin_node not in include:
                continue
            seen.setdefault(e.query_key, (e.query_term, e.clicked))
    counts: dict[str, Counter] = {}
    for term, item in seen.values():
        counts.setdefault(term, Counter())[item] += 1
    return GlobalOptimum.from_counts(counts)


def top_song_inclusion(node: NodeState, term: str, global_opt: GlobalOptimum, isolation: float,
                       result_len: int = 10, ranked=None) -> bool:
    best = global_opt.top(term)
    if best is None:
        raise ValueError(f"no global ranking for {term!r}")
    if ranked is None:
        ranked = rank_terms(node, [term], isolation, result_len=result_len)[term]
    return best in ranked.ids


@dataclass
class MetricsSnapshot:
    tick: int
    mean_distance: float
    median_distance: float
    mean_distance_benign_opt: float
    median_top_song_pct: float
    mean_top_song_pct: float
    mean_clicklog_size: float
    mean_gossip_bytes: float
    gossip_messages: int
    queries: int
    top_song_pct: dict[str, float] = field(default_factory=dict)
    node_distances: dict[int, float] = field(default_factory=dict)
    node_term_distances: dict[int, list[int]] = field(default_factory=dict, repr=False)

    SUMMARY = ("tick", "mean_distance", "median_distance", "mean_distance_benign_opt",
               "median_top_song_pct", "mean_top_song_pct", "mean_clicklog_size",
               "mean_gossip_bytes", "gossip_messages", "queries")

    def row(self) -> dict:
        out = {k: getattr(self, k) for k in self.SUMMARY}
        for term, pct in self.top_song_pct.items():
            out[f"top_song_pct[{term}]"] = pct
        return out


def snapshot(world, tick: int | None = None) -> MetricsSnapshot:
    cfg = world.config
    terms = list(world.terms)
    opt = GlobalOptimum.from_counts(world.global_counts)
    benign_opt = GlobalOptimum.from_counts(world.benign_counts)
    benign = [world.nodes[i] for i in world.benign_ids]

    node_dist, node_bdist, node_terms = {}, {}, {}
    hits = Counter()
    for node in benign:
        ranked = rank_terms(node, terms, cfg.F, result_len=cfg.result_len,
                            window=cfg.fallback_window, top_k=cfg.top_k_terms)
        dists, bdists = [], []
        for term in terms:
            ids = ranked[term].ids
            g = opt[term]
            dists.append(positional_distance(ids, g, opt.index(term)))
            bdists.append(positional_distance(ids, benign_opt[term], benign_opt.index(term)))
            if g and g[0] in ids:
                hits[term] += 1
        node_terms[node.node_id] = dists
        node_dist[node.node_id] = sum(dists) / len(dists)
        node_bdist[node.node_id] = sum(bdists) / len(bdists)

    pct = {t: 100.0 * hits[t] / len(benign) for t in terms}
    sizes = world.take_message_window()
    dvals = list(node_dist.values())
    return MetricsSnapshot(
        tick=world.tick if tick is None else tick,
        mean_distance=statistics.fmean(dvals),
        median_distance=statistics.median(dvals),
        mean_distance_benign_opt=statistics.fmean(node_bdist.values()),
        median_top_song_pct=statistics.median(pct.values()),
        mean_top_song_pct=statistics.fmean(pct.values()),
        mean_clicklog_size=statistics.fmean(len(n.clicklog) for n in world.nodes),
        mean_gossip_bytes=statistics.fmean(sizes) if sizes else 0.0,
        gossip_messages=len(sizes),
        queries=world.queries,
        top_song_pct=pct,
        node_distances=node_dist,
        node_term_distances=node_terms,
    )


# --- serialisation -----------------------------------------------------------

def _fmt(v):
    return repr(round(v, 9)) if isinstance(v, float) else str(v)


def snapshots_csv(snaps: Sequence[MetricsSnapshot]) -> str:
    buf = io.StringIO()
    if not snaps:
        return ""
    header = list(snaps[0].row())
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for s in snaps:
        row = s.row()
        w.writerow([_fmt(row[h]) for h in header])
    return buf.getvalue()


def detail_jsonl(snaps: Sequence[MetricsSnapshot]) -> str:
    """One line per (snapshot, benign node) with the per-term distance vector."""
    lines = []
    for s in snaps:
        for node, dists in s.node_term_distances.items():
            lines.append(json.dumps({"tick": s.tick, "node": node,
                                     "mean": round(s.node_distances[node], 9),
                                     "distances": dists},
                                    separators=(",", ":")))
    return "\n".join(lines) + ("\n" if lines else "")


def read_snapshots_csv(text: str) -> list[dict]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append({k: (int(v) if k in ("tick", "gossip_messages", "queries") else float(v))
                     for k, v in rec.items()})
    return rows
