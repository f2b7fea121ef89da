"""Pairwise node similarity and the normalised per-node similarity table.

    S_i(j) = (k_t + k_m**2) / k_u

k_t: overlap of the two nodes' top-K query terms (by frequency, ties
lexicographic); k_m: number of shared (term, clicked item) pairs; k_u: size
of the union of those pairs. Scores are normalised by the node's own maximum.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .clicklog import ClicklogEntry

DEFAULT_TOP_K = 10


def top_terms(term_freq: Mapping[str, int], k: int = DEFAULT_TOP_K) -> frozenset[str]:
    ranked = sorted(term_freq.items(), key=lambda kv: (-kv[1], kv[0]))
    return frozenset(t for t, _ in ranked[:k])


def similarity_from_profiles(own_pairs: set, own_top: frozenset, peer_pairs: set,
                             peer_top: frozenset) -> float:
    union = len(own_pairs) + len(peer_pairs)
    if union == 0:
        return 0.0
    matches = len(own_pairs & peer_pairs)
    union -= matches
    return (len(own_top & peer_top) + matches ** 2) / union


def _profile(entries: Iterable[ClicklogEntry]):
    pairs, freq = set(), Counter()
    for e in entries:
        pairs.add((e.query_term, e.clicked))
        freq[e.query_term] += 1
    return pairs, freq


def pairwise_similarity(own_entries: Iterable[ClicklogEntry], peer_entries: Iterable[ClicklogEntry],
                        top_k: int = DEFAULT_TOP_K) -> float:
    """Raw (unnormalised) similarity between our own entries and a peer's."""
    own_pairs, own_freq = _profile(own_entries)
    peer_pairs, peer_freq = _profile(peer_entries)
    return similarity_from_profiles(own_pairs, top_terms(own_freq, top_k),
                                    peer_pairs, top_terms(peer_freq, top_k))


def normalize_scores(raw: Mapping[int, float]) -> dict[int, float]:
    """Divide by the maximum; all-zero input stays all-zero."""
    top = max(raw.values(), default=0.0)
    if top > 0:
        return {p: s / top for p, s in raw.items()}
    return {p: 0.0 for p in raw}


@dataclass
class SimilarityTable:
    owner: int
    top_k: int = DEFAULT_TOP_K
    raw_scores: dict[int, float] = field(default_factory=dict)
    normalized_scores: dict[int, float] = field(default_factory=dict)
    # peer -> (own version, peer version) the raw score was computed at
    _stamps: dict[int, tuple[int, int]] = field(default_factory=dict, repr=False)
    _tops: dict[int, tuple[int, frozenset]] = field(default_factory=dict, repr=False)

    def ranked(self) -> list[tuple[int, float]]:
        """Peers by descending normalised score, node id ascending on ties."""
        return sorted(self.normalized_scores.items(), key=lambda kv: (-kv[1], kv[0]))

    def weight(self, peer: int, isolation: float) -> float:
        if peer == self.owner:
            return 1.0 + isolation
        return self.normalized_scores.get(peer, 0.0) + isolation

    def _top(self, log, origin: int) -> frozenset:
        prof = log.profile(origin)
        hit = self._tops.get(origin)
        if hit is None or hit[0] != prof.version:
            hit = (prof.version, top_terms(prof.term_freq, self.top_k))
            self._tops[origin] = hit
        return hit[1]


def rebuild_similarity_table(node, top_k: int | None = None) -> SimilarityTable:
    """Bring ``node.similarity`` up to date with its clicklog, recomputing only stale peers."""
    table = node.similarity
    if table is None or (top_k is not None and table.top_k != top_k):
        table = node.similarity = SimilarityTable(node.node_id, top_k or DEFAULT_TOP_K)
    log = node.clicklog
    me = node.node_id
    own_v = log.version(me)
    own = log.profile(me)
    own_top = None
    changed = False
    for peer in node.known_peers:
        stamp = (own_v, log.version(peer))
        if table._stamps.get(peer) == stamp:
            continue
        if own_top is None:
            own_top = table._top(log, me)
        prof = log.profile(peer)
        table.raw_scores[peer] = similarity_from_profiles(own.pairs, own_top, prof.pairs,
                                                          table._top(log, peer))
        table._stamps[peer] = stamp
        changed = True
    if changed or len(table.normalized_scores) != len(table.raw_scores):
        table.normalized_scores = normalize_scores(table.raw_scores)
    return table
