"""G-Rank result scoring.

For query term Q at node i every candidate item k scores

    R_i(k) = sum_j clicks_j(Q, k) * (S_i(j) + F)

over all origins j in i's clicklog (i itself weighs 1 + F). Candidates that
match Q in metadata always precede clicklog-only candidates; inside each
partition items go by score, then ascending item id. Half of the displayed
lists get two random positions swapped.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .node import NodeState
from .similarity import rebuild_similarity_table

RESULT_LEN = 10
SWAP_PROB = 0.5
FALLBACK_WINDOW = 100
_DECIMALS = 10


@dataclass(frozen=True)
class RankedResults:
    query_term: str
    items: tuple[tuple[int, float], ...]
    metadata_matched: frozenset[int]
    truncation: int = RESULT_LEN
    fallback_used: bool = False
    swapped: tuple[int, int] | None = None

    @property
    def ids(self) -> list[int]:
        return [k for k, _ in self.items]

    def __len__(self):
        return len(self.items)


def similarity_weights(node: NodeState, isolation: float, top_k: int | None = None) -> np.ndarray:
    """Per-origin weight vector indexed by node id."""
    table = rebuild_similarity_table(node, top_k)
    origin = node.clicklog.columns()[0]
    size = max(int(origin.max()) + 1 if len(origin) else 0, node.node_id + 1,
               max(table.normalized_scores, default=-1) + 1)
    w = np.full(size, float(isolation))
    for peer, s in table.normalized_scores.items():
        w[peer] = s + isolation
    w[node.node_id] = 1.0 + isolation
    return w


def _grids(node: NodeState, terms: Sequence[str], isolation: float, top_k: int | None):
    """score, click-count and tag-match grids of shape (len(terms), n_items)."""
    log = node.clicklog
    n_items = len(node.catalog)
    n_terms = len(terms)
    origin, tid, clicked, tagm = log.columns()
    row_of = np.full(len(log._vocab) + 1, -1, dtype=np.int64)
    for r, t in enumerate(terms):
        i = log.term_id(t)
        if i is not None:
            row_of[i] = r
    rows = row_of[tid]
    sel = np.flatnonzero(rows >= 0)
    flat = rows[sel] * n_items + clicked[sel]
    size = n_terms * n_items
    if len(sel):
        w = similarity_weights(node, isolation, top_k)[origin[sel]]
        score = np.bincount(flat, weights=w, minlength=size)
        count = np.bincount(flat, minlength=size)
        tagged = np.bincount(flat, weights=tagm[sel], minlength=size) > 0
    else:
        score = np.zeros(size)
        count = np.zeros(size, dtype=np.int64)
        tagged = np.zeros(size, dtype=bool)
    shape = (n_terms, n_items)
    return score.reshape(shape), count.reshape(shape), tagged.reshape(shape)


def _library_grid(node: NodeState, terms: Sequence[str]) -> np.ndarray:
    lib = np.zeros((len(terms), len(node.catalog)), dtype=bool)
    for r, t in enumerate(terms):
        hits = node.library_matches(t)
        if hits:
            lib[r, list(hits)] = True
    return lib


def _fallback(node: NodeState, term: str, result_len: int, window: int) -> RankedResults:
    recent = node.clicklog.entries[-window:] if window > 0 else []
    counts = Counter(e.clicked for e in recent)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:result_len]
    return RankedResults(term, tuple((k, float(c)) for k, c in ranked), frozenset(),
                         result_len, fallback_used=True)


def rank_terms(node: NodeState, terms: Sequence[str], isolation: float, *,
               result_len: int = RESULT_LEN, window: int = FALLBACK_WINDOW,
               top_k: int | None = None) -> dict[str, RankedResults]:
    """Noise-free rankings for several terms at once."""
    for t in terms:
        if not t:
            raise ValueError("empty query term")
    terms = list(terms)
    score, count, tagged = _grids(node, terms, isolation, top_k)
    lib = _library_grid(node, terms)
    clicked = count > 0
    cand = clicked | lib
    meta = lib | (clicked & tagged)
    score = np.round(score, _DECIMALS)
    ids = np.broadcast_to(np.arange(score.shape[1]), score.shape)
    order = np.lexsort((ids, -score, ~meta, ~cand), axis=-1)
    n_cand = cand.sum(axis=1)

    out = {}
    for r, t in enumerate(terms):
        if n_cand[r] == 0:
            out[t] = _fallback(node, t, result_len, window)
            continue
        top = order[r, :min(int(n_cand[r]), result_len)]
        out[t] = RankedResults(
            t,
            tuple((int(k), float(score[r, k])) for k in top),
            frozenset(int(k) for k in np.flatnonzero(meta[r])),
            result_len,
        )
    return out


def candidate_set(node: NodeState, term: str, window: int = FALLBACK_WINDOW):
    """(candidates, metadata_matched, fallback_used) for ``term``."""
    if not term:
        raise ValueError("empty query term")
    _, count, tagged = _grids(node, [term], 0.0, None)
    lib = _library_grid(node, [term])[0]
    clicked = count[0] > 0
    cands = set(np.flatnonzero(clicked | lib).tolist())
    meta = set(np.flatnonzero(lib | (clicked & tagged[0])).tolist())
    if cands:
        return cands, meta, False
    fb = _fallback(node, term, len(node.catalog), window)
    return set(fb.ids), set(), True


def score_candidates(node: NodeState, term: str, candidates, isolation: float,
                     top_k: int | None = None) -> dict[int, float]:
    score, _, _ = _grids(node, [term], isolation, top_k)
    return {int(k): float(score[0, k]) for k in sorted(candidates)}


def apply_swap(results: RankedResults, rng, swap_prob: float = SWAP_PROB) -> RankedResults:
    if len(results) < 2 or swap_prob <= 0 or rng.random() >= swap_prob:
        return results
    i, j = sorted(int(x) for x in rng.choice(len(results), size=2, replace=False))
    items = list(results.items)
    items[i], items[j] = items[j], items[i]
    return RankedResults(results.query_term, tuple(items), results.metadata_matched,
                         results.truncation, results.fallback_used, (i, j))


def rank(node: NodeState, term: str, isolation: float, rng=None, *,
         swap_prob: float = SWAP_PROB, result_len: int = RESULT_LEN,
         window: int = FALLBACK_WINDOW, top_k: int | None = None) -> RankedResults:
    """Rank ``term`` for ``node``; with an ``rng`` the noise swap is applied."""
    res = rank_terms(node, [term], isolation, result_len=result_len, window=window,
                     top_k=top_k)[term]
    if rng is None:
        return res
    return apply_swap(res, rng, swap_prob)
