"""Append-only clicklog with dedup-by-query-key merge semantics.

Besides the entry list, a :class:`Clicklog` keeps per-origin behaviour
profiles (query/click pairs, term frequencies) for similarity scoring and
compact numeric columns (origin, term, clicked) for vectorised ranking.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

from .catalog import term_matches


class DuplicateEntryError(KeyError):
    """A locally generated entry reused an existing query key."""


def make_query_key(node_id: int, local_query_number: int) -> str:
    return f"{node_id}:{local_query_number}"


@dataclass(frozen=True)
class ClicklogEntry:
    origin_node: int
    query_term: str
    results: tuple[int, ...]
    clicked: int
    query_key: str
    clicked_title: str = ""
    clicked_tags: frozenset[str] = frozenset()
    result_titles: tuple[str, ...] = ()
    result_artists: tuple[str, ...] = ()

    def __post_init__(self):
        if self.results and self.clicked not in self.results:
            raise ValueError(f"{self.query_key}: clicked item {self.clicked} not among results")
        for name in ("result_titles", "result_artists"):
            labels = getattr(self, name)
            if labels and len(labels) != len(self.results):
                raise ValueError(f"{self.query_key}: {name}/results length mismatch")

    @cached_property
    def wire_size(self) -> int:
        return len(encode_entry(self).encode("utf-8"))

    @cached_property
    def tag_match(self) -> bool:
        """Whether the clicked item's tags contain the query term."""
        return term_matches(self.query_term, tuple(sorted(self.clicked_tags)))


def encode_entry(entry: ClicklogEntry) -> str:
    """One wire/persistence line (newline included)."""
    blank = ("",) * len(entry.results)
    shown = zip(entry.results, entry.result_titles or blank, entry.result_artists or blank)
    rec = {
        "node": entry.origin_node,
        "query": entry.query_term,
        "results": [list(r) for r in shown],
        "clicked": entry.clicked,
        "title": entry.clicked_title,
        "tags": sorted(entry.clicked_tags),
        "key": entry.query_key,
    }
    return json.dumps(rec, ensure_ascii=False, separators=(",", ":")) + "\n"


def decode_entry(line: str) -> ClicklogEntry:
    rec = json.loads(line)
    results = tuple(int(r[0]) for r in rec["results"])
    titles = tuple(r[1] for r in rec["results"])
    artists = tuple(r[2] for r in rec["results"])
    return ClicklogEntry(
        origin_node=int(rec["node"]),
        query_term=rec["query"],
        results=results,
        clicked=int(rec["clicked"]),
        query_key=rec["key"],
        clicked_title=rec.get("title", ""),
        clicked_tags=frozenset(rec.get("tags", ())),
        result_titles=titles if any(titles) else (),
        result_artists=artists if any(artists) else (),
    )


class _Column:
    """Growable 1-d integer buffer."""

    def __init__(self, dtype=np.int64):
        self.buf = np.zeros(64, dtype=dtype)
        self.n = 0

    def extend(self, values):
        values = np.asarray(values, dtype=self.buf.dtype)
        need = self.n + len(values)
        if need > len(self.buf):
            cap = max(need, 2 * len(self.buf))
            grown = np.zeros(cap, dtype=self.buf.dtype)
            grown[:self.n] = self.buf[:self.n]
            self.buf = grown
        self.buf[self.n:need] = values
        self.n = need

    def view(self):
        return self.buf[:self.n]


@dataclass
class OriginProfile:
    """What a log knows about one origin node's behaviour."""
    pairs: set = field(default_factory=set)          # {(term, clicked)}
    term_freq: Counter = field(default_factory=Counter)
    version: int = 0


class Clicklog:
    def __init__(self, entries: Iterable[ClicklogEntry] = ()):
        self._entries: list[ClicklogEntry] = []
        self._by_key: dict[str, ClicklogEntry] = {}
        self._by_term: dict[str, list[ClicklogEntry]] = {}
        self._cum_bytes: list[int] = [0]
        self._profiles: dict[int, OriginProfile] = {}
        self._vocab: dict[str, int] = {}
        self._origin = _Column()
        self._term = _Column()
        self._clicked = _Column()
        self._tagmatch = _Column(np.int8)
        self.merge_remote(entries)

    # --- container protocol ---------------------------------------------------
    def __len__(self):
        return len(self._entries)

    def __iter__(self) -> Iterator[ClicklogEntry]:
        return iter(self._entries)

    def __contains__(self, query_key) -> bool:
        return query_key in self._by_key

    def __getitem__(self, idx):
        return self._entries[idx]

    @property
    def entries(self) -> list[ClicklogEntry]:
        return self._entries

    @property
    def index_by_key(self):
        return self._by_key

    @property
    def index_by_term(self):
        return self._by_term

    def keys(self):
        return self._by_key.keys()

    # --- mutation ---------------------------------------------------------------
    def append_local(self, entry: ClicklogEntry) -> "Clicklog":
        if entry.query_key in self._by_key:
            raise DuplicateEntryError(entry.query_key)
        self._extend([entry])
        return self

    def merge_remote(self, batch: Iterable[ClicklogEntry]) -> int:
        """Append unseen entries in batch order; returns how many were new."""
        fresh = []
        held = self._by_key
        pending = {}
        for e in batch:
            k = e.query_key
            if k not in held and k not in pending:
                pending[k] = e
                fresh.append(e)
        if fresh:
            self._extend(fresh)
        return len(fresh)

    def _extend(self, fresh: list[ClicklogEntry]):
        vocab = self._vocab
        cum = self._cum_bytes
        total = cum[-1]
        tids = []
        for e in fresh:
            self._entries.append(e)
            self._by_key[e.query_key] = e
            self._by_term.setdefault(e.query_term, []).append(e)
            total += e.wire_size
            cum.append(total)
            prof = self._profiles.get(e.origin_node)
            if prof is None:
                prof = self._profiles[e.origin_node] = OriginProfile()
            prof.pairs.add((e.query_term, e.clicked))
            prof.term_freq[e.query_term] += 1
            prof.version += 1
            tid = vocab.get(e.query_term)
            if tid is None:
                tid = vocab[e.query_term] = len(vocab)
            tids.append(tid)
        self._origin.extend([e.origin_node for e in fresh])
        self._term.extend(tids)
        self._clicked.extend([e.clicked for e in fresh])
        self._tagmatch.extend([e.tag_match for e in fresh])

    # --- queries ----------------------------------------------------------------
    def entries_for_term(self, term: str) -> list[ClicklogEntry]:
        return list(self._by_term.get(term, ()))

    def entries_from(self, origin: int) -> list[ClicklogEntry]:
        return [e for e in self._entries if e.origin_node == origin]

    def origins(self) -> set[int]:
        return set(self._profiles)

    def profile(self, origin: int) -> OriginProfile:
        return self._profiles.get(origin) or OriginProfile()

    def version(self, origin: int) -> int:
        prof = self._profiles.get(origin)
        return prof.version if prof else 0

    def byte_size(self, start: int = 0, stop: int | None = None) -> int:
        """Encoded size of ``entries[start:stop]``."""
        stop = len(self._entries) if stop is None else stop
        return self._cum_bytes[stop] - self._cum_bytes[start]

    def term_id(self, term: str) -> int | None:
        return self._vocab.get(term)

    def columns(self):
        """(origin, term_id, clicked, tag_match) arrays, one row per entry."""
        return self._origin.view(), self._term.view(), self._clicked.view(), self._tagmatch.view()

    def dump(self) -> str:
        return "".join(encode_entry(e) for e in self._entries)

    @classmethod
    def load(cls, text: str) -> "Clicklog":
        return cls(decode_entry(line) for line in text.splitlines() if line.strip())


def entry_byte_sizes(entries: Iterable[ClicklogEntry]) -> list[int]:
    return [e.wire_size for e in entries]
