from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

from .catalog import Catalog
from .clicklog import Clicklog, ClicklogEntry, make_query_key

if TYPE_CHECKING:
    from .similarity import SimilarityTable


class Behavior(str, enum.Enum):
    BENIGN = "benign"
    TARGETED_SYBIL = "targeted_sybil"
    INFLATION = "inflation"
    EPIC_SYBIL = "epic_sybil"
    PUSH_SYBIL = "push_sybil"


@dataclass(eq=False)
class NodeState:
    """One peer. ``progress`` maps peer id -> how many of our log entries that peer has been sent."""

    node_id: int
    catalog: Catalog
    library: frozenset[int]
    clicklog: Clicklog = field(default_factory=Clicklog)
    known_peers: set[int] = field(default_factory=set)
    progress: dict[int, int] = field(default_factory=dict)
    similarity: "SimilarityTable | None" = None
    local_query_counter: int = 0
    behavior: Behavior = Behavior.BENIGN
    _lib_matches: dict = field(default_factory=dict, repr=False)

    @property
    def is_adversary(self) -> bool:
        return self.behavior is not Behavior.BENIGN

    def record_click(self, term: str, results: Sequence[int], clicked: int) -> ClicklogEntry:
        """Create and append a self-originated clicklog entry."""
        self.local_query_counter += 1
        item = self.catalog[clicked]
        entry = ClicklogEntry(
            origin_node=self.node_id,
            query_term=term,
            results=tuple(int(k) for k in results),
            clicked=int(clicked),
            query_key=make_query_key(self.node_id, self.local_query_counter),
            clicked_title=item.title,
            clicked_tags=frozenset(item.tags),
            result_titles=tuple(self.catalog[k].title for k in results),
            result_artists=tuple(self.catalog[k].artist for k in results),
        )
        self.clicklog.append_local(entry)
        return entry

    def library_matches(self, term: str) -> frozenset[int]:
        """Library items whose metadata contains ``term`` (the library never changes)."""
        hit = self._lib_matches.get(term)
        if hit is None:
            hit = self._lib_matches[term] = self.catalog.matching(term) & self.library
        return hit

    def sorted_peers(self) -> list[int]:
        return sorted(self.known_peers)
