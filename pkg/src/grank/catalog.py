"""Music catalog loading, metadata matching and a synthetic fixture generator.

The catalog file is UTF-8 text with a header row ``title|artist|album|tags``;
tags are ``;``-separated. A JSON list of objects with the same keys is
accepted interchangeably.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

FIELDS = ("title", "artist", "album", "tags")
_TOKEN = re.compile(r"\w+(?:[-']\w+)*")


class CatalogError(ValueError):
    """Raised for malformed catalog files. ``row`` is 1-based (header = row 1)."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


@dataclass(frozen=True)
class Item:
    item_id: int
    title: str
    artist: str
    album: str
    tags: tuple[str, ...]

    def __post_init__(self):
        if not self.tags:
            raise ValueError(f"item {self.item_id} has no tags")


@lru_cache(maxsize=None)
def tokenize(text: str) -> tuple[str, ...]:
    return tuple(_TOKEN.findall(text.casefold()))


def _contains_run(haystack: Sequence[str], needle: Sequence[str]) -> bool:
    n = len(needle)
    if n == 0 or n > len(haystack):
        return False
    return any(tuple(haystack[i:i + n]) == tuple(needle) for i in range(len(haystack) - n + 1))


@lru_cache(maxsize=None)
def term_matches(term: str, fields: tuple[str, ...]) -> bool:
    """True if ``term`` occurs as a whole-token run in any of ``fields`` (case-insensitive)."""
    needle = tokenize(term)
    return any(_contains_run(tokenize(f), needle) for f in fields)


@dataclass
class Catalog:
    items: list[Item]
    term_corpus: tuple[str, ...] = ()
    _matches: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.term_corpus:
            self.term_corpus = tuple(sorted({t for it in self.items for t in it.tags}))

    def __len__(self):
        return len(self.items)

    def __getitem__(self, item_id: int) -> Item:
        return self.items[item_id]

    def matching(self, term: str) -> frozenset[int]:
        """All item ids whose title, artist, album or tags contain ``term``."""
        hit = self._matches.get(term)
        if hit is None:
            hit = frozenset(
                it.item_id for it in self.items
                if term_matches(term, (it.title, it.artist, it.album) + it.tags)
            )
            self._matches[term] = hit
        return hit

    def tagged(self, term: str) -> list[int]:
        """Item ids carrying ``term`` verbatim as a tag (used by seed queries)."""
        return [it.item_id for it in self.items if term in it.tags]


def items_matching_metadata(catalog: Catalog, term: str, library: Iterable[int]) -> list[int]:
    if not term:
        raise ValueError("empty query term")
    return sorted(catalog.matching(term).intersection(library))


def _split_tags(raw) -> tuple[str, ...]:
    if isinstance(raw, str):
        parts = raw.split(";")
    else:
        parts = list(raw or ())
    seen: dict[str, None] = {}
    for p in parts:
        p = str(p).strip()
        if p:
            seen.setdefault(p, None)
    return tuple(seen)


def _build(rows: Iterable[tuple[int, dict]]) -> Catalog:
    items: list[Item] = []
    triples: dict[tuple[str, str, str], int] = {}
    for rownum, rec in rows:
        title = str(rec.get("title") or "").strip()
        artist = str(rec.get("artist") or "").strip()
        album = str(rec.get("album") or "").strip()
        tags = _split_tags(rec.get("tags"))
        if not title or not artist:
            raise CatalogError("empty title or artist", rownum)
        if not tags:
            raise CatalogError(f"no tags for {title!r}", rownum)
        key = (title, artist, album)
        if key in triples:
            raise CatalogError(f"duplicate of row {triples[key]}: {title!r} / {artist!r}", rownum)
        triples[key] = rownum
        items.append(Item(len(items), title, artist, album, tags))
    if not items:
        raise CatalogError("catalog has no items")
    return Catalog(items)


def parse_catalog(text: str, fmt: str | None = None) -> Catalog:
    stripped = text.lstrip("﻿").strip()
    if not stripped:
        raise CatalogError("empty catalog file")
    if fmt == "json" or (fmt is None and stripped[0] in "[{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise CatalogError(f"invalid JSON: {exc}") from exc
        if isinstance(data, dict):
            data = data.get("items", [])
        if not isinstance(data, list) or not all(isinstance(r, dict) for r in data):
            raise CatalogError("JSON catalog must be a list of objects")
        return _build((i + 1, rec) for i, rec in enumerate(data))

    reader = csv.reader(io.StringIO(stripped), delimiter="|")
    header = [h.strip().lower() for h in next(reader)]
    if header != list(FIELDS):
        raise CatalogError(f"expected header {'|'.join(FIELDS)}, got {'|'.join(header)}", 1)

    def rows():
        for n, row in enumerate(reader, start=2):
            if not row or not any(c.strip() for c in row):
                continue
            if len(row) != len(FIELDS):
                raise CatalogError(f"expected {len(FIELDS)} fields, got {len(row)}", n)
            yield n, dict(zip(FIELDS, row))

    return _build(rows())


def load_catalog(path: str | Path) -> Catalog:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_catalog(text, "json" if path.suffix.lower() == ".json" else None)


def dump_catalog(catalog: Catalog, path: str | Path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        recs = [{"title": i.title, "artist": i.artist, "album": i.album, "tags": list(i.tags)}
                for i in catalog.items]
        path.write_text(json.dumps(recs, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
        return
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="|", lineterminator="\n")
    w.writerow(FIELDS)
    for i in catalog.items:
        w.writerow([i.title, i.artist, i.album, ";".join(i.tags)])
    path.write_text(buf.getvalue(), encoding="utf-8")


# --- synthetic fixture -------------------------------------------------------

GENRES = (
    "acid", "ambient", "bass", "breakbeat", "chillout", "chillwave", "chiptune",
    "dance", "deep-house", "disco", "downtempo", "drum-and-bass", "dub",
    "dubstep", "edm", "electro", "electronica", "experimental", "funk",
    "future-bass", "garage", "glitch", "hardstyle", "hip-hop", "house", "idm",
    "indie", "jungle", "lo-fi", "minimal", "nu-disco", "psytrance", "synthpop",
    "synthwave", "techno", "trance", "trap", "trip-hop", "vaporwave",
)

_ADJ = ("Midnight", "Electric", "Silent", "Golden", "Broken", "Velvet", "Hollow",
        "Distant", "Neon", "Crystal", "Paper", "Burning", "Frozen", "Endless",
        "Lunar", "Quiet", "Restless", "Scarlet", "Hidden", "Wandering", "Faded",
        "Northern", "Analog", "Liquid", "Weightless", "Sunken", "Violet", "Rusted")
_NOUN = ("Signals", "Horizons", "Echoes", "Gardens", "Machines", "Rivers", "Satellites",
         "Mirrors", "Streets", "Waves", "Memories", "Lights", "Shadows", "Dreams",
         "Circuits", "Skylines", "Oceans", "Voices", "Reflections", "Tides",
         "Fragments", "Harbors", "Pulses", "Letters", "Orbits", "Windows")
_FIRST = ("Mara", "Jonah", "Ilse", "Teo", "Nadia", "Oskar", "Lena", "Ravi", "Sol",
          "Anouk", "Felix", "Yara", "Kai", "Elin", "Tomas", "Ines", "Milo", "Saskia")
_LAST = ("Verhoef", "Lindqvist", "Okafor", "Marchetti", "Holm", "Baptiste", "Novak",
         "Castellano", "Reyes", "Takahashi", "Weber", "Lambert", "Duarte", "Kowalski")
_ACT = ("Collective", "Sound System", "Ensemble", "Project", "Orchestra", "Trio",
        "Machine", "Assembly", "Club", "Society")


def generate_catalog(n_items: int = 256, tags: Sequence[str] = GENRES, seed: int = 0,
                     max_tags: int = 4) -> Catalog:
    """Deterministic stand-in for the label scrape: realistic names, skewed tag popularity."""
    rng = np.random.default_rng(seed)
    tags = tuple(tags)
    popularity = 1.0 / np.sqrt(np.arange(1, len(tags) + 1))
    popularity = popularity[rng.permutation(len(tags))]
    popularity /= popularity.sum()

    def artist():
        r = rng.random()
        if r < 0.45:
            return f"{rng.choice(_FIRST)} {rng.choice(_LAST)}"
        if r < 0.8:
            return f"{rng.choice(_ADJ)} {rng.choice(_NOUN)} {rng.choice(_ACT)}"
        return f"The {rng.choice(_ADJ)} {rng.choice(_NOUN)}"

    def title():
        r = rng.random()
        if r < 0.5:
            return f"{rng.choice(_ADJ)} {rng.choice(_NOUN)}"
        if r < 0.8:
            return f"{rng.choice(_NOUN)} of the {rng.choice(_ADJ)} {rng.choice(_NOUN)}"
        return f"{rng.choice(_ADJ)} {rng.choice(_NOUN)} (Extended Mix)"

    artists = [artist() for _ in range(max(8, n_items // 3))]
    items: list[Item] = []
    seen = set()
    while len(items) < n_items:
        t, a = title(), str(rng.choice(artists))
        kind = rng.random()
        album = t if kind < 0.3 else f"{rng.choice(_NOUN)} {('EP', 'LP', 'Vol. 2', 'Sessions')[int(kind * 4) % 4]}"
        if (t, a, album) in seen:
            continue
        seen.add((t, a, album))
        k = int(rng.integers(1, max_tags + 1))
        chosen = rng.choice(len(tags), size=k, replace=False, p=popularity)
        items.append(Item(len(items), t, a, album, tuple(tags[c] for c in sorted(chosen))))

    # every tag must occur at least once
    used = {t for it in items for t in it.tags}
    for j, missing in enumerate(t for t in tags if t not in used):
        victim = items[(j * 37 + 11) % n_items]
        items[victim.item_id] = Item(victim.item_id, victim.title, victim.artist, victim.album,
                                     victim.tags + (missing,))
    return Catalog(items)


def fixture_path() -> Path:
    return Path(str(resources.files("grank") / "data" / "pandacd_synthetic.psv"))


def load_fixture() -> Catalog:
    """The shipped 256-release, 39-tag synthetic catalog."""
    return load_catalog(fixture_path())
