"""Rank one query on a single node and watch peers' clicks change the order.

Run: python3 demos/01_rank_a_query.py
"""

import numpy as np

from grank.catalog import load_fixture
from grank.gossip import pull
from grank.node import NodeState
from grank.ranker import rank
from grank.similarity import rebuild_similarity_table

catalog = load_fixture()
rng = np.random.default_rng(7)


def library():
    return frozenset(int(i) for i in rng.choice(len(catalog), size=26, replace=False))


me, friend, stranger = (NodeState(i, catalog, library()) for i in range(3))
term = "techno"

# Before anyone has clicked, only items in my own library whose metadata mentions
# the term are candidates.
res = rank(me, term, isolation=0.0)
print(f"cold start for {term!r}: {res.ids}  (metadata matches: {sorted(res.metadata_matched)})")

# My friend and I like the same things; the stranger clicks differently.
for node in (me, friend):
    for t in ("techno", "house", "ambient"):
        hits = catalog.tagged(t)
        node.record_click(t, hits[:10], hits[0])
for t in ("techno", "jazz", "metal"):
    hits = catalog.tagged(t)
    for k in hits[-3:]:
        stranger.record_click(t, hits[-10:], k)

# Pull both logs. Their entries become click evidence, and their origins become peers.
pull(me, friend)
pull(me, stranger)
table = rebuild_similarity_table(me)
print("similarity table (peer, normalised score):", table.ranked())

for F in (0.0, 1.0):
    res = rank(me, term, isolation=F)
    print(f"\nF={F:g}: ranked {term!r}")
    for pos, (item, score) in enumerate(res.items, 1):
        flag = "meta" if item in res.metadata_matched else "log "
        print(f"  {pos:2d}. [{flag}] {catalog[item].title:<32} score {score:.3f}")

# With F=0 the dissimilar stranger contributes almost nothing; with F=1 every
# known peer's clicks count at least once.
