"""Solicited (pull) and unsolicited (push) clicklog gossip, bootstrap and peer discovery.

Responders keep a per-peer high-water mark into their append-only log, so an
entry is never sent twice to the same peer. Pull requests additionally carry
the requester's held query keys as a digest, and the responder skips entries
the requester already has.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Collection, Iterable

from .clicklog import ClicklogEntry
from .node import NodeState


@dataclass(frozen=True)
class GossipRequest:
    sender: int
    target: int
    tick: int = 0
    digest: Collection[str] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.sender == self.target:
            raise ValueError("a node cannot request gossip from itself")


@dataclass
class GossipResponse:
    sender: int
    target: int
    entries: list[ClicklogEntry]
    byte_size: int
    tick: int = 0

    def transcript_line(self) -> str:
        return f"{self.tick}\t{self.sender}\t{self.target}\t{len(self.entries)}\t{self.byte_size}"


def make_request(requester: NodeState, target: int, tick: int = 0) -> GossipRequest:
    return GossipRequest(requester.node_id, target, tick, digest=requester.clicklog.keys())


def _unsent(sender: NodeState, peer: int, digest=None):
    log = sender.clicklog
    lo = sender.progress.get(peer, 0)
    hi = len(log)
    sender.progress[peer] = hi
    if digest is None:
        return log.entries[lo:hi], log.byte_size(lo, hi)
    batch = [e for e in log.entries[lo:hi] if e.query_key not in digest]
    return batch, sum(e.wire_size for e in batch)


def handle_pull(request: GossipRequest, responder: NodeState) -> GossipResponse:
    """Answer a pull: everything not yet sent to (and not held by) the requester. Never refused."""
    if request.target != responder.node_id:
        raise ValueError(f"request for node {request.target} delivered to {responder.node_id}")
    batch, size = _unsent(responder, request.sender, request.digest)
    return GossipResponse(responder.node_id, request.sender, batch, size, request.tick)


def discover_peers(node: NodeState, batch: Iterable[ClicklogEntry]) -> set[int]:
    """Add unseen origin ids from ``batch`` to the node's known peers; return the new ones."""
    fresh = {e.origin_node for e in batch} - node.known_peers
    fresh.discard(node.node_id)
    node.known_peers |= fresh
    return fresh


def deliver(message: GossipResponse, recipient: NodeState) -> int:
    """Merge a response (or pushed message) into the recipient; returns new entry count."""
    new = recipient.clicklog.merge_remote(message.entries)
    discover_peers(recipient, message.entries)
    if message.sender != recipient.node_id:
        recipient.known_peers.add(message.sender)
    return new


def pull(requester: NodeState, responder: NodeState, tick: int = 0) -> GossipResponse:
    """One full request/response exchange."""
    resp = handle_pull(make_request(requester, responder.node_id, tick), responder)
    deliver(resp, requester)
    return resp


def push_gossip(sender: NodeState, fanout: int, rng, tick: int = 0) -> list[GossipResponse]:
    """Unsolicited sends to ``min(fanout, known peers)`` distinct peers chosen uniformly.

    Returns the messages; the caller must deliver them (recipients cannot refuse).
    """
    if fanout < 1:
        raise ValueError("fanout must be >= 1")
    peers = sender.sorted_peers()
    if not peers:
        return []
    chosen = rng.choice(len(peers), size=min(fanout, len(peers)), replace=False)
    out = []
    for idx in chosen:
        peer = peers[int(idx)]
        batch, size = _unsent(sender, peer)
        out.append(GossipResponse(sender.node_id, peer, list(batch), size, tick))
    return out


def sample_entries(node: NodeState, fraction: float, rng) -> list[ClicklogEntry]:
    """Uniform sample of ceil(fraction * |log|) entries, kept in log order."""
    if not 0 < fraction <= 1:
        raise ValueError("sample fraction must be in (0, 1]")
    n = len(node.clicklog)
    k = math.ceil(fraction * n)
    if k == 0:
        return []
    picks = sorted(int(i) for i in rng.choice(n, size=k, replace=False))
    return [node.clicklog[i] for i in picks]


def bootstrap(newcomer: NodeState, sponsor: NodeState, sample_fraction: float, rng,
              announce: bool = True) -> NodeState:
    """Join ``newcomer`` via ``sponsor``, which shares a random sample of its log.

    With ``announce`` the sponsor also learns the newcomer's id (the join handshake),
    which is what makes a freshly joined node reachable by pulls.
    """
    batch = sample_entries(sponsor, sample_fraction, rng)
    newcomer.clicklog.merge_remote(batch)
    discover_peers(newcomer, batch)
    newcomer.known_peers.add(sponsor.node_id)
    if announce:
        sponsor.known_peers.add(newcomer.node_id)
    return newcomer
