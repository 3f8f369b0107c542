"""Uniform routing-protocol interface.

Per-node state may only be read or written inside that node's callbacks; the
engine's message delivery is the only inter-node channel. BASIC is exempt and
reads the live network globally.
"""
from __future__ import annotations

import random

from ..core import Channel, Network
from ..engine import Engine, FailReason, Payment


class RoutingProtocol:
    name = "base"

    def __init__(self, net: Network, engine: Engine, params: dict | None = None,
                 rng: random.Random | None = None):
        self.net = net
        self.engine = engine
        self.params = dict(params or {})
        self.rng = rng or random.Random(0)

    # lifecycle -------------------------------------------------------------
    def on_bootstrap(self):
        """Called once at t=0 before any payment; set up state and timers."""

    def on_message(self, node: int, sender: int, kind: str, payload):
        raise NotImplementedError(f"{self.name}: unexpected message kind {kind!r}")

    def on_channel_closed(self, node: int, channel: Channel):
        """Local link-failure signal delivered to each live endpoint."""

    # payments ----------------------------------------------------------------
    def on_payment(self, payment: Payment):
        self.engine.fail_payment(payment, FailReason.NO_ROUTE)

    def next_hop(self, node: int, payment: Payment, visited: set[int]) -> int | None:
        """Forwarding decision during the probe walk, from node-local state."""
        return None

    def on_probe_failed(self, payment: Payment, at_node: int) -> bool:
        """Return True when the protocol takes ownership (retry/rediscovery)."""
        return False

    def on_hop_outcome(self, observer: int, neighbor: int, outcome: str):
        """Resolution notice for a hop the observer handed to `neighbor`."""

    def on_payment_resolved(self, payment: Payment):
        """Cleanup hook once a payment reached a terminal status."""

    # metrics -----------------------------------------------------------------
    def memory_footprint(self, node: int) -> tuple[int, int]:
        """(state entries, bytes) attributed to `node` for the memory metric."""
        return (0, 0)
