"""E-TORA: destination-rooted DAG routing with link reversal, extended so the
downstream choice blends DAG depth with the outbound channel's relative
balance instead of always descending the same branch.

Heights are (tau, oid, r, delta, id) tuples ordered lexicographically; a hop
is downstream when the neighbor's height is strictly lower. Maintenance
follows the classic reversal cases: a link failure that removes the last
downstream link generates a new reference level; UPD-triggered losses
propagate the highest neighbor reference, reflect it, or detect a partition
(reflected own reference) and erase the route with a CLR flood.
"""
from __future__ import annotations

from ..core import Behavior
from ..engine import (FailReason, Payment, ROLE_ENDPOINT, ROLE_ROUTER,
                      SIZE_CONTROL, SIZE_TABLE_ENTRY)
from .base import RoutingProtocol

KIND_QRY = "etora_qry"
KIND_UPD = "etora_upd"
KIND_CLR = "etora_clr"


class _NodeState:
    __slots__ = ("heights", "nbr_heights", "route_required", "seen_qry", "seen_clr")

    def __init__(self):
        self.heights = {}       # dst -> (tau, oid, r, delta, id) | None after CLR
        self.nbr_heights = {}   # dst -> {nbr: height | None}
        self.route_required = set()
        self.seen_qry = set()   # (dst, origin, wave)
        self.seen_clr = set()   # (dst, tau, oid)


class EtoraProtocol(RoutingProtocol):
    name = "etora"

    def __init__(self, net, engine, params=None, rng=None):
        super().__init__(net, engine, params, rng)
        self.alpha = self.params.get("alpha", 0.5)
        self.discovery_timeout = self.params.get("discovery_timeout_ms", 2_000)
        self.reprobe_delay = self.params.get("reprobe_delay_ms", 300)
        self.max_probe_retries = self.params.get("max_probe_retries", 2)
        self.state = [_NodeState() for _ in range(net.n)]
        self._pending = {}        # (src, dst) -> [payments]
        self._probe_retries = {}  # payment id -> count
        self._wave = 0

    # -- helpers --------------------------------------------------------------

    def height_of(self, node: int, dst: int):
        if node == dst:
            return (0, 0, 0, 0, dst)
        return self.state[node].heights.get(dst)

    def _alive_neighbors(self, node: int):
        eng = self.engine
        for v, cid in self.net.adj[node]:
            if self.net.channels[cid].open and not eng.dead[v]:
                yield v, cid

    def _participates(self, node: int) -> bool:
        return self.net.nodes[node].behavior is not Behavior.NON_PARTICIPATING

    def _broadcast(self, node: int, kind: str, payload):
        self.engine.broadcast(node, kind, SIZE_CONTROL, ROLE_ROUTER, payload)

    # -- payments ---------------------------------------------------------------

    def on_payment(self, payment: Payment):
        src, dst = payment.src, payment.dst
        if self.height_of(src, dst) is not None:
            self.engine.start_probe(payment)
            return
        self._park_and_query(src, dst, payment)

    def _park_and_query(self, src: int, dst: int, payment: Payment):
        key = (src, dst)
        fresh = key not in self._pending
        self._pending.setdefault(key, []).append(payment)
        if fresh:
            st = self.state[src]
            st.route_required.add(dst)
            self._wave += 1
            self.engine.broadcast(src, KIND_QRY, SIZE_CONTROL, ROLE_ENDPOINT,
                                  (dst, src, self._wave))
            self.engine.schedule_in(self.discovery_timeout, self._discovery_deadline, key)

    def _discovery_deadline(self, key):
        payments = self._pending.pop(key, None)
        if not payments:
            return
        src, dst = key
        if self.height_of(src, dst) is not None:
            for p in payments:
                self.engine.start_probe(p)
            return
        for p in payments:
            self.engine.fail_payment(p, FailReason.NO_ROUTE)

    def next_hop(self, node: int, payment: Payment, visited) -> int | None:
        dst = payment.dst
        own = self.height_of(node, dst)
        if own is None:
            return None
        st = self.state[node]
        nbrh = st.nbr_heights.get(dst, {})
        best = None
        best_score = -1.0
        for v, cid in self._alive_neighbors(node):  # ascending id: ties keep the lower id
            h = nbrh.get(v)
            if h is None or not h < own:
                continue
            ch = self.net.channels[cid]
            energy = ch.balance_from(node) / ch.capacity
            # reversal maintenance can leave transient negative deltas; clamp so
            # the depth term stays defined and the ordering for ordinary
            # route-creation heights (delta >= 0) is untouched
            depth = h[3] if h[3] > 0 else 0
            score = (1.0 - self.alpha) * (1.0 / (1.0 + depth)) + self.alpha * energy
            if score > best_score:
                best, best_score = v, score
        return best

    def on_probe_failed(self, payment: Payment, at_node: int) -> bool:
        retries = self._probe_retries.get(payment.id, 0)
        if retries >= self.max_probe_retries:
            return False
        self._probe_retries[payment.id] = retries + 1
        src, dst = payment.src, payment.dst
        if self.height_of(src, dst) is None:
            self._park_and_query(src, dst, payment)
        else:
            self.engine.schedule_in(self.reprobe_delay, self._reprobe, payment)
        return True

    def _reprobe(self, payment: Payment):
        self.engine.start_probe(payment)

    def on_payment_resolved(self, payment: Payment):
        self._probe_retries.pop(payment.id, None)

    # -- control messages ---------------------------------------------------------

    def on_message(self, node: int, sender: int, kind: str, payload):
        if not self._participates(node):
            return
        if kind == KIND_QRY:
            self._on_qry(node, payload)
        elif kind == KIND_UPD:
            self._on_upd(node, sender, payload)
        elif kind == KIND_CLR:
            self._on_clr(node, sender, payload)
        else:
            super().on_message(node, sender, kind, payload)

    def _on_qry(self, node: int, payload):
        dst, origin, wave = payload
        st = self.state[node]
        key = (dst, origin, wave)
        if key in st.seen_qry:
            return
        st.seen_qry.add(key)
        own = self.height_of(node, dst)
        if own is not None:
            self._broadcast(node, KIND_UPD, (dst, own))
        elif dst not in st.route_required:
            st.route_required.add(dst)
            self._broadcast(node, KIND_QRY, payload)

    def _on_upd(self, node: int, sender: int, payload):
        dst, h_sender = payload
        if node == dst:
            return
        st = self.state[node]
        st.nbr_heights.setdefault(dst, {})[sender] = h_sender
        own = st.heights.get(dst)
        if own is None:
            # adopt below the lowest-height neighbor
            nbrh = st.nbr_heights[dst]
            valid = [h for h in nbrh.values() if h is not None]
            if not valid:
                return
            ref = min(valid)
            st.heights[dst] = (ref[0], ref[1], ref[2], ref[3] + 1, node)
            self._broadcast(node, KIND_UPD, (dst, st.heights[dst]))
            self._release_parked(node, dst)
        else:
            self._maintain(node, dst, link_failure=False)

    def _on_clr(self, node: int, sender: int, payload):
        dst, tau, oid = payload
        st = self.state[node]
        key = (dst, tau, oid)
        nbrh = st.nbr_heights.get(dst)
        if nbrh is not None and sender in nbrh:
            nbrh[sender] = None
        if key in st.seen_clr:
            return
        st.seen_clr.add(key)
        own = st.heights.get(dst)
        if own is not None and (own[0], own[1]) == (tau, oid):
            st.heights[dst] = None
            st.route_required.discard(dst)
            self._broadcast(node, KIND_CLR, payload)

    def _release_parked(self, node: int, dst: int):
        payments = self._pending.pop((node, dst), None)
        if payments:
            for p in payments:
                self.engine.start_probe(p)

    # -- maintenance ---------------------------------------------------------------

    def on_channel_closed(self, node: int, channel):
        if not self._participates(node):
            return
        peer = channel.peer(node)
        st = self.state[node]
        for dst, nbrh in st.nbr_heights.items():
            nbrh.pop(peer, None)
        for dst in list(st.heights):
            self._maintain(node, dst, link_failure=True)

    def _maintain(self, node: int, dst: int, link_failure: bool):
        """Reversal case analysis when a node may have lost its last downstream."""
        st = self.state[node]
        own = st.heights.get(dst)
        if own is None or node == dst:
            return
        nbrh = st.nbr_heights.get(dst, {})
        valid = {}
        for v, _ in self._alive_neighbors(node):
            h = nbrh.get(v)
            if h is not None:
                valid[v] = h
        if any(h < own for h in valid.values()):
            return  # still has a downstream link
        if not valid:
            # isolated for this destination: trivial partition
            st.heights[dst] = None
            st.route_required.discard(dst)
            return
        if link_failure:
            new = (self.engine.clock, node, 0, 0, node)
        else:
            refs = {(h[0], h[1], h[2]) for h in valid.values()}
            if len(refs) > 1:
                ref = max(refs)
                min_delta = min(h[3] for h in valid.values() if (h[0], h[1], h[2]) == ref)
                new = (ref[0], ref[1], ref[2], min_delta - 1, node)
            else:
                tau, oid, r = next(iter(refs))
                if r == 0:
                    new = (tau, oid, 1, 0, node)
                elif oid == node:
                    # own reference reflected back from every side: partition
                    st.heights[dst] = None
                    st.route_required.discard(dst)
                    st.seen_clr.add((dst, tau, oid))
                    self._broadcast(node, KIND_CLR, (dst, tau, oid))
                    return
                else:
                    new = (self.engine.clock, node, 0, 0, node)
        if new != own:
            st.heights[dst] = new
            self._broadcast(node, KIND_UPD, (dst, new))

    # -- metrics ----------------------------------------------------------------------

    def memory_footprint(self, node: int) -> tuple[int, int]:
        st = self.state[node]
        entries = sum(1 for h in st.heights.values() if h is not None)
        entries += sum(len(t) for t in st.nbr_heights.values())
        return entries, entries * SIZE_TABLE_ENTRY
