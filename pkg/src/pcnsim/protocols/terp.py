"""TERP: on-demand route discovery with per-neighbor trust.

Flooded route requests install reverse entries and suppress duplicates by
(origin, request id); the destination answers the first copy with a reply that
walks the reverse path, installing forward entries that carry a bottleneck
balance hint net of each hop's fee. Route choice blends trust, relative
bottleneck, and hop count; neighbors below the trust threshold are never used.
Trust moves on observed hop outcomes only: +0.05 per forward, -0.20 per drop.
"""
from __future__ import annotations

from ..core import Behavior, channel_fee
from ..engine import (FailReason, OUTCOME_DROPPED, OUTCOME_FORWARDED, Payment,
                      ROLE_ENDPOINT, ROLE_ROUTER, SIZE_CONTROL, SIZE_TABLE_ENTRY)
from .base import RoutingProtocol

KIND_RREQ = "terp_rreq"
KIND_RREP = "terp_rrep"

BIG_HINT = 1 << 62


class RouteEntry:
    __slots__ = ("next_hop", "seq", "hops", "bneck", "expiry")

    def __init__(self, next_hop, seq, hops, bneck, expiry):
        self.next_hop = next_hop
        self.seq = seq
        self.hops = hops
        self.bneck = bneck
        self.expiry = expiry


class _NodeState:
    __slots__ = ("routes", "trust", "fwd_seen", "drop_seen", "seen_rreq",
                 "replied", "own_seq", "rreq_counter", "known_seq")

    def __init__(self):
        self.routes = {}      # dst -> [RouteEntry], unique next hops
        self.trust = {}       # neighbor -> [0, 1]
        self.fwd_seen = {}
        self.drop_seen = {}
        self.seen_rreq = set()
        self.replied = set()
        self.own_seq = 0
        self.rreq_counter = 0
        self.known_seq = {}   # dst -> freshest seq heard


class TerpProtocol(RoutingProtocol):
    name = "terp"

    def __init__(self, net, engine, params=None, rng=None):
        super().__init__(net, engine, params, rng)
        p = self.params
        self.trust_init = p.get("trust_init", 0.5)
        self.trust_reward = p.get("trust_reward", 0.05)
        self.trust_penalty = p.get("trust_penalty", 0.20)
        self.trust_threshold = p.get("trust_threshold", 0.3)
        self.w_trust = p.get("w_trust", 0.5)
        self.w_balance = p.get("w_balance", 0.3)
        self.w_hops = p.get("w_hops", 0.2)
        self.route_lifetime = p.get("route_lifetime_ms", 30_000)
        self.discovery_timeout = p.get("discovery_timeout_ms", 2_000)
        self.max_retries = p.get("discovery_retries", 3)
        self.max_entries = p.get("entries_per_destination", 3)
        self.state = [_NodeState() for _ in range(net.n)]
        self._pending = {}            # (src, dst) -> dict(token, retries, payments)
        self._payment_attempts = {}   # payment id -> discovery attempts

    # -- trust ------------------------------------------------------------------

    def on_bootstrap(self):
        for u in range(self.net.n):
            st = self.state[u]
            for v, _ in self.net.adj[u]:
                st.trust[v] = self.trust_init
                st.fwd_seen[v] = 0
                st.drop_seen[v] = 0

    def update_trust(self, observer: int, neighbor: int, outcome: str):
        st = self.state[observer]
        t = st.trust.get(neighbor, self.trust_init)
        if outcome == OUTCOME_FORWARDED:
            st.trust[neighbor] = min(1.0, t + self.trust_reward)
            st.fwd_seen[neighbor] = st.fwd_seen.get(neighbor, 0) + 1
        elif outcome == OUTCOME_DROPPED:
            st.trust[neighbor] = max(0.0, t - self.trust_penalty)
            st.drop_seen[neighbor] = st.drop_seen.get(neighbor, 0) + 1
        else:
            raise ValueError(f"unknown outcome {outcome!r}")

    on_hop_outcome = update_trust

    # -- selection ----------------------------------------------------------------

    def _candidates(self, node: int, dst: int, visited=()):
        st = self.state[node]
        now = self.engine.clock
        out = []
        entries = st.routes.get(dst, [])
        for e in entries:
            if e.expiry <= now or e.next_hop in visited:
                continue
            ch = self.net.channel_between(node, e.next_hop)
            if ch is None or not ch.open:
                continue
            if st.trust.get(e.next_hop, self.trust_init) < self.trust_threshold:
                continue
            out.append(e)
        return out

    def select(self, node: int, candidates: list[RouteEntry]) -> RouteEntry | None:
        """Weighted choice over trust, relative bottleneck, and hop count."""
        if not candidates:
            return None
        st = self.state[node]
        max_bneck = max(e.bneck for e in candidates)
        min_hops = min(e.hops for e in candidates)
        best, best_score = None, -1.0
        for e in sorted(candidates, key=lambda e: e.next_hop):  # ties -> lower id
            score = self.w_trust * st.trust.get(e.next_hop, self.trust_init)
            if max_bneck > 0:
                score += self.w_balance * (e.bneck / max_bneck)
            if e.hops > 0:
                score += self.w_hops * (min_hops / e.hops)
            if score > best_score:
                best, best_score = e, score
        return best

    def next_hop(self, node: int, payment: Payment, visited) -> int | None:
        entry = self.select(node, self._candidates(node, payment.dst, visited))
        return entry.next_hop if entry is not None else None

    # -- payments --------------------------------------------------------------------

    def on_payment(self, payment: Payment):
        if self._candidates(payment.src, payment.dst):
            self.engine.start_probe(payment)
        else:
            self._discover(payment.src, payment.dst, payment)

    def on_probe_failed(self, payment: Payment, at_node: int) -> bool:
        attempts = self._payment_attempts.get(payment.id, 0)
        if attempts >= self.max_retries:
            return False
        self._discover(payment.src, payment.dst, payment)
        return True

    def on_payment_resolved(self, payment: Payment):
        self._payment_attempts.pop(payment.id, None)

    def _discover(self, src: int, dst: int, payment: Payment | None):
        key = (src, dst)
        pend = self._pending.get(key)
        if payment is not None:
            self._payment_attempts[payment.id] = self._payment_attempts.get(payment.id, 0) + 1
        if pend is not None:
            if payment is not None:
                pend["payments"].append(payment)
            return
        pend = {"retries": 0, "token": 0, "payments": [payment] if payment else []}
        self._pending[key] = pend
        self._flood(src, dst, pend)

    def _flood(self, src: int, dst: int, pend):
        st = self.state[src]
        st.own_seq += 1
        st.rreq_counter += 1
        rid = st.rreq_counter
        req_seq = st.known_seq.get(dst, 0)
        pend["token"] += 1
        payload = (src, rid, dst, req_seq, st.own_seq, 0, BIG_HINT)
        st.seen_rreq.add((src, rid))
        self.engine.broadcast(src, KIND_RREQ, SIZE_CONTROL, ROLE_ENDPOINT, payload)
        self.engine.schedule_in(self.discovery_timeout, self._deadline,
                                ((src, dst), pend["token"]))

    def _deadline(self, arg):
        key, token = arg
        pend = self._pending.get(key)
        if pend is None or pend["token"] != token:
            return
        src, dst = key
        pend["retries"] += 1
        if pend["retries"] < self.max_retries:
            self._flood(src, dst, pend)
            return
        del self._pending[key]
        for p in pend["payments"]:
            if p is not None:
                self.engine.fail_payment(p, FailReason.NO_ROUTE)

    # -- control messages ----------------------------------------------------------------

    def on_message(self, node: int, sender: int, kind: str, payload):
        if self.net.nodes[node].behavior is Behavior.NON_PARTICIPATING:
            return
        if kind == KIND_RREQ:
            self._on_rreq(node, sender, payload)
        elif kind == KIND_RREP:
            self._on_rrep(node, sender, payload)
        else:
            super().on_message(node, sender, kind, payload)

    def _net_hint(self, node: int, via: int, downstream_hint: int) -> int:
        """Deliverable estimate through `via`: bottleneck minus this hop's fee."""
        ch = self.net.channel_between(node, via)
        raw = min(ch.balance_from(node), downstream_hint)
        if raw <= 0:
            return 0
        return max(0, raw - channel_fee(ch.policy_from(node), raw))

    def _install(self, node: int, dst: int, next_hop: int, seq: int, hops: int, bneck: int):
        st = self.state[node]
        entries = st.routes.setdefault(dst, [])
        expiry = self.engine.clock + self.route_lifetime
        for e in entries:
            if e.next_hop == next_hop:
                if seq > e.seq or (seq == e.seq and hops <= e.hops):
                    e.seq, e.hops, e.bneck, e.expiry = seq, hops, bneck, expiry
                return
        entries.append(RouteEntry(next_hop, seq, hops, bneck, expiry))
        if len(entries) > self.max_entries:
            entries.sort(key=lambda e: (e.hops, e.next_hop))
            del entries[self.max_entries:]

    def _on_rreq(self, node: int, sender: int, payload):
        origin, rid, dst, req_seq, origin_seq, hops, back_hint = payload
        st = self.state[node]
        if (origin, rid) in st.seen_rreq:
            return
        st.seen_rreq.add((origin, rid))
        hops += 1
        back_hint = self._net_hint(node, sender, back_hint)
        self._install(node, origin, sender, origin_seq, hops, back_hint)
        st.known_seq[origin] = max(st.known_seq.get(origin, 0), origin_seq)
        if node == dst:
            if (origin, rid) not in st.replied:
                st.replied.add((origin, rid))
                st.own_seq += 1
                reply = (origin, dst, st.own_seq, 0, BIG_HINT)
                self.engine.send(node, sender, KIND_RREP, SIZE_CONTROL,
                                 ROLE_ENDPOINT, reply)
            return
        fresh = [e for e in self._candidates(node, dst)
                 if e.seq >= req_seq and req_seq > 0]
        if fresh:
            e = self.select(node, fresh)
            reply = (origin, dst, e.seq, e.hops, e.bneck)
            self.engine.send(node, sender, KIND_RREP, SIZE_CONTROL, ROLE_ROUTER, reply)
            return
        self.engine.broadcast(node, KIND_RREQ, SIZE_CONTROL, ROLE_ROUTER,
                              (origin, rid, dst, req_seq, origin_seq, hops, back_hint))

    def _on_rrep(self, node: int, sender: int, payload):
        origin, dst, seq, hops, fwd_hint = payload
        st = self.state[node]
        hops += 1
        fwd_hint = self._net_hint(node, sender, fwd_hint)
        self._install(node, dst, sender, seq, hops, fwd_hint)
        st.known_seq[dst] = max(st.known_seq.get(dst, 0), seq)
        if node == origin:
            pend = self._pending.pop((origin, dst), None)
            if pend:
                for p in pend["payments"]:
                    if p is not None:
                        self.engine.start_probe(p)  # no-op for resolved payments
            return
        back = self.select(node, self._candidates(node, origin))
        if back is not None:
            self.engine.send(node, back.next_hop, KIND_RREP, SIZE_CONTROL,
                             ROLE_ROUTER, (origin, dst, seq, hops, fwd_hint))

    # -- introspection -----------------------------------------------------------------

    def route_chain(self, src: int, dst: int, limit: int = 64) -> list[int]:
        """Follow best next hops on quiesced state; for loop-freedom checks."""
        chain = [src]
        node = src
        while node != dst and len(chain) <= limit:
            entry = self.select(node, self._candidates(node, dst))
            if entry is None:
                break
            node = entry.next_hop
            chain.append(node)
        return chain

    def memory_footprint(self, node: int) -> tuple[int, int]:
        st = self.state[node]
        entries = sum(len(v) for v in st.routes.values()) + len(st.trust)
        return entries, entries * SIZE_TABLE_ENTRY
