"""M-DART: proactive DHT routing over a dynamic binary address tree.

Every node holds an l-bit address; routing resolves the highest bit where the
own address differs from the target address, forwarding to one of up to m
ranked next hops kept per address level. Hello messages every period carry a
routing-table summary that neighbors merge; silent entries age out. A
distributed index maps permanent node ids to current addresses: each node
registers at the node whose address is nearest the hash of its id, and senders
look the mapping up before probing. A second-ranked next hop serves as the
multipath fallback when the first lacks balance.
"""
from __future__ import annotations

from bisect import bisect_left, insort

from ..core import Behavior
from ..engine import (FailReason, Payment, ROLE_ENDPOINT, ROLE_ROUTER,
                      SIZE_CONTROL, SIZE_TABLE_ENTRY)
from .base import RoutingProtocol

KIND_HELLO = "mdart_hello"
KIND_REGISTER = "mdart_register"
KIND_LOOKUP = "mdart_lookup"
KIND_LOOKUP_REPLY = "mdart_lookup_reply"


def hash_address(node_id: int, bits: int) -> int:
    h = (node_id * 2654435761) & 0xFFFFFFFF
    h ^= h >> 16
    return h & ((1 << bits) - 1)


class _Entry:
    __slots__ = ("next_hop", "hops", "bneck", "refresh")

    def __init__(self, next_hop, hops, bneck, refresh):
        self.next_hop = next_hop
        self.hops = hops
        self.bneck = bneck  # bottleneck balance, ppm of capacity
        self.refresh = refresh


class _NodeState:
    __slots__ = ("address", "sections", "index_store", "addr_cache", "nbr_addr")

    def __init__(self, bits: int):
        self.address = None
        self.sections = [[] for _ in range(bits)]
        self.index_store = {}  # node id -> address (anchored here)
        self.addr_cache = {}   # node id -> (address, expiry)
        self.nbr_addr = {}     # neighbor id -> address


class AddressSpaceExhausted(RuntimeError):
    pass


class MdartProtocol(RoutingProtocol):
    name = "mdart"

    def __init__(self, net, engine, params=None, rng=None):
        super().__init__(net, engine, params, rng)
        p = self.params
        n = net.n
        self.bits = p.get("address_bits") or ((n - 1).bit_length() + 2 if n > 1 else 3)
        self.hello_period = p.get("hello_period_ms", 500)
        self.stale_periods = p.get("stale_periods", 3)
        self.m = p.get("entries_per_section", 2)
        self.cache_ttl = p.get("lookup_cache_ttl_ms", 5_000)
        self.register_delay = p.get("register_delay_ms", 5_000)
        self.lookup_timeout = p.get("lookup_timeout_ms", 2_000)
        self.control_ttl = p.get("control_ttl", 4 * self.bits)
        self.state = [_NodeState(self.bits) for _ in range(n)]
        self._payment_addr = {}  # payment id -> target address (carried in probes)
        self._pending_lookup = {}  # (node, target) -> dict(token, payments)

    # -- address assignment ------------------------------------------------------

    def _diff_level(self, a: int, b: int) -> int:
        return (a ^ b).bit_length() - 1

    def assign_addresses(self):
        """Sequential bootstrap in id order: the first node takes all-zeros;
        each joiner takes the base of the largest *empty* sibling subtree
        offered by an already-addressed neighbor (ties: lowest neighbor id),
        which keeps every populated address-prefix subtree a connected
        subgraph. When no empty slot remains, it falls back to the lowest free
        address inside a neighbor's partially filled sibling subtree; the XOR
        forwarding fallback keeps such nodes routable."""
        n = self.net.n
        assigned_sorted: list[int] = []

        def occupancy(base: int, k: int) -> tuple[int, int]:
            lo = bisect_left(assigned_sorted, base)
            hi = bisect_left(assigned_sorted, base + (1 << k))
            return lo, hi

        def lowest_free(base: int, k: int) -> int | None:
            lo, hi = occupancy(base, k)
            if hi - lo >= (1 << k):
                return None
            addr = base
            for i in range(lo, hi):
                if assigned_sorted[i] != addr:
                    break
                addr += 1
            return addr

        self.state[0].address = 0
        insort(assigned_sorted, 0)
        remaining = set(range(1, n))
        while remaining:
            u = min(
                (w for w in remaining
                 if any(v not in remaining for v, _ in self.net.adj[w])),
                default=None,
            )
            if u is None:
                raise AddressSpaceExhausted("network not connected at bootstrap")
            chosen = None
            for k in range(self.bits - 1, -1, -1):
                for v, _ in self.net.adj[u]:
                    if v in remaining:
                        continue
                    base = (self.state[v].address ^ (1 << k)) & ~((1 << k) - 1)
                    lo, hi = occupancy(base, k)
                    if lo == hi:
                        chosen = base
                        break
                if chosen is not None:
                    break
            if chosen is None:
                # no empty slot left: take the free address XOR-closest to a
                # neighbor so the tail of any route can still find this node
                best_d = 1 << (self.bits + 1)
                for v, _ in self.net.adj[u]:
                    if v in remaining:
                        continue
                    v_addr = self.state[v].address
                    for k in range(self.bits):  # smallest sibling subtree first
                        base = (v_addr ^ (1 << k)) & ~((1 << k) - 1)
                        addr = lowest_free(base, k)
                        if addr is not None:
                            d = addr ^ v_addr
                            if d < best_d:
                                chosen, best_d = addr, d
                            break
            if chosen is None:
                raise AddressSpaceExhausted(
                    f"no free sibling slot for node {u} with {self.bits} address bits"
                )
            self.state[u].address = chosen
            insort(assigned_sorted, chosen)
            remaining.discard(u)

    # -- bootstrap / timers ----------------------------------------------------------

    def _participates(self, node: int) -> bool:
        return self.net.nodes[node].behavior is not Behavior.NON_PARTICIPATING

    def on_bootstrap(self):
        self.assign_addresses()
        for u in range(self.net.n):
            if self._participates(u):
                self.engine.schedule_at(u % self.hello_period, self._hello_tick, u)
                self.engine.schedule_at(self.register_delay + (u % self.hello_period),
                                        self._register, u)

    def _hello_tick(self, u: int):
        eng = self.engine
        if eng.stopping or eng.dead[u]:
            return
        st = self.state[u]
        now = eng.clock
        horizon = now - self.stale_periods * self.hello_period
        summary = []
        for k, entries in enumerate(st.sections):
            if entries:
                entries[:] = [e for e in entries if e.refresh > horizon]
            if entries:
                best = entries[0]
                summary.append((k, best.hops, best.bneck))
        size = SIZE_TABLE_ENTRY * max(1, len(summary))
        eng.broadcast(u, KIND_HELLO, size, ROLE_ROUTER, (st.address, tuple(summary)))
        eng.schedule_in(self.hello_period, self._hello_tick, u)

    def _register(self, u: int):
        eng = self.engine
        if eng.stopping or eng.dead[u]:
            return
        st = self.state[u]
        target = hash_address(u, self.bits)
        self._route_control(u, KIND_REGISTER, target,
                            (u, st.address, target, self.control_ttl),
                            origin_role=ROLE_ROUTER)

    # -- table maintenance --------------------------------------------------------------

    def _upsert(self, st: _NodeState, k: int, next_hop: int, hops: int, bneck: int, now: int):
        entries = st.sections[k]
        for e in entries:
            if e.next_hop == next_hop:
                e.hops, e.bneck, e.refresh = hops, bneck, now
                break
        else:
            entries.append(_Entry(next_hop, hops, bneck, now))
        entries.sort(key=lambda e: (e.hops, -e.bneck, e.next_hop))
        del entries[self.m:]

    def _on_hello(self, u: int, v: int, payload):
        st = self.state[u]
        v_addr, summary = payload
        st.nbr_addr[v] = v_addr
        ch = self.net.channel_between(u, v)
        if ch is None or not ch.open:
            return
        now = self.engine.clock
        link_bneck = ch.balance_from(u) * 1_000_000 // ch.capacity
        h = self._diff_level(st.address, v_addr)
        if h >= 0:
            self._upsert(st, h, v, 1, link_bneck, now)
        for k, hops, bneck in summary:
            if k > h:
                self._upsert(st, k, v, hops + 1, min(link_bneck, bneck), now)

    def on_channel_closed(self, node: int, channel):
        st = self.state[node]
        peer = channel.peer(node)
        st.nbr_addr.pop(peer, None)
        for entries in st.sections:
            entries[:] = [e for e in entries if e.next_hop != peer]

    # -- address routing -------------------------------------------------------------------

    def _link_usable(self, u: int, v: int) -> bool:
        ch = self.net.channel_between(u, v)
        return ch is not None and ch.open and not self.engine.dead[v]

    def _xor_fallback(self, u: int, target_addr: int, visited=(),
                      min_balance: int = 0) -> int | None:
        """Greedy XOR progress over direct neighbors when the section table has
        no usable entry (happens when address allocation had to fragment a
        subtree); strictly decreasing distance keeps it loop-free."""
        st = self.state[u]
        best, best_d = None, st.address ^ target_addr
        for v, cid in self.net.adj[u]:
            addr = st.nbr_addr.get(v)
            if addr is None or v in visited:
                continue
            d = addr ^ target_addr
            if d >= best_d or not self._link_usable(u, v):
                continue
            if min_balance and self.net.channels[cid].balance_from(u) < min_balance:
                continue
            best, best_d = v, d
        return best

    def _control_next_hop(self, u: int, target_addr: int) -> int | None:
        st = self.state[u]
        if st.address == target_addr:
            return None
        k = self._diff_level(st.address, target_addr)
        for e in st.sections[k]:
            if self._link_usable(u, e.next_hop):
                return e.next_hop
        nh = self._xor_fallback(u, target_addr)
        if nh is not None:
            return nh
        # detour through finer sections toward the shared-prefix region; the
        # TTL bounds any wandering this causes on a fragmented address tree
        for j in range(k - 1, -1, -1):
            for e in st.sections[j]:
                if self._link_usable(u, e.next_hop):
                    return e.next_hop
        return None

    def _route_control(self, u: int, kind: str, target_addr: int, payload,
                       origin_role=ROLE_ROUTER):
        """Forward a control packet one hop toward target_addr; the local stop
        rule (no progress possible, or spent TTL) makes this node the anchor."""
        nh = self._control_next_hop(u, target_addr)
        if nh is None or payload[-1] <= 0:
            self._anchor_handle(u, kind, payload)
        else:
            payload = payload[:-1] + (payload[-1] - 1,)
            self.engine.send(u, nh, kind, SIZE_CONTROL, origin_role, payload)

    def _anchor_handle(self, u: int, kind: str, payload):
        st = self.state[u]
        if kind == KIND_REGISTER:
            node_id, addr, _target, _ttl = payload
            st.index_store[node_id] = addr
        elif kind == KIND_LOOKUP:
            requester, path, target_id, _th, _ttl = payload
            self._reply_lookup(u, requester, path, target_id,
                               st.index_store.get(target_id))
        # a LOOKUP_REPLY stranded away from its requester just times out

    def _reply_lookup(self, u: int, requester: int, path: tuple,
                      target_id: int, addr: int | None):
        """Answer a lookup by retracing the request's recorded path."""
        if u == requester:
            self._lookup_resolved(u, target_id, addr)
            return
        if path:
            self.engine.send(u, path[-1], KIND_LOOKUP_REPLY, SIZE_CONTROL,
                             ROLE_ROUTER, (requester, path[:-1], target_id, addr))

    # -- messages ------------------------------------------------------------------------------

    def on_message(self, node: int, sender: int, kind: str, payload):
        if not self._participates(node):
            return
        if kind == KIND_HELLO:
            self._on_hello(node, sender, payload)
        elif kind == KIND_REGISTER:
            # on-path caching: every transit node keeps the mapping, so lookups
            # meeting the register path anywhere resolve consistently
            self.state[node].index_store[payload[0]] = payload[1]
            self._route_control(node, kind, payload[2], payload)
        elif kind == KIND_LOOKUP:
            requester, path, target_id, target_hash, ttl = payload
            path = path + (sender,)
            st = self.state[node]
            if target_id in st.index_store:
                self._reply_lookup(node, requester, path, target_id,
                                   st.index_store[target_id])
            else:
                self._route_control(node, kind, target_hash,
                                    (requester, path, target_id, target_hash, ttl))
        elif kind == KIND_LOOKUP_REPLY:
            requester, path, target_id, addr = payload
            if node == requester:
                self._lookup_resolved(node, target_id, addr)
            elif path:
                self.engine.send(node, path[-1], KIND_LOOKUP_REPLY, SIZE_CONTROL,
                                 ROLE_ROUTER, (requester, path[:-1], target_id, addr))
        else:
            super().on_message(node, sender, kind, payload)

    # -- lookups ------------------------------------------------------------------------

    def _lookup_resolved(self, u: int, target_id: int, addr: int | None):
        pend = self._pending_lookup.pop((u, target_id), None)
        if addr is not None:
            self.state[u].addr_cache[target_id] = (addr, self.engine.clock + self.cache_ttl)
        if pend is None:
            return
        for p in pend["payments"]:
            if addr is None:
                self.engine.fail_payment(p, FailReason.NO_ROUTE)
            else:
                self._payment_addr[p.id] = addr
                self.engine.start_probe(p)

    def resolve_address(self, u: int, target: int) -> int | None:
        """Locally known address for target, if any."""
        st = self.state[u]
        cached = st.addr_cache.get(target)
        if cached is not None and cached[1] > self.engine.clock:
            return cached[0]
        if target in st.index_store:
            return st.index_store[target]
        if target in st.nbr_addr:
            return st.nbr_addr[target]
        return None

    def _start_lookup(self, u: int, target: int, payment: Payment):
        key = (u, target)
        pend = self._pending_lookup.get(key)
        if pend is not None:
            pend["payments"].append(payment)
            return
        pend = {"token": 0, "payments": [payment]}
        self._pending_lookup[key] = pend
        th = hash_address(target, self.bits)
        payload = (u, (), target, th, self.control_ttl)
        self._route_control(u, KIND_LOOKUP, th, payload, origin_role=ROLE_ENDPOINT)
        self.engine.schedule_in(self.lookup_timeout, self._lookup_deadline, key)

    def _lookup_deadline(self, key):
        pend = self._pending_lookup.pop(key, None)
        if pend is None:
            return
        for p in pend["payments"]:
            self.engine.fail_payment(p, FailReason.NO_ROUTE)

    # -- payments ------------------------------------------------------------------------

    def on_payment(self, payment: Payment):
        addr = self.resolve_address(payment.src, payment.dst)
        if addr is not None:
            self._payment_addr[payment.id] = addr
            self.engine.start_probe(payment)
        else:
            self._start_lookup(payment.src, payment.dst, payment)

    def next_hop(self, node: int, payment: Payment, visited) -> int | None:
        st = self.state[node]
        dest_addr = self._payment_addr.get(payment.id)
        if dest_addr is None or st.address == dest_addr:
            return None
        k = self._diff_level(st.address, dest_addr)

        def viable(e):
            if e.next_hop in visited or self.engine.dead[e.next_hop]:
                return False
            ch = self.net.channel_between(node, e.next_hop)
            return ch is not None and ch.open and ch.balance_from(node) >= payment.amount

        for e in st.sections[k]:  # ranked; fall through on missing balance
            if viable(e):
                return e.next_hop
        nh = self._xor_fallback(node, dest_addr, visited, payment.amount)
        if nh is not None:
            return nh
        for j in range(k - 1, -1, -1):  # detour via the shared-prefix region
            for e in st.sections[j]:
                if viable(e):
                    return e.next_hop
        return None

    def on_payment_resolved(self, payment: Payment):
        self._payment_addr.pop(payment.id, None)

    # -- metrics ------------------------------------------------------------------------

    def routing_entry_count(self, node: int) -> int:
        return sum(len(s) for s in self.state[node].sections)

    def memory_footprint(self, node: int) -> tuple[int, int]:
        st = self.state[node]
        entries = self.routing_entry_count(node) + len(st.index_store) + len(st.addr_cache)
        return entries, entries * SIZE_TABLE_ENTRY
