"""Deterministic discrete-event core: virtual clock, message delivery with
latency, packet accounting, and atomic multi-hop payment execution.

Payments run in three walks. A probe walks forward with each node choosing the
next hop inside its own callback and a reply returns the materialized route to
the source (BASIC skips this, returning a full route from global knowledge).
The lock walk then reserves amount-plus-downstream-fees hop by hop, and the
settle walk commits; any disruption releases every reservation, so balances
after a failed payment equal the pre-payment state exactly.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from heapq import heappop, heappush

from .core import Behavior, Network, channel_fee

# Fixed per-kind packet sizes (bytes); table updates are sized per entry.
SIZE_CONTROL = 64
SIZE_LOCK = 128
SIZE_TABLE_ENTRY = 32

ROLE_ENDPOINT = 0
ROLE_ROUTER = 1

# Message kinds owned by the engine; all others route to protocol.on_message.
KIND_PROBE = "probe"
KIND_PROBE_REPLY = "probe_reply"
KIND_LOCK = "lock"
KIND_SETTLE = "settle"

OUTCOME_FORWARDED = "forwarded"
OUTCOME_DROPPED = "dropped"


class PaymentStatus(enum.Enum):
    PENDING = "pending"
    SUCCEEDED = "succeeded"
    FAILED = "failed"


class FailReason(enum.Enum):
    INSUFFICIENT_BALANCE = "insufficient_balance"
    NODE_FAILED = "node_failed"
    MALICIOUS_DROP = "malicious_drop"
    REFUSED = "refused"
    NO_ROUTE = "no_route"


@dataclass
class Payment:
    id: int
    src: int
    dst: int
    amount: int
    created_at: int
    status: PaymentStatus = PaymentStatus.PENDING
    reason: FailReason | None = None
    fee_paid: int | None = None
    hops: int | None = None


class _PayRun:
    """Engine-side bookkeeping for one payment attempt."""

    __slots__ = ("payment", "path", "visited", "edges", "flows", "locks", "stage")

    def __init__(self, payment):
        self.payment = payment
        self.path = [payment.src]
        self.visited = {payment.src}
        self.edges = []
        self.flows = []
        self.locks = []  # (slot, amount) reserved, edge order
        self.stage = "probe"


def route_flows(net: Network, path: list[int], amount: int) -> tuple[list, list[int]]:
    """Channels and per-hop flow for a route; flow over hop i is amount plus
    the fees of every intermediary after it (each computed on its outbound)."""
    edges = []
    for u, v in zip(path, path[1:]):
        ch = net.channel_between(u, v)
        if ch is None:
            raise ValueError(f"no channel between {u} and {v}")
        edges.append(ch)
    k = len(edges)
    flows = [0] * k
    flow = amount
    for i in range(k - 1, -1, -1):
        flows[i] = flow
        if i > 0:
            pol = edges[i].policy_from(path[i])
            flow += channel_fee(pol, flow)
    return edges, flows


class Engine:
    """Single-run event loop; strictly single-threaded, integer-millisecond time."""

    def __init__(self, net: Network, seed_str: str, latency_ms=(10, 100),
                 payment_timeout_ms=60_000, trace=None):
        self.net = net
        self.clock = 0
        self._heap = []
        self._seq = 0
        self._lat_lo, self._lat_hi = latency_ms
        self.payment_timeout_ms = payment_timeout_ms
        self.latency_rng = random.Random(f"latency|{seed_str}")
        self.trace = trace  # optional callable(line)

        self.node_pkt_count = 0
        self.node_pkt_bytes = 0
        self.router_pkt_count = 0
        self.router_pkt_bytes = 0
        self.drop_count = 0
        self.sent_total = 0

        self.dead = bytearray(net.n)
        self.close_log = []  # (time, channel_id)
        self.payments: list[Payment] = []
        self._runs: dict[int, _PayRun] = {}
        self.total_payments = 0
        self.resolved_payments = 0
        self.stopping = False
        self.end_time = 0
        self.protocol = None  # wired by the runner after construction
        self.success_ledger = None  # set to a list to record committed deltas

    # -- scheduling ---------------------------------------------------------

    def schedule_at(self, t: int, fn, arg=None):
        self._seq += 1
        heappush(self._heap, (t, self._seq, fn, arg))

    def schedule_in(self, dt: int, fn, arg=None):
        self.schedule_at(self.clock + dt, fn, arg)

    def run_loop(self, stop_at: int | None = None):
        self.stopping = False
        heap = self._heap
        while heap:
            t, _, fn, arg = heappop(heap)
            if stop_at is not None and t > stop_at:
                self.clock = stop_at
                break
            self.clock = t
            fn(arg)
            if self.stopping:
                break
        self.end_time = self.clock

    def _check_done(self):
        if self.total_payments and self.resolved_payments >= self.total_payments:
            self.stopping = True

    # -- messaging ----------------------------------------------------------

    def send(self, sender: int, receiver: int, kind: str, size: int,
             role: int, payload=None) -> bool:
        """Schedule delivery over the sender->receiver channel; drops on a
        closed channel or failed sender, counting the drop instead."""
        ch = self.net.channel_between(sender, receiver)
        if ch is None:
            raise ValueError(f"send between non-neighbors {sender}->{receiver}")
        if size <= 0:
            raise ValueError("payload_size must be > 0")
        if not ch.open or self.dead[sender]:
            self.drop_count += 1
            return False
        self.sent_total += 1
        if role == ROLE_ENDPOINT:
            self.node_pkt_count += 1
            self.node_pkt_bytes += size
        else:
            self.router_pkt_count += 1
            self.router_pkt_bytes += size
        if self.trace is not None:
            self.trace(f"{self.clock} {kind} {sender} {receiver} {size}")
        lat = self.latency_rng.randint(self._lat_lo, self._lat_hi)
        self.schedule_at(self.clock + lat, self._deliver, (sender, receiver, kind, payload))
        return True

    def broadcast(self, node: int, kind: str, size: int, role: int, payload=None) -> int:
        """Send to every channel neighbor; returns the number scheduled."""
        sent = 0
        for v, cid in self.net.adj[node]:
            if self.send(node, v, kind, size, role, payload):
                sent += 1
        return sent

    def _deliver(self, arg):
        sender, receiver, kind, payload = arg
        if self.dead[receiver]:
            if kind in (KIND_PROBE, KIND_PROBE_REPLY, KIND_LOCK, KIND_SETTLE):
                self._resolve_fail(self._runs.get(payload), FailReason.NODE_FAILED, receiver)
            return
        if kind == KIND_PROBE:
            self._on_probe(receiver, payload)
        elif kind == KIND_PROBE_REPLY:
            self._on_probe_reply(receiver, payload)
        elif kind == KIND_LOCK:
            self._on_lock(receiver, payload)
        elif kind == KIND_SETTLE:
            self._on_settle(receiver, payload)
        else:
            self.protocol.on_message(receiver, sender, kind, payload)

    # -- payment lifecycle --------------------------------------------------

    def submit_payment(self, payment: Payment):
        self.payments.append(payment)
        self._runs[payment.id] = _PayRun(payment)
        self.schedule_at(payment.created_at + self.payment_timeout_ms,
                         self._deadline, payment.id)
        if payment.src == payment.dst:
            payment.status = PaymentStatus.SUCCEEDED
            payment.fee_paid = 0
            payment.hops = 0
            self._finish(self._runs[payment.id])
            return
        self.protocol.on_payment(payment)

    def _deadline(self, pid: int):
        run = self._runs.get(pid)
        if run is not None and run.payment.status is PaymentStatus.PENDING:
            self._resolve_fail(run, FailReason.NO_ROUTE, None)

    def fail_payment(self, payment: Payment, reason: FailReason):
        """Protocol-visible failure entry point (discovery timeouts etc.)."""
        run = self._runs.get(payment.id)
        if run is not None and payment.status is PaymentStatus.PENDING:
            self._resolve_fail(run, reason, None)

    # -- probe walk ---------------------------------------------------------

    def start_probe(self, payment: Payment):
        """(Re)start the hop-by-hop route materialization walk."""
        run = self._runs.get(payment.id)
        if run is None or payment.status is not PaymentStatus.PENDING:
            return
        run.path = [payment.src]
        run.visited = {payment.src}
        run.stage = "probe"
        self._probe_step(payment.src, run)

    def _probe_step(self, u: int, run: _PayRun):
        p = run.payment
        nh = self.protocol.next_hop(u, p, run.visited)
        if nh is None or nh in run.visited:
            self._probe_failed(run, u)
            return
        role = ROLE_ENDPOINT if u == p.src else ROLE_ROUTER
        if not self.send(u, nh, KIND_PROBE, SIZE_CONTROL, role, p.id):
            self._probe_failed(run, u)

    def _probe_failed(self, run: _PayRun, at_node: int):
        if run.payment.status is not PaymentStatus.PENDING:
            return
        if not self.protocol.on_probe_failed(run.payment, at_node):
            self._resolve_fail(run, FailReason.NO_ROUTE, None)

    def _on_probe(self, v: int, pid: int):
        run = self._runs.get(pid)
        if run is None or run.payment.status is not PaymentStatus.PENDING:
            return
        p = run.payment
        node = self.net.nodes[v]
        if node.behavior is Behavior.NON_PARTICIPATING and v != p.dst:
            self._resolve_fail(run, FailReason.REFUSED, v)
            return
        run.path.append(v)
        run.visited.add(v)
        if v == p.dst:
            run.stage = "probe_reply"
            self._probe_reply_hop(len(run.path) - 1, run)
        else:
            self._probe_step(v, run)

    def _probe_reply_hop(self, pos: int, run: _PayRun):
        p = run.payment
        u = run.path[pos]
        w = run.path[pos - 1]
        role = ROLE_ENDPOINT if u == p.dst else ROLE_ROUTER
        if not self.send(u, w, KIND_PROBE_REPLY, SIZE_CONTROL, role, p.id):
            self._resolve_fail(run, FailReason.NODE_FAILED, u)

    def _on_probe_reply(self, w: int, pid: int):
        run = self._runs.get(pid)
        if run is None or run.payment.status is not PaymentStatus.PENDING:
            return
        pos = run.path.index(w)
        if pos == 0:
            self.execute_route(run.payment, run.path)
        else:
            self._probe_reply_hop(pos, run)

    # -- lock / settle walks --------------------------------------------------

    def execute_route(self, payment: Payment, path: list[int]):
        """Two-phase execution over a materialized route."""
        run = self._runs.get(payment.id)
        if run is None or payment.status is not PaymentStatus.PENDING:
            return
        if path[0] != payment.src or path[-1] != payment.dst:
            raise ValueError("route must run src -> dst")
        run.path = list(path)
        run.stage = "lock"
        try:
            run.edges, run.flows = route_flows(self.net, run.path, payment.amount)
        except ValueError:
            self._resolve_fail(run, FailReason.NO_ROUTE, None)
            return
        run.locks = []
        self._lock_forward(0, run)

    def _lock_forward(self, pos: int, run: _PayRun):
        """Node path[pos] reserves its outbound hop and forwards the lock."""
        p = run.payment
        u = run.path[pos]
        ch = run.edges[pos]
        flow = run.flows[pos]
        slot = ch.slot_from(u)
        if not ch.open:
            self._resolve_fail(run, FailReason.NODE_FAILED, u)
            return
        if self.net.balances[slot] < flow:
            self._resolve_fail(run, FailReason.INSUFFICIENT_BALANCE, u)
            return
        self.net.balances[slot] -= flow
        run.locks.append((slot, flow))
        role = ROLE_ENDPOINT if u == p.src else ROLE_ROUTER
        if not self.send(u, run.path[pos + 1], KIND_LOCK, SIZE_LOCK, role, p.id):
            self._resolve_fail(run, FailReason.NODE_FAILED, u)

    def _on_lock(self, v: int, pid: int):
        run = self._runs.get(pid)
        if run is None or run.payment.status is not PaymentStatus.PENDING:
            return
        p = run.payment
        pos = len(run.locks)  # locks so far = position of v on the path
        node = self.net.nodes[v]
        if v == p.dst:
            run.stage = "settle"
            self._settle_hop(len(run.path) - 1, run)
            return
        if node.behavior is Behavior.NON_PARTICIPATING:
            self._resolve_fail(run, FailReason.REFUSED, v)
            return
        self._lock_forward(pos, run)

    def _settle_hop(self, pos: int, run: _PayRun):
        p = run.payment
        u = run.path[pos]
        w = run.path[pos - 1]
        role = ROLE_ENDPOINT if u == p.dst else ROLE_ROUTER
        if not self.send(u, w, KIND_SETTLE, SIZE_CONTROL, role, p.id):
            self._resolve_fail(run, FailReason.NODE_FAILED, u)

    def _on_settle(self, w: int, pid: int):
        run = self._runs.get(pid)
        if run is None or run.payment.status is not PaymentStatus.PENDING:
            return
        p = run.payment
        node = self.net.nodes[w]
        if node.behavior is Behavior.MALICIOUS:
            self._resolve_fail(run, FailReason.MALICIOUS_DROP, w)
            return
        pos = run.path.index(w)
        if pos == 0:
            self._commit(run)
        else:
            self._settle_hop(pos, run)

    # -- resolution ----------------------------------------------------------

    def _commit(self, run: _PayRun):
        p = run.payment
        bal = self.net.balances
        # locks already debited each forwarding side; credit each receiving side
        deltas = []
        for i, (ch, flow) in enumerate(zip(run.edges, run.flows)):
            out_slot = ch.slot_from(run.path[i])
            in_slot = ch.slot_from(run.path[i + 1])
            bal[in_slot] += flow
            deltas.append((out_slot, -flow))
            deltas.append((in_slot, flow))
        if self.success_ledger is not None:
            self.success_ledger.append((p.id, deltas))
        p.status = PaymentStatus.SUCCEEDED
        p.fee_paid = run.flows[0] - p.amount
        p.hops = len(run.edges)
        # every hop resolved cleanly: each observer credits its next hop
        proto = self.protocol
        path = run.path
        for j in range(1, len(path)):
            proto.on_hop_outcome(path[j - 1], path[j], OUTCOME_FORWARDED)
        self._finish(run)

    def _resolve_fail(self, run: _PayRun | None, reason: FailReason, fail_node: int | None):
        if run is None:
            return
        p = run.payment
        if p.status is not PaymentStatus.PENDING:
            return
        bal = self.net.balances
        for slot, amt in run.locks:
            bal[slot] += amt
        run.locks = []
        p.status = PaymentStatus.FAILED
        p.reason = reason
        # only the hop whose duty failed resolves to an observation; the other
        # hops of an unwound payment are ambiguous to their observers
        behavioral = reason in (FailReason.NODE_FAILED, FailReason.REFUSED,
                                FailReason.MALICIOUS_DROP)
        if (run.stage in ("lock", "settle") and behavioral
                and fail_node is not None and fail_node in run.path):
            fail_pos = run.path.index(fail_node)
            if fail_pos > 0:
                self.protocol.on_hop_outcome(run.path[fail_pos - 1], fail_node,
                                             OUTCOME_DROPPED)
        self._finish(run)

    def _finish(self, run: _PayRun):
        self.resolved_payments += 1
        del self._runs[run.payment.id]
        self.protocol.on_payment_resolved(run.payment)
        self._check_done()

    # -- topology events ------------------------------------------------------

    def fail_node(self, v: int):
        """Faulty-node death: close incident channels and notify live peers."""
        if self.dead[v]:
            return
        self.dead[v] = 1
        for nbr, cid in self.net.adj[v]:
            ch = self.net.channels[cid]
            if ch.open:
                self.net.close_channel(cid)
                self.close_log.append((self.clock, cid))
                if not self.dead[nbr]:
                    self.protocol.on_channel_closed(nbr, ch)
