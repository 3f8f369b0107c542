"""Payment-channel-network model: nodes, channels with directional balances
and fee policies, topology generation, and balance arithmetic.

Balances live in one flat int array shared with the route-search kernels;
Channel objects are thin views over it. Slot 2*cid holds the amount spendable
from endpoint a toward b, slot 2*cid+1 the reverse.
"""
from __future__ import annotations

import enum
import math
import random
from array import array
from dataclasses import dataclass, field

from .kernels import bfs_dist, INF_DIST


class Behavior(enum.Enum):
    HONEST = "honest"
    FAULTY = "faulty"
    MALICIOUS = "malicious"
    NON_PARTICIPATING = "non_participating"


@dataclass
class Node:
    id: int
    behavior: Behavior = Behavior.HONEST
    is_merchant: bool = False
    fail_time: int | None = None  # ms of virtual time, Faulty only

    def __post_init__(self):
        if (self.fail_time is not None) != (self.behavior is Behavior.FAULTY):
            raise ValueError("fail_time must be set exactly for faulty nodes")


@dataclass(frozen=True)
class FeePolicy:
    base_fee: int
    fee_rate_ppm: int

    def __post_init__(self):
        if self.base_fee < 0 or self.fee_rate_ppm < 0:
            raise ValueError("fee policy fields must be >= 0")


def channel_fee(policy: FeePolicy, amount: int) -> int:
    """Forwarding fee: base plus floor(amount * rate / 1e6)."""
    if amount <= 0:
        raise ValueError("fee amount must be > 0")
    return policy.base_fee + amount * policy.fee_rate_ppm // 1_000_000


class InsufficientBalance(Exception):
    pass


class ChannelClosed(Exception):
    pass


class Channel:
    """Bidirectional payment channel; balances are views into Network arrays."""

    __slots__ = ("id", "node_a", "node_b", "capacity", "policy_a", "policy_b", "_bal", "_open")

    def __init__(self, cid, node_a, node_b, capacity, policy_a, policy_b, bal, open_flags):
        if node_a == node_b:
            raise ValueError("channel endpoints must differ")
        self.id = cid
        self.node_a = node_a
        self.node_b = node_b
        self.capacity = capacity
        self.policy_a = policy_a
        self.policy_b = policy_b
        self._bal = bal
        self._open = open_flags

    @property
    def balance_a(self) -> int:
        return self._bal[2 * self.id]

    @property
    def balance_b(self) -> int:
        return self._bal[2 * self.id + 1]

    @property
    def open(self) -> bool:
        return bool(self._open[self.id])

    def peer(self, node: int) -> int:
        return self.node_b if node == self.node_a else self.node_a

    def slot_from(self, node: int) -> int:
        """Directional balance slot spendable by `node`."""
        if node == self.node_a:
            return 2 * self.id
        if node == self.node_b:
            return 2 * self.id + 1
        raise ValueError(f"node {node} not an endpoint of channel {self.id}")

    def policy_from(self, node: int) -> FeePolicy:
        """Fee policy charged when `node` forwards out of this channel."""
        if node == self.node_a:
            return self.policy_a
        if node == self.node_b:
            return self.policy_b
        raise ValueError(f"node {node} not an endpoint of channel {self.id}")

    def balance_from(self, node: int) -> int:
        return self._bal[self.slot_from(node)]


def apply_transfer(channel: Channel, from_node: int, amount: int) -> Channel:
    """Atomically move `amount` from one side of the channel to the other."""
    if not channel.open:
        raise ChannelClosed(f"channel {channel.id} is closed")
    src_slot = channel.slot_from(from_node)
    dst_slot = src_slot ^ 1
    bal = channel._bal
    if bal[src_slot] < amount:
        raise InsufficientBalance(
            f"channel {channel.id}: {bal[src_slot]} available, {amount} requested"
        )
    bal[src_slot] -= amount
    bal[dst_slot] += amount
    return channel


@dataclass
class Network:
    nodes: list[Node]
    channels: list[Channel]
    balances: array  # 'q', len 2*C
    open_flags: array  # 'b', len C
    adj: list[list[tuple[int, int]]]  # node -> [(neighbor, channel_id)], neighbor-sorted
    chan_by_pair: dict[tuple[int, int], int]
    topo_version: int = 0
    # CSR mirrors of adj for the kernels; csr_dir[e] is the balance slot for
    # the edge's forwarding direction, csr_base/csr_ppm its forwarding fee.
    csr_indptr: array = field(default_factory=lambda: array("i"))
    csr_nbr: array = field(default_factory=lambda: array("i"))
    csr_chan: array = field(default_factory=lambda: array("i"))
    csr_dir: array = field(default_factory=lambda: array("i"))
    csr_base: array = field(default_factory=lambda: array("q"))
    csr_ppm: array = field(default_factory=lambda: array("q"))

    @property
    def n(self) -> int:
        return len(self.nodes)

    def channel_between(self, u: int, v: int) -> Channel | None:
        cid = self.chan_by_pair.get((u, v) if u < v else (v, u))
        return self.channels[cid] if cid is not None else None

    def neighbors(self, u: int) -> list[tuple[int, int]]:
        return self.adj[u]

    def close_channel(self, cid: int) -> None:
        if self.open_flags[cid]:
            self.open_flags[cid] = 0
            self.topo_version += 1

    def open_channel_count(self) -> int:
        return sum(self.open_flags)

    def average_channel_count(self) -> float:
        """Mean over nodes of open channels incident to the node."""
        if not self.nodes:
            raise ValueError("network has no nodes")
        return 2.0 * self.open_channel_count() / self.n

    def dump_edges(self) -> str:
        """Debug edge list: `node_a node_b balance_a balance_b` per line."""
        lines = [
            f"{c.node_a} {c.node_b} {c.balance_a} {c.balance_b}"
            for c in self.channels
        ]
        return "\n".join(lines) + ("\n" if lines else "")


class TopologyKind(enum.Enum):
    RANDOM = "random"
    HUB = "hub"


def build_network(n: int, edge_specs: list) -> Network:
    """Construct a network from explicit edges, for hand-built topologies.

    Each spec is (a, b, capacity) or (a, b, capacity, balance_a) or
    (a, b, capacity, balance_a, policy_a, policy_b); omitted balances split
    the capacity evenly and omitted policies are zero-fee.
    """
    nodes = [Node(i) for i in range(n)]
    balances = array("q")
    open_flags = array("b")
    channels: list[Channel] = []
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    chan_by_pair: dict[tuple[int, int], int] = {}
    zero = FeePolicy(0, 0)
    for cid, spec in enumerate(edge_specs):
        a, b, cap = spec[0], spec[1], spec[2]
        bal_a = spec[3] if len(spec) > 3 else cap // 2
        pol_a = spec[4] if len(spec) > 4 else zero
        pol_b = spec[5] if len(spec) > 5 else zero
        if not 0 <= bal_a <= cap:
            raise ValueError("balance_a must lie within the capacity")
        key = (a, b) if a < b else (b, a)
        if key in chan_by_pair:
            raise ValueError(f"duplicate channel for pair {key}")
        balances.append(bal_a)
        balances.append(cap - bal_a)
        open_flags.append(1)
        channels.append(Channel(cid, a, b, cap, pol_a, pol_b, balances, open_flags))
        adj[a].append((b, cid))
        adj[b].append((a, cid))
        chan_by_pair[key] = cid
    for lst in adj:
        lst.sort()
    net = Network(nodes, channels, balances, open_flags, adj, chan_by_pair)
    _build_csr(net)
    return net


def _build_network(n: int, edges: list[tuple[int, int]], rng: random.Random,
                   capacity_range: tuple[int, int], fee_base_max: int,
                   fee_rate_max_ppm: int) -> Network:
    nodes = [Node(i) for i in range(n)]
    balances = array("q", [0]) * 0
    open_flags = array("b", [1]) * 0
    channels: list[Channel] = []
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    chan_by_pair: dict[tuple[int, int], int] = {}

    lo, hi = capacity_range
    log_lo, log_hi = math.log(lo), math.log(hi)
    for cid, (a, b) in enumerate(edges):
        cap = int(round(math.exp(rng.uniform(log_lo, log_hi))))
        bal_a = cap // 2
        pol_a = FeePolicy(rng.randint(0, fee_base_max), rng.randint(0, fee_rate_max_ppm))
        pol_b = FeePolicy(rng.randint(0, fee_base_max), rng.randint(0, fee_rate_max_ppm))
        balances.append(bal_a)
        balances.append(cap - bal_a)
        open_flags.append(1)
        ch = Channel(cid, a, b, cap, pol_a, pol_b, balances, open_flags)
        channels.append(ch)
        adj[a].append((b, cid))
        adj[b].append((a, cid))
        chan_by_pair[(a, b) if a < b else (b, a)] = cid
    for lst in adj:
        lst.sort()

    net = Network(nodes, channels, balances, open_flags, adj, chan_by_pair)
    _build_csr(net)
    return net


def _build_csr(net: Network) -> None:
    indptr = array("i", [0])
    nbr = array("i")
    chan = array("i")
    dirslot = array("i")
    base = array("q")
    ppm = array("q")
    for u in range(net.n):
        for v, cid in net.adj[u]:
            ch = net.channels[cid]
            nbr.append(v)
            chan.append(cid)
            dirslot.append(ch.slot_from(u))
            pol = ch.policy_from(u)
            base.append(pol.base_fee)
            ppm.append(pol.fee_rate_ppm)
        indptr.append(len(nbr))
    net.csr_indptr, net.csr_nbr, net.csr_chan = indptr, nbr, chan
    net.csr_dir, net.csr_base, net.csr_ppm = dirslot, base, ppm


def _connected(n: int, edges: list[tuple[int, int]]) -> bool:
    if n == 0:
        return True
    adj_ptr = array("i", [0] * (n + 1))
    for a, b in edges:
        adj_ptr[a + 1] += 1
        adj_ptr[b + 1] += 1
    for i in range(n):
        adj_ptr[i + 1] += adj_ptr[i]
    nbr = array("i", [0]) * (2 * len(edges))
    fill = list(adj_ptr[:n])
    for a, b in edges:
        nbr[fill[a]] = b
        fill[a] += 1
        nbr[fill[b]] = a
        fill[b] += 1
    open_all = array("b", [1]) * max(len(edges), 1)
    csr_chan = array("i", [0] * (2 * len(edges)))  # reachability only; all edges open
    dist = bfs_dist(n, adj_ptr, nbr, csr_chan, open_all, 0)
    return all(d < INF_DIST for d in dist)


def _components(n: int, edges: list[tuple[int, int]]) -> list[list[int]]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    comps: dict[int, list[int]] = {}
    for i in range(n):
        comps.setdefault(find(i), []).append(i)
    return sorted(comps.values(), key=lambda c: c[0])


def generate_topology(kind: TopologyKind, n: int, params: dict | None = None,
                      seed: int = 0) -> Network:
    """Deterministic connected topology for a given (kind, n, params, seed)."""
    if n < 2:
        raise ValueError("need at least 2 nodes")
    params = dict(params or {})
    capacity_range = tuple(params.pop("capacity_range", (10_000, 1_000_000)))
    fee_base_max = params.pop("fee_base_max", 5)
    fee_rate_max_ppm = params.pop("fee_rate_max_ppm", 1_000)

    rng = random.Random(f"topo|{kind.value}|{n}|{seed}")
    if kind is TopologyKind.RANDOM:
        degree = params.pop("mean_degree", 4)
        if degree >= n:
            raise ValueError("mean degree must be < n")
        m = max(n - 1, round(n * degree / 2))
        m = min(m, n * (n - 1) // 2)
        pairs: set[tuple[int, int]] = set()
        while len(pairs) < m:
            a = rng.randrange(n)
            b = rng.randrange(n)
            if a != b:
                pairs.add((a, b) if a < b else (b, a))
        edges = sorted(pairs)
        comps = _components(n, edges)
        for comp in comps[1:]:  # patch connectivity: bridge to the first component
            edges.append((comps[0][0], comp[0]) if comps[0][0] < comp[0] else (comp[0], comps[0][0]))
        edges.sort()
    elif kind is TopologyKind.HUB:
        hubs = params.pop("hubs", 1)
        attach = params.pop("attach", 2)
        if hubs < 1 or attach < 1:
            raise ValueError("hub params must be >= 1")
        if hubs >= n:
            raise ValueError("hub count must be < n")
        pairs = set()
        ends: list[int] = []  # endpoint multiset; degree-proportional sampling
        for h in range(1, hubs):
            pairs.add((h - 1, h))
            ends += [h - 1, h]
        if hubs == 1:
            ends = [0]
        for i in range(hubs, n):
            targets: set[int] = set()
            want = min(attach, i)
            guard = 0
            while len(targets) < want:
                t = ends[rng.randrange(len(ends))]
                guard += 1
                if t != i:
                    targets.add(t)
                if guard > 50 * want:  # tiny ends list early on
                    for t in range(i):
                        if len(targets) >= want:
                            break
                        targets.add(t)
            for t in sorted(targets):
                pairs.add((t, i) if t < i else (i, t))
                ends += [t, i]
        edges = sorted(pairs)
    else:
        raise ValueError(f"unknown topology kind {kind}")

    if params:
        raise ValueError(f"unknown topology params: {sorted(params)}")
    net = _build_network(n, edges, rng, capacity_range, fee_base_max, fee_rate_max_ppm)
    assert _connected(n, edges), "topology generator produced a disconnected graph"
    return net
