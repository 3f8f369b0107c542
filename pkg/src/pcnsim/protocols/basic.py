"""BASIC: the global-knowledge oracle baseline.

Explicitly unrealistic: it reads the live network through a shared structure
instead of exchanging messages, and routes over the minimum-hop path whose
every directional hop balance covers the amount plus downstream fees, breaking
ties toward the lexicographically smallest node sequence. Its protocol-private
state is the all-pairs hop-distance matrix (n^2 entries), materialized one
destination column at a time and invalidated whenever the topology changes.
"""
from __future__ import annotations

from ..engine import FailReason, Payment, SIZE_TABLE_ENTRY
from ..kernels import bfs_dist, feasible_route
from .base import RoutingProtocol


class BasicProtocol(RoutingProtocol):
    name = "basic"

    def __init__(self, net, engine, params=None, rng=None):
        super().__init__(net, engine, params, rng)
        self.hop_cap = self.params.get("hop_cap", 20)
        self.expand_cap = self.params.get("expand_cap", 1_000_000)
        self._columns: dict[int, object] = {}  # dst -> distance column
        self._version = -1

    def dist_column(self, dst: int):
        net = self.net
        if net.topo_version != self._version:
            self._columns.clear()
            self._version = net.topo_version
        col = self._columns.get(dst)
        if col is None:
            col = bfs_dist(net.n, net.csr_indptr, net.csr_nbr, net.csr_chan,
                           net.open_flags, dst)
            self._columns[dst] = col
        return col

    def route(self, src: int, dst: int, amount: int) -> list[int] | None:
        """Feasible minimum-hop route or None; pure read of the live network."""
        net = self.net
        return feasible_route(
            net.n, net.csr_indptr, net.csr_nbr, net.csr_chan, net.csr_dir,
            net.csr_base, net.csr_ppm, net.balances, net.open_flags,
            src, dst, amount, self.dist_column(dst), self.hop_cap, self.expand_cap,
        )

    def on_payment(self, payment: Payment):
        path = self.route(payment.src, payment.dst, payment.amount)
        if path is None:
            self.engine.fail_payment(payment, FailReason.NO_ROUTE)
        else:
            self.engine.execute_route(payment, path)

    def memory_footprint(self, node: int) -> tuple[int, int]:
        # the shared all-pairs matrix, divided evenly across nodes
        n = self.net.n
        return (n, n * SIZE_TABLE_ENTRY)
