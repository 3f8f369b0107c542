import pytest

from pcnsim.core import FeePolicy, build_network
from pcnsim.engine import Engine, Payment
from pcnsim.protocols.base import RoutingProtocol


class FixedRouteProtocol(RoutingProtocol):
    """Routes every payment over a preassigned path; for engine-level tests."""

    name = "fixed"

    def __init__(self, net, engine, routes=None):
        super().__init__(net, engine)
        self.routes = dict(routes or {})

    def on_payment(self, payment):
        path = self.routes.get(payment.id)
        if path is None:
            from pcnsim.engine import FailReason

            self.engine.fail_payment(payment, FailReason.NO_ROUTE)
        else:
            self.engine.execute_route(payment, path)


def make_engine(net, routes=None, seed="test"):
    engine = Engine(net, seed_str=seed)
    engine.protocol = FixedRouteProtocol(net, engine, routes)
    return engine


def run_payment(net, path, amount, routes_extra=None, pid=0):
    """Submit one payment over a fixed path and drive the loop to completion."""
    routes = {pid: path}
    if routes_extra:
        routes.update(routes_extra)
    engine = make_engine(net, routes)
    payment = Payment(pid, path[0], path[-1], amount, created_at=0)
    engine.total_payments = 1
    engine.schedule_at(0, lambda _: engine.submit_payment(payment), None)
    engine.run_loop()
    return engine, payment


@pytest.fixture
def fee_1_1000():
    return FeePolicy(1, 1000)


def line_network(k, capacity=1_000_000, policy=None):
    """0 - 1 - ... - (k-1) line with symmetric balances."""
    pol = policy or FeePolicy(0, 0)
    return build_network(k, [(i, i + 1, capacity, capacity // 2, pol, pol)
                             for i in range(k - 1)])
