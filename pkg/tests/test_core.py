import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcnsim.core import (Behavior, ChannelClosed, FeePolicy, InsufficientBalance,
                         Node, TopologyKind, apply_transfer, build_network,
                         channel_fee, generate_topology)


class TestChannelFee:
    def test_base_plus_proportional(self):
        assert channel_fee(FeePolicy(1, 1000), 10_000) == 11

    def test_zero_policy(self):
        assert channel_fee(FeePolicy(0, 0), 500) == 0

    def test_full_rate(self):
        assert channel_fee(FeePolicy(2, 1_000_000), 7) == 9

    def test_rejects_nonpositive_amount(self):
        with pytest.raises(ValueError):
            channel_fee(FeePolicy(0, 0), 0)

    def test_negative_policy_rejected(self):
        with pytest.raises(ValueError):
            FeePolicy(-1, 0)


class TestApplyTransfer:
    def test_moves_balance_across(self):
        net = build_network(2, [(0, 1, 100, 100)])
        ch = net.channels[0]
        apply_transfer(ch, 0, 40)
        assert (ch.balance_a, ch.balance_b) == (60, 40)

    def test_insufficient_balance_leaves_state_untouched(self):
        net = build_network(2, [(0, 1, 100, 10)])
        ch = net.channels[0]
        with pytest.raises(InsufficientBalance):
            apply_transfer(ch, 0, 11)
        assert (ch.balance_a, ch.balance_b) == (10, 90)

    def test_closed_channel_rejected(self):
        net = build_network(2, [(0, 1, 100)])
        net.close_channel(0)
        with pytest.raises(ChannelClosed):
            apply_transfer(net.channels[0], 0, 1)

    @given(st.lists(st.tuples(st.booleans(), st.integers(1, 50)), max_size=60))
    def test_random_transfer_sequences_conserve_capacity(self, moves):
        net = build_network(2, [(0, 1, 100, 50)])
        ch = net.channels[0]
        for from_a, amount in moves:
            try:
                apply_transfer(ch, 0 if from_a else 1, amount)
            except InsufficientBalance:
                pass
            assert ch.balance_a + ch.balance_b == 100
            assert ch.balance_a >= 0 and ch.balance_b >= 0


def union_find_connected(n, edges):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    return len({find(i) for i in range(n)}) == 1


class TestGenerateTopology:
    def test_random_graph_is_connected_by_independent_oracle(self):
        net = generate_topology(TopologyKind.RANDOM, 30, {"mean_degree": 4}, seed=7)
        edges = [(c.node_a, c.node_b) for c in net.channels]
        assert union_find_connected(30, edges)
        assert 55 <= len(net.channels) <= 70  # ~ n*d/2

    def test_same_seed_same_edge_set(self):
        a = generate_topology(TopologyKind.RANDOM, 50, {"mean_degree": 4}, seed=3)
        b = generate_topology(TopologyKind.RANDOM, 50, {"mean_degree": 4}, seed=3)
        assert [(c.node_a, c.node_b) for c in a.channels] == \
               [(c.node_a, c.node_b) for c in b.channels]
        assert list(a.balances) == list(b.balances)

    def test_different_seed_differs(self):
        a = generate_topology(TopologyKind.RANDOM, 50, {"mean_degree": 4}, seed=3)
        b = generate_topology(TopologyKind.RANDOM, 50, {"mean_degree": 4}, seed=4)
        assert [(c.node_a, c.node_b) for c in a.channels] != \
               [(c.node_a, c.node_b) for c in b.channels]

    def test_hub_topology_has_dominant_hubs(self):
        net = generate_topology(TopologyKind.HUB, 30, {"hubs": 1, "attach": 1}, seed=1)
        degrees = sorted(len(net.adj[u]) for u in range(30))
        median = degrees[len(degrees) // 2]
        assert degrees[-1] >= 5 * median

    def test_hub_connected(self):
        net = generate_topology(TopologyKind.HUB, 200, {"hubs": 3, "attach": 2}, seed=9)
        edges = [(c.node_a, c.node_b) for c in net.channels]
        assert union_find_connected(200, edges)

    def test_two_nodes_single_channel(self):
        net = generate_topology(TopologyKind.RANDOM, 2, {"mean_degree": 1}, seed=0)
        assert len(net.channels) == 1
        assert {net.channels[0].node_a, net.channels[0].node_b} == {0, 1}

    def test_too_few_nodes_rejected(self):
        with pytest.raises(ValueError):
            generate_topology(TopologyKind.RANDOM, 1, {}, seed=0)

    def test_unattainable_degree_rejected(self):
        with pytest.raises(ValueError):
            generate_topology(TopologyKind.RANDOM, 4, {"mean_degree": 4}, seed=0)

    def test_capacity_split_and_range(self):
        net = generate_topology(TopologyKind.RANDOM, 30, {"mean_degree": 4}, seed=2)
        for ch in net.channels:
            assert ch.balance_a + ch.balance_b == ch.capacity
            assert 10_000 * 0.99 <= ch.capacity <= 1_000_000 * 1.01
            assert abs(ch.balance_a - ch.balance_b) <= 1


class TestAverageChannelCount:
    def test_pair(self):
        net = build_network(2, [(0, 1, 100)])
        assert net.average_channel_count() == 1.0

    def test_star(self):
        net = build_network(6, [(0, i, 100) for i in range(1, 6)])
        assert net.average_channel_count() == pytest.approx(10 / 6)

    def test_closing_one_drops_mean_by_two_over_n(self):
        net = build_network(6, [(0, i, 100) for i in range(1, 6)])
        before = net.average_channel_count()
        net.close_channel(2)
        assert before - net.average_channel_count() == pytest.approx(2 / 6)


class TestNodeInvariants:
    def test_fail_time_requires_faulty(self):
        with pytest.raises(ValueError):
            Node(0, Behavior.HONEST, fail_time=5)
        with pytest.raises(ValueError):
            Node(0, Behavior.FAULTY)
        Node(0, Behavior.FAULTY, fail_time=5)


def test_edge_dump_format():
    net = build_network(3, [(0, 1, 100, 60), (1, 2, 50, 25)])
    assert net.dump_edges() == "0 1 60 40\n1 2 25 25\n"
