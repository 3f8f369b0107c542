"""Route-search kernel tests: the pure backend against an exhaustive
enumeration oracle, and compiled/pure backend parity."""
import itertools
import os
import random
import subprocess
import sys

import pytest

from pcnsim.core import FeePolicy, build_network, channel_fee
from pcnsim.kernels import INF_DIST
from pcnsim.kernels import pathfind_py

try:
    from pcnsim.kernels import _pathfind as compiled
except ImportError:
    compiled = None


def enumerate_feasible(net, src, dst, amount, hop_cap=6):
    """Oracle: all simple paths by brute force; feasibility by direct fee
    arithmetic; returns the minimum-hop, lexicographically smallest one."""
    n = net.n
    best = None
    for length in range(1, hop_cap + 1):
        for middle in itertools.permutations([v for v in range(n) if v not in (src, dst)],
                                             length - 1):
            path = [src, *middle, dst]
            ok = all(net.channel_between(u, v) for u, v in zip(path, path[1:]))
            if not ok:
                continue
            flow = amount
            feasible = True
            for i in range(length - 1, -1, -1):
                ch = net.channel_between(path[i], path[i + 1])
                if ch.balance_from(path[i]) < flow or not ch.open:
                    feasible = False
                    break
                if i > 0:
                    flow += channel_fee(ch.policy_from(path[i]), flow)
            if feasible and (best is None or (length, path) < (len(best) - 1, best)):
                best = path
        if best is not None:
            return best
    return None


def kernel_route(backend, net, src, dst, amount, hop_cap=6):
    dist = backend.bfs_dist(net.n, net.csr_indptr, net.csr_nbr, net.csr_chan,
                            net.open_flags, dst)
    return backend.feasible_route(
        net.n, net.csr_indptr, net.csr_nbr, net.csr_chan, net.csr_dir,
        net.csr_base, net.csr_ppm, net.balances, net.open_flags,
        src, dst, amount, dist, hop_cap, 1_000_000,
    )


def random_small_net(rng):
    n = rng.randint(3, 6)
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    edges = []
    for a, b in pairs:
        if rng.random() < 0.6:
            cap = rng.randint(100, 5000)
            edges.append((a, b, cap, rng.randint(0, cap),
                          FeePolicy(rng.randint(0, 3), rng.randint(0, 5000)),
                          FeePolicy(rng.randint(0, 3), rng.randint(0, 5000))))
    if not edges:
        edges = [(0, 1, 100, 50)]
    return build_network(n, edges)


class TestAgainstEnumerationOracle:
    def test_randomized_small_graphs(self):
        rng = random.Random(42)
        checked = 0
        for _ in range(300):
            net = random_small_net(rng)
            src, dst = rng.sample(range(net.n), 2)
            amount = rng.randint(1, 2000)
            expect = enumerate_feasible(net, src, dst, amount)
            got = kernel_route(pathfind_py, net, src, dst, amount)
            assert got == expect, (net.dump_edges(), src, dst, amount)
            checked += 1
        assert checked == 300

    def test_unique_path_line(self):
        net = build_network(3, [(0, 1, 1000, 900), (1, 2, 1000, 900)])
        assert kernel_route(pathfind_py, net, 0, 2, 100) == [0, 1, 2]

    def test_depleted_branch_avoided(self):
        # two 2-hop routes; the lex-smaller middle lacks balance
        net = build_network(4, [(0, 1, 1000, 10), (1, 3, 1000, 500),
                                (0, 2, 1000, 500), (2, 3, 1000, 500)])
        assert kernel_route(pathfind_py, net, 0, 3, 100) == [0, 2, 3]

    def test_lexicographic_tie_break(self):
        net = build_network(4, [(0, 1, 1000, 500), (1, 3, 1000, 500),
                                (0, 2, 1000, 500), (2, 3, 1000, 500)])
        assert kernel_route(pathfind_py, net, 0, 3, 100) == [0, 1, 3]

    def test_src_equals_dst(self):
        net = build_network(2, [(0, 1, 100)])
        assert kernel_route(pathfind_py, net, 0, 0, 10) == [0]

    def test_unreachable_returns_none(self):
        net = build_network(4, [(0, 1, 1000, 500), (2, 3, 1000, 500)])
        assert kernel_route(pathfind_py, net, 0, 3, 10) is None

    def test_closed_channel_excluded(self):
        net = build_network(3, [(0, 1, 1000, 900), (1, 2, 1000, 900)])
        net.close_channel(1)
        assert kernel_route(pathfind_py, net, 0, 2, 100) is None

    def test_longer_feasible_beats_infeasible_short(self):
        # direct channel too thin; 2-hop works
        net = build_network(3, [(0, 2, 1000, 10), (0, 1, 1000, 500),
                                (1, 2, 1000, 500)])
        assert kernel_route(pathfind_py, net, 0, 2, 100) == [0, 1, 2]


class TestBfsDist:
    def test_line_distances(self):
        net = build_network(4, [(0, 1, 10), (1, 2, 10), (2, 3, 10)])
        dist = pathfind_py.bfs_dist(4, net.csr_indptr, net.csr_nbr, net.csr_chan,
                                    net.open_flags, 3)
        assert list(dist) == [3, 2, 1, 0]

    def test_unreachable_is_inf(self):
        net = build_network(3, [(0, 1, 10)])
        dist = pathfind_py.bfs_dist(3, net.csr_indptr, net.csr_nbr, net.csr_chan,
                                    net.open_flags, 2)
        assert dist[0] >= INF_DIST and dist[1] >= INF_DIST and dist[2] == 0


@pytest.mark.skipif(compiled is None, reason="compiled kernel not built")
class TestBackendParity:
    def test_identical_routes_on_random_instances(self):
        rng = random.Random(7)
        for _ in range(300):
            net = random_small_net(rng)
            src, dst = rng.sample(range(net.n), 2)
            amount = rng.randint(1, 2000)
            assert (kernel_route(pathfind_py, net, src, dst, amount)
                    == kernel_route(compiled, net, src, dst, amount))

    def test_identical_distances(self):
        rng = random.Random(8)
        for _ in range(100):
            net = random_small_net(rng)
            dst = rng.randrange(net.n)
            a = pathfind_py.bfs_dist(net.n, net.csr_indptr, net.csr_nbr,
                                     net.csr_chan, net.open_flags, dst)
            b = compiled.bfs_dist(net.n, net.csr_indptr, net.csr_nbr,
                                  net.csr_chan, net.open_flags, dst)
            assert list(a) == list(b)

    def test_expansion_budget_identical(self):
        net = build_network(5, [(0, 1, 10, 10), (1, 2, 10, 10), (2, 4, 10, 10),
                                (0, 3, 10, 10), (3, 4, 10, 10)])
        for cap in range(0, 8):
            args = (net.n, net.csr_indptr, net.csr_nbr, net.csr_chan, net.csr_dir,
                    net.csr_base, net.csr_ppm, net.balances, net.open_flags,
                    0, 4, 5, pathfind_py.bfs_dist(net.n, net.csr_indptr, net.csr_nbr,
                                                  net.csr_chan, net.open_flags, 4),
                    6, cap)
            assert pathfind_py.feasible_route(*args) == compiled.feasible_route(*args)

    def test_full_runs_identical_across_backends(self):
        """Whole-cell records must not depend on the selected backend."""
        script = (
            "import hashlib\n"
            "from pcnsim.scenarios import ScenarioConfig\n"
            "from pcnsim.run import run_cell\n"
            "cfgs = [ScenarioConfig(scenario=s, size='sm', protocol=p, seed=1,"
            " payments=80) for s in ('basic', 'faulty') for p in ('basic', 'terp')]\n"
            "for c in cfgs:\n"
            "    row = ','.join(run_cell(c).row())\n"
            "    print(hashlib.sha256(row.encode()).hexdigest())\n"
        )

        def run(pure):
            env = dict(os.environ)
            if pure:
                env["PCNSIM_PURE"] = "1"
            else:
                env.pop("PCNSIM_PURE", None)
            out = subprocess.run([sys.executable, "-c", script], env=env,
                                 capture_output=True, text=True, check=True)
            return out.stdout

        assert run(pure=False) == run(pure=True)
