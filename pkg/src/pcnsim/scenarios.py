"""Experiment construction: the six scenario kinds at the three network sizes,
with behavior assignment and the payment workload.

Topology, behaviors, and workload derive from (scenario, size, seed) only, so
every protocol in a cell sees the same network and the same payment stream.
All workload parameters are defaults exposed here and echoed into each run's
config sidecar.
"""
from __future__ import annotations

import enum
import math
import random
from dataclasses import asdict, dataclass, field, replace

from .core import Behavior, Network, TopologyKind, generate_topology


class ScenarioKind(enum.Enum):
    BASIC = "basic"
    FAULTY = "faulty"
    MALICIOUS = "malicious"
    LOW_PARTICIPATION = "low_participation"
    HUB = "hub"
    COMMERCIAL = "commercial"


SCENARIO_ORDER = tuple(ScenarioKind)

SIZES = {"sm": 30, "md": 200, "lg": 1000}
SIZE_ORDER = ("sm", "md", "lg")

PROTOCOL_ORDER = ("basic", "etora", "terp", "mdart")

DEFAULT_PAYMENTS = {"sm": 10_000, "md": 10_000, "lg": 20_000}


@dataclass(frozen=True)
class ScenarioConfig:
    """Full parameterization of one experiment cell."""

    scenario: str = "basic"
    size: str = "sm"
    protocol: str = "basic"
    seed: int = 1
    payments: int | None = None          # None -> size default
    rate: float = 50.0                   # payment arrivals per second
    faulty_fraction: float = 0.10
    malicious_fraction: float = 0.10
    nonparticipating_fraction: float = 0.50
    merchant_fraction: float = 0.05
    merchant_share: float = 0.80
    mean_degree: int = 4
    hubs: int = 2
    attach: int = 2
    capacity_range: tuple[int, int] = (10_000, 1_000_000)
    fee_base_max: int = 5
    fee_rate_max_ppm: int = 1_000
    amount_range: tuple[int, int] = (10, 10_000)
    latency_ms: tuple[int, int] = (10, 100)
    bootstrap_ms: int = 10_000
    payment_timeout_ms: int = 60_000
    hop_cap: int = 20
    expand_cap: int = 1_000_000
    protocol_params: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return SIZES[self.size]

    @property
    def kind(self) -> ScenarioKind:
        return ScenarioKind(self.scenario)

    @property
    def payment_count(self) -> int:
        return DEFAULT_PAYMENTS[self.size] if self.payments is None else self.payments

    def validate(self) -> "ScenarioConfig":
        if self.scenario not in {k.value for k in ScenarioKind}:
            raise ValueError(f"unknown scenario {self.scenario!r}; valid: "
                             + "|".join(k.value for k in ScenarioKind))
        if self.size not in SIZES:
            raise ValueError(f"unknown size {self.size!r}; valid: sm|md|lg")
        if self.protocol not in PROTOCOL_ORDER:
            raise ValueError(f"unknown protocol {self.protocol!r}; valid: "
                             + "|".join(PROTOCOL_ORDER))
        for name in ("faulty_fraction", "malicious_fraction",
                     "nonparticipating_fraction", "merchant_fraction",
                     "merchant_share"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.payment_count < 0:
            raise ValueError("payments must be >= 0")
        return self

    def cell_id(self) -> str:
        return f"{self.scenario}|{self.size}|{self.protocol}|{self.seed}"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class BuiltScenario:
    net: Network
    workload: list[tuple[int, int, int, int]]  # (time ms, src, dst, amount)
    fail_schedule: list[tuple[int, int]]       # (time ms, node)
    workload_end: int


def _assign_behaviors(cfg: ScenarioConfig, net: Network, rng: random.Random) -> list[int]:
    """Mark adversarial nodes per the scenario; returns the honest node ids."""
    kind = cfg.kind
    n = net.n
    special: list[int] = []
    behavior = None
    if kind is ScenarioKind.FAULTY:
        behavior = Behavior.FAULTY
        special = sorted(rng.sample(range(n), round(cfg.faulty_fraction * n)))
    elif kind is ScenarioKind.MALICIOUS:
        behavior = Behavior.MALICIOUS
        special = sorted(rng.sample(range(n), round(cfg.malicious_fraction * n)))
    elif kind is ScenarioKind.LOW_PARTICIPATION:
        behavior = Behavior.NON_PARTICIPATING
        special = sorted(rng.sample(range(n), round(cfg.nonparticipating_fraction * n)))
    for u in special:
        net.nodes[u].behavior = behavior
    honest = [u for u in range(n) if net.nodes[u].behavior is Behavior.HONEST]
    if len(honest) < 2:
        raise ValueError("configuration leaves fewer than 2 honest nodes")
    if kind is ScenarioKind.COMMERCIAL:
        merchants = sorted(rng.sample(honest, max(1, round(cfg.merchant_fraction * n))))
        for u in merchants:
            net.nodes[u].is_merchant = True
    return honest


def build_scenario(cfg: ScenarioConfig) -> BuiltScenario:
    cfg.validate()
    kind = cfg.kind
    n = cfg.n

    topo_kind = TopologyKind.HUB if kind is ScenarioKind.HUB else TopologyKind.RANDOM
    topo_params = (
        {"hubs": cfg.hubs, "attach": cfg.attach}
        if topo_kind is TopologyKind.HUB
        else {"mean_degree": cfg.mean_degree}
    )
    topo_params.update(
        capacity_range=cfg.capacity_range,
        fee_base_max=cfg.fee_base_max,
        fee_rate_max_ppm=cfg.fee_rate_max_ppm,
    )
    net = generate_topology(topo_kind, n, topo_params,
                            seed=f"{cfg.scenario}|{cfg.size}|{cfg.seed}")

    rng_b = random.Random(f"behaviors|{cfg.scenario}|{cfg.size}|{cfg.seed}")
    honest = _assign_behaviors(cfg, net, rng_b)
    merchants = [u for u in honest if net.nodes[u].is_merchant]

    rng_w = random.Random(f"workload|{cfg.scenario}|{cfg.size}|{cfg.seed}")
    lo_amt, hi_amt = cfg.amount_range
    log_lo, log_hi = math.log(lo_amt), math.log(hi_amt)
    workload = []
    t = cfg.bootstrap_ms
    for _ in range(cfg.payment_count):
        t += max(1, round(rng_w.expovariate(cfg.rate) * 1000))
        src = honest[rng_w.randrange(len(honest))]
        pool = honest
        if kind is ScenarioKind.COMMERCIAL and merchants and rng_w.random() < cfg.merchant_share:
            if merchants != [src]:
                pool = merchants
        dst = pool[rng_w.randrange(len(pool))]
        while dst == src:
            dst = pool[rng_w.randrange(len(pool))]
        amount = max(lo_amt, min(hi_amt, int(round(math.exp(rng_w.uniform(log_lo, log_hi))))))
        workload.append((t, src, dst, amount))
    workload_end = workload[-1][0] if workload else cfg.bootstrap_ms

    fail_schedule = []
    if kind is ScenarioKind.FAULTY:
        for u in range(n):
            node = net.nodes[u]
            if node.behavior is Behavior.FAULTY:
                node.fail_time = rng_b.randint(cfg.bootstrap_ms, max(cfg.bootstrap_ms, workload_end))
                fail_schedule.append((node.fail_time, u))
        fail_schedule.sort()
    return BuiltScenario(net, workload, fail_schedule, workload_end)


def cell_matrix(base: ScenarioConfig | None = None, seeds=(1,),
                scenarios=None, sizes=None, protocols=None) -> list[ScenarioConfig]:
    """The deterministic cross product of scenarios x sizes x protocols x seeds."""
    base = base or ScenarioConfig()
    scenarios = scenarios or [k.value for k in SCENARIO_ORDER]
    sizes = sizes or SIZE_ORDER
    protocols = protocols or PROTOCOL_ORDER
    cells = []
    for scenario in scenarios:
        for size in sizes:
            for protocol in protocols:
                for seed in seeds:
                    cells.append(replace(base, scenario=scenario, size=size,
                                         protocol=protocol, seed=seed))
    for cfg in cells:
        cfg.validate()
    return cells
