"""Single-cell runner: build the scenario, wire protocol and engine, execute
the workload, and finalize the metrics record. A run is a pure function of its
ScenarioConfig; two executions yield identical records byte for byte.
"""
from __future__ import annotations

import random

from .engine import Engine, Payment
from .metrics import MetricsRecord, finalize
from .protocols import make_protocol
from .scenarios import BuiltScenario, ScenarioConfig, build_scenario


def prepare(cfg: ScenarioConfig, trace=None) -> tuple[Engine, BuiltScenario]:
    """Build network, engine, and protocol for a cell without running it."""
    built = build_scenario(cfg)
    seed_str = f"{cfg.scenario}|{cfg.size}|{cfg.seed}|{cfg.protocol}"
    engine = Engine(built.net, seed_str, latency_ms=cfg.latency_ms,
                    payment_timeout_ms=cfg.payment_timeout_ms, trace=trace)
    params = dict(cfg.protocol_params.get(cfg.protocol, {}))
    params.setdefault("hop_cap", cfg.hop_cap)
    params.setdefault("expand_cap", cfg.expand_cap)
    if cfg.protocol == "mdart":
        # register against converged tables, shortly before the workload starts
        params.setdefault("register_delay_ms", max(1_000, cfg.bootstrap_ms - 2_000))
    proto_rng = random.Random(f"proto|{seed_str}")
    engine.protocol = make_protocol(cfg.protocol, built.net, engine, params, proto_rng)
    return engine, built


def run_cell(cfg: ScenarioConfig, trace=None) -> MetricsRecord:
    engine, built = prepare(cfg, trace=trace)
    execute(engine, built, cfg)
    return finalize(engine, cfg.scenario, cfg.size, cfg.protocol, cfg.seed)


def execute(engine: Engine, built: BuiltScenario, cfg: ScenarioConfig) -> None:
    engine.protocol.on_bootstrap()
    for t, node in built.fail_schedule:
        engine.schedule_at(t, engine.fail_node, node)
    engine.total_payments = len(built.workload)
    for pid, (t, src, dst, amount) in enumerate(built.workload):
        engine.schedule_at(t, _arrival, (engine, Payment(pid, src, dst, amount, t)))
    if built.workload:
        engine.run_loop()
    else:
        engine.run_loop(stop_at=cfg.bootstrap_ms + 1_000)


def _arrival(arg):
    engine, payment = arg
    engine.submit_payment(payment)
