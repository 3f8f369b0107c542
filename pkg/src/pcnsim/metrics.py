"""The nine evaluation metrics per run and the results table writer.

Averages cover succeeded payments only; a run with zero attempted payments
emits empty fields rather than zeros. Channel count is averaged over ten
evenly spaced samples of the run window, reconstructed from the channel-close
log. Packet size metrics are emitted both as totals and per-node means since
either reading is defensible.
"""
from __future__ import annotations

import csv
import io
from bisect import bisect_right
from dataclasses import dataclass

from .engine import Engine, PaymentStatus

CSV_COLUMNS = (
    "scenario", "size", "protocol", "seed",
    "memory_bytes_mean", "memory_entries_mean",
    "success_ratio", "avg_hop_count", "avg_fee", "avg_channel_count",
    "node_pkt_count", "node_pkt_bytes", "router_pkt_count", "router_pkt_bytes",
    "node_pkt_bytes_mean", "router_pkt_bytes_mean",
)


@dataclass(frozen=True)
class MetricsRecord:
    scenario: str
    size: str
    protocol: str
    seed: int
    memory_bytes_mean: float
    memory_entries_mean: float
    success_ratio: float | None
    avg_hop_count: float | None
    avg_fee: float | None
    avg_channel_count: float
    node_pkt_count: int
    node_pkt_bytes: int
    router_pkt_count: int
    router_pkt_bytes: int
    node_pkt_bytes_mean: float
    router_pkt_bytes_mean: float

    def row(self) -> list[str]:
        return [_fmt(getattr(self, c)) for c in CSV_COLUMNS]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def average_channel_count_samples(engine: Engine, samples: int = 10) -> float:
    """Mean per-node open-channel count over evenly spaced sample times."""
    net = engine.net
    total_channels = len(net.channels)
    closes = sorted(t for t, _ in engine.close_log)
    end = engine.end_time
    acc = 0.0
    for i in range(1, samples + 1):
        t = end * i // samples
        closed = bisect_right(closes, t)
        acc += 2.0 * (total_channels - closed) / net.n
    return acc / samples


def finalize(engine: Engine, scenario: str, size: str, protocol: str, seed: int) -> MetricsRecord:
    """Compute the nine metrics from a completed run."""
    n = engine.net.n
    attempted = engine.total_payments
    succeeded = [p for p in engine.payments if p.status is PaymentStatus.SUCCEEDED]
    if attempted > 0:
        success_ratio = len(succeeded) / attempted
    else:
        success_ratio = None
    if succeeded:
        avg_hop = sum(p.hops for p in succeeded) / len(succeeded)
        avg_fee = sum(p.fee_paid for p in succeeded) / len(succeeded)
    else:
        avg_hop = None
        avg_fee = None

    entries_total = 0
    bytes_total = 0
    for u in range(n):
        e, b = engine.protocol.memory_footprint(u)
        entries_total += e
        bytes_total += b

    return MetricsRecord(
        scenario=scenario,
        size=size,
        protocol=protocol,
        seed=seed,
        memory_bytes_mean=bytes_total / n,
        memory_entries_mean=entries_total / n,
        success_ratio=success_ratio,
        avg_hop_count=avg_hop,
        avg_fee=avg_fee,
        avg_channel_count=average_channel_count_samples(engine),
        node_pkt_count=engine.node_pkt_count,
        node_pkt_bytes=engine.node_pkt_bytes,
        router_pkt_count=engine.router_pkt_count,
        router_pkt_bytes=engine.router_pkt_bytes,
        node_pkt_bytes_mean=engine.node_pkt_bytes / n,
        router_pkt_bytes_mean=engine.router_pkt_bytes / n,
    )


def render_csv(records: list[MetricsRecord]) -> str:
    if not records:
        raise ValueError("no records to write")
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(r.row())
    return out.getvalue()


def write_csv(records: list[MetricsRecord], path) -> None:
    text = render_csv(records)
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as exc:
        raise IOError(f"cannot write results to {path}: {exc}") from exc
