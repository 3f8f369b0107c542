/**
 * Grouping and aggregation: one figure per scenario, one panel per metric,
 * bars grouped by protocol within size. Multi-seed cells aggregate to the
 * mean with min-max whiskers.
 */
import { ResultRow } from './csv';

export const SIZE_ORDER = ['sm', 'md', 'lg'] as const;
export const PROTOCOL_ORDER = ['basic', 'etora', 'terp', 'mdart'] as const;

/** The nine panels, in the evaluation's metric order. */
export const PANELS: { column: string; title: string }[] = [
  { column: 'memory_bytes_mean', title: 'memory per node [B]' },
  { column: 'success_ratio', title: 'success ratio' },
  { column: 'avg_hop_count', title: 'average hop count' },
  { column: 'avg_fee', title: 'average fee' },
  { column: 'avg_channel_count', title: 'average channel count' },
  { column: 'node_pkt_count', title: 'node packet count' },
  { column: 'node_pkt_bytes', title: 'node packet bytes' },
  { column: 'router_pkt_count', title: 'router packet count' },
  { column: 'router_pkt_bytes', title: 'router packet bytes' },
];

export interface Bar {
  mean: number;
  min: number;
  max: number;
  seeds: number;
}

/** panel column -> size -> protocol -> Bar (missing cells stay absent) */
export type ScenarioTable = Map<string, Map<string, Map<string, Bar>>>;

export function scenariosIn(rows: ResultRow[]): string[] {
  const seen: string[] = [];
  for (const row of rows) {
    if (!seen.includes(row.scenario)) {
      seen.push(row.scenario);
    }
  }
  return seen;
}

export function sizesIn(rows: ResultRow[]): string[] {
  const present = new Set(rows.map((r) => r.size));
  const ordered = SIZE_ORDER.filter((s) => present.has(s));
  for (const s of present) {
    if (!ordered.includes(s as never)) {
      ordered.push(s as never);
    }
  }
  return ordered as string[];
}

export function protocolsIn(rows: ResultRow[]): string[] {
  const present = new Set(rows.map((r) => r.protocol));
  const ordered = PROTOCOL_ORDER.filter((p) => present.has(p));
  for (const p of present) {
    if (!ordered.includes(p as never)) {
      ordered.push(p as never);
    }
  }
  return ordered as string[];
}

export function aggregateScenario(rows: ResultRow[], scenario: string): ScenarioTable {
  const table: ScenarioTable = new Map();
  for (const panel of PANELS) {
    const bySize = new Map<string, Map<string, Bar>>();
    for (const row of rows) {
      if (row.scenario !== scenario) continue;
      const value = row.metrics[panel.column];
      if (value === null || value === undefined) continue; // absent, not zero
      let byProto = bySize.get(row.size);
      if (!byProto) {
        byProto = new Map();
        bySize.set(row.size, byProto);
      }
      const bar = byProto.get(row.protocol);
      if (!bar) {
        byProto.set(row.protocol, { mean: value, min: value, max: value, seeds: 1 });
      } else {
        bar.mean = (bar.mean * bar.seeds + value) / (bar.seeds + 1);
        bar.min = Math.min(bar.min, value);
        bar.max = Math.max(bar.max, value);
        bar.seeds += 1;
      }
    }
    table.set(panel.column, bySize);
  }
  return table;
}
