/**
 * Strict reader for the simulator's results.csv.
 *
 * Empty metric fields (zero-payment runs) parse as null and are later
 * rendered as absent bars, never as zeros.
 */
import * as fs from 'fs';

export const REQUIRED_COLUMNS = [
  'scenario', 'size', 'protocol', 'seed',
  'memory_bytes_mean', 'memory_entries_mean',
  'success_ratio', 'avg_hop_count', 'avg_fee', 'avg_channel_count',
  'node_pkt_count', 'node_pkt_bytes', 'router_pkt_count', 'router_pkt_bytes',
  'node_pkt_bytes_mean', 'router_pkt_bytes_mean',
] as const;

export interface ResultRow {
  scenario: string;
  size: string;
  protocol: string;
  seed: number;
  metrics: Record<string, number | null>;
}

export class CsvError extends Error {}

export function parseResultsCsv(text: string): ResultRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new CsvError('results CSV is empty');
  }
  const header = lines[0].split(',');
  for (const col of REQUIRED_COLUMNS) {
    if (!header.includes(col)) {
      throw new CsvError(`missing required column: ${col}`);
    }
  }
  const idx = new Map(header.map((name, i) => [name, i]));
  if (lines.length === 1) {
    throw new CsvError('results CSV has a header but no rows');
  }
  const rows: ResultRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(',');
    if (cells.length !== header.length) {
      throw new CsvError(`row ${i + 1}: expected ${header.length} cells, got ${cells.length}`);
    }
    const get = (name: string) => cells[idx.get(name)!];
    const metrics: Record<string, number | null> = {};
    for (const col of REQUIRED_COLUMNS.slice(4)) {
      const raw = get(col);
      if (raw === '') {
        metrics[col] = null;
      } else {
        const v = Number(raw);
        if (!Number.isFinite(v)) {
          throw new CsvError(`row ${i + 1}: ${col} is not numeric: ${raw}`);
        }
        metrics[col] = v;
      }
    }
    rows.push({
      scenario: get('scenario'),
      size: get('size'),
      protocol: get('protocol'),
      seed: Number(get('seed')),
      metrics,
    });
  }
  return rows;
}

export function readResultsCsv(path: string): ResultRow[] {
  let text: string;
  try {
    text = fs.readFileSync(path, 'utf-8');
  } catch (err) {
    throw new CsvError(`cannot read ${path}: ${(err as Error).message}`);
  }
  return parseResultsCsv(text);
}
