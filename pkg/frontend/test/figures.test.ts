import assert from 'node:assert/strict';
import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';
import { test } from 'node:test';

import { CsvError, parseResultsCsv, readResultsCsv } from '../src/csv';
import { PANELS, aggregateScenario, protocolsIn, scenariosIn, sizesIn } from '../src/data';
import { render, renderScenario } from '../src/figures';
import { PROTOCOL_COLORS } from '../src/chart';

const FIXTURES = path.join(__dirname, '..', '..', 'test', 'fixtures');
const FULL = path.join(FIXTURES, 'full_matrix.csv');
const SMALL = path.join(FIXTURES, 'small.csv');
const GOLDEN = path.join(FIXTURES, 'golden_basic.svg');

function tmpDir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), 'figures-'));
}

function countOccurrences(text: string, needle: string): number {
  return text.split(needle).length - 1;
}

test('full matrix renders exactly six files with nine panels each', () => {
  const out = tmpDir();
  const files = render(FULL, out, 'svg');
  assert.equal(files.length, 6);
  const expected = ['basic', 'faulty', 'malicious', 'low_participation', 'hub', 'commercial'];
  assert.deepEqual(
    files.map((f) => path.basename(f)),
    expected.map((s) => `figure_${s}.svg`),
  );
  for (const file of files) {
    const svg = fs.readFileSync(file, 'utf-8');
    for (const panel of PANELS) {
      assert.ok(svg.includes(`>${panel.title}</text>`), `${file} missing panel ${panel.title}`);
    }
    // every size group label appears once per panel
    for (const size of ['sm', 'md', 'lg']) {
      assert.equal(countOccurrences(svg, `>${size}</text>`), 9, `${file} ${size} labels`);
    }
  }
});

test('bar groups match the protocols and sizes present in the CSV', () => {
  const rows = readResultsCsv(FULL);
  assert.deepEqual(protocolsIn(rows), ['basic', 'etora', 'terp', 'mdart']);
  assert.deepEqual(sizesIn(rows), ['sm', 'md', 'lg']);
  const svg = renderScenario(rows, 'basic', 'svg').toString('utf-8');
  // 9 panels x 3 sizes x 4 protocols bars plus 1 background and 4 legend swatches
  const rects = countOccurrences(svg, '<rect ');
  assert.equal(rects, 1 + 4 + 9 * 3 * 4);
  for (const color of Object.values(PROTOCOL_COLORS)) {
    assert.ok(svg.includes(color));
  }
});

test('csv restricted to one scenario yields one file', () => {
  const rows = fs
    .readFileSync(FULL, 'utf-8')
    .split('\n')
    .filter((line, i) => i === 0 || line.startsWith('hub,'));
  const out = tmpDir();
  const input = path.join(out, 'hub_only.csv');
  fs.writeFileSync(input, rows.join('\n') + '\n');
  const files = render(input, out, 'svg');
  assert.deepEqual(files.map((f) => path.basename(f)), ['figure_hub.svg']);
});

test('multi-seed cells aggregate to the mean with min-max whiskers', () => {
  const rows = readResultsCsv(SMALL);
  const table = aggregateScenario(rows, 'basic');
  const bar = table.get('success_ratio')!.get('sm')!.get('basic')!;
  assert.equal(bar.seeds, 2);
  assert.ok(Math.abs(bar.mean - 0.95) < 1e-12);
  assert.equal(bar.min, 0.9);
  assert.equal(bar.max, 1.0);
});

test('empty metric fields render as absent bars, never zeros', () => {
  const rows = readResultsCsv(SMALL);
  const table = aggregateScenario(rows, 'hub');
  // hub row has empty success/hops/fee fields: those cells stay absent
  assert.equal(table.get('success_ratio')!.get('sm')?.get('basic'), undefined);
  assert.equal(table.get('avg_hop_count')!.get('sm')?.get('basic'), undefined);
  assert.equal(table.get('avg_fee')!.get('sm')?.get('basic'), undefined);
  assert.ok(table.get('avg_channel_count')!.get('sm')!.has('basic'));
  const svg = renderScenario(rows, 'hub', 'svg').toString('utf-8');
  // background + 4 legend swatches + bars for the six populated metrics
  // (memory, channel count, and the four zero-valued packet counters; a zero
  // value is real data and draws a zero-height bar, unlike an empty field)
  const rects = countOccurrences(svg, '<rect ');
  assert.equal(rects, 1 + 4 + 6);
});

test('golden image comparison on the fixed small csv', () => {
  const rows = readResultsCsv(SMALL);
  const got = renderScenario(rows, 'basic', 'svg');
  if (!fs.existsSync(GOLDEN)) {
    fs.writeFileSync(GOLDEN, got); // first run freezes the golden
  }
  const golden = fs.readFileSync(GOLDEN);
  assert.ok(got.equals(golden), 'render deviates from the golden image');
});

test('rendering is deterministic byte for byte', () => {
  const rows = readResultsCsv(FULL);
  const a = renderScenario(rows, 'malicious', 'svg');
  const b = renderScenario(rows, 'malicious', 'svg');
  assert.ok(a.equals(b));
  const p1 = renderScenario(rows, 'malicious', 'pdf');
  const p2 = renderScenario(rows, 'malicious', 'pdf');
  assert.ok(p1.equals(p2));
});

test('pdf output is structurally valid', () => {
  const rows = readResultsCsv(SMALL);
  const pdf = renderScenario(rows, 'basic', 'pdf').toString('latin1');
  assert.ok(pdf.startsWith('%PDF-1.4'));
  assert.ok(pdf.includes('/Type /Page'));
  assert.ok(pdf.includes('/BaseFont /Helvetica'));
  assert.ok(pdf.trimEnd().endsWith('%%EOF'));
  const declared = /\/Length (\d+)/.exec(pdf);
  assert.ok(declared);
  const stream = pdf.slice(pdf.indexOf('stream\n') + 7, pdf.indexOf('\nendstream'));
  assert.equal(Buffer.byteLength(stream, 'latin1'), Number(declared![1]));
});

test('pdf render writes six files for the full matrix', () => {
  const out = tmpDir();
  const files = render(FULL, out, 'pdf');
  assert.equal(files.length, 6);
  for (const file of files) {
    assert.ok(fs.readFileSync(file, 'latin1').startsWith('%PDF-1.4'));
  }
});

test('missing required column is named in the error', () => {
  const text = 'scenario,size,protocol,seed\nbasic,sm,basic,1\n';
  assert.throws(() => parseResultsCsv(text), (err: Error) => {
    assert.ok(err instanceof CsvError);
    assert.match(err.message, /memory_bytes_mean/);
    return true;
  });
});

test('empty csv is an error', () => {
  assert.throws(() => parseResultsCsv(''), CsvError);
  const headerOnly = fs.readFileSync(FULL, 'utf-8').split('\n')[0] + '\n';
  assert.throws(() => parseResultsCsv(headerOnly), CsvError);
});
