/**
 * Figure orchestration: one file per scenario found in the CSV, nine metric
 * panels each; deterministic output for identical input.
 */
import * as fs from 'fs';
import * as path from 'path';

import { Canvas } from './canvas';
import { drawFigure, figureSize } from './chart';
import { ResultRow, readResultsCsv } from './csv';
import { aggregateScenario, protocolsIn, scenariosIn, sizesIn } from './data';
import { PdfCanvas } from './pdf';
import { SvgCanvas } from './svg';

export type Format = 'svg' | 'pdf';

export function renderScenario(rows: ResultRow[], scenario: string, format: Format): Buffer {
  const { width, height } = figureSize();
  const canvas: Canvas =
    format === 'svg' ? new SvgCanvas(width, height) : new PdfCanvas(width, height);
  const table = aggregateScenario(rows, scenario);
  drawFigure(canvas, scenario, table, sizesIn(rows), protocolsIn(rows));
  return canvas.serialize();
}

export function render(resultsCsv: string, outDir: string, format: Format): string[] {
  const rows = readResultsCsv(resultsCsv);
  fs.mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  for (const scenario of scenariosIn(rows)) {
    const file = path.join(outDir, `figure_${scenario}.${format}`);
    fs.writeFileSync(file, renderScenario(rows, scenario, format));
    written.push(file);
  }
  return written;
}
