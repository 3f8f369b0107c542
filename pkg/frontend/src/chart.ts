/**
 * Figure layout: a 3x3 grid of metric panels for one scenario, grouped bars
 * by protocol within size, min-max whiskers for multi-seed cells, and a
 * shared legend. Missing cells leave a gap instead of a zero bar.
 */
import { Canvas, compactNumber } from './canvas';
import { Bar, PANELS, ScenarioTable } from './data';

export const PROTOCOL_COLORS: Record<string, string> = {
  basic: '#4c72b0',
  etora: '#dd8452',
  terp: '#55a868',
  mdart: '#c44e52',
};
const FALLBACK_COLOR = '#8c8c8c';
const AXIS = '#333333';
const GRID = '#dddddd';

const PANEL_W = 320;
const PANEL_H = 230;
const COLS = 3;
const MARGIN = { left: 56, right: 12, top: 28, bottom: 34 };
const FIGURE_PAD = 16;
const HEADER_H = 52;

export function figureSize(): { width: number; height: number } {
  const rows = Math.ceil(PANELS.length / COLS);
  return {
    width: FIGURE_PAD * 2 + COLS * PANEL_W,
    height: HEADER_H + rows * PANEL_H + FIGURE_PAD,
  };
}

export function drawFigure(
  canvas: Canvas,
  scenario: string,
  table: ScenarioTable,
  sizes: string[],
  protocols: string[],
): void {
  canvas.text(FIGURE_PAD, 22, `scenario: ${scenario}`, 15, 'start', AXIS);
  drawLegend(canvas, protocols);
  PANELS.forEach((panel, i) => {
    const col = i % COLS;
    const row = Math.floor(i / COLS);
    const x0 = FIGURE_PAD + col * PANEL_W;
    const y0 = HEADER_H + row * PANEL_H;
    drawPanel(canvas, x0, y0, panel.title, table.get(panel.column)!, sizes, protocols);
  });
}

function drawLegend(canvas: Canvas, protocols: string[]): void {
  let x = FIGURE_PAD + 200;
  for (const proto of protocols) {
    canvas.rect(x, 12, 12, 12, colorOf(proto));
    canvas.text(x + 16, 22, proto, 11, 'start', AXIS);
    x += 16 + proto.length * 7 + 18;
  }
}

function colorOf(protocol: string): string {
  return PROTOCOL_COLORS[protocol] ?? FALLBACK_COLOR;
}

function drawPanel(
  canvas: Canvas,
  x0: number,
  y0: number,
  title: string,
  bySize: Map<string, Map<string, Bar>>,
  sizes: string[],
  protocols: string[],
): void {
  const plotX = x0 + MARGIN.left;
  const plotY = y0 + MARGIN.top;
  const plotW = PANEL_W - MARGIN.left - MARGIN.right;
  const plotH = PANEL_H - MARGIN.top - MARGIN.bottom;

  canvas.text(x0 + PANEL_W / 2, y0 + 16, title, 12, 'middle', AXIS);

  let maxVal = 0;
  for (const byProto of bySize.values()) {
    for (const bar of byProto.values()) {
      maxVal = Math.max(maxVal, bar.max);
    }
  }
  if (maxVal <= 0) {
    maxVal = 1;
  }
  const scale = plotH / (maxVal * 1.08);

  // y grid and tick labels
  const ticks = 4;
  for (let t = 0; t <= ticks; t++) {
    const value = (maxVal * 1.08 * t) / ticks;
    const y = plotY + plotH - value * scale;
    if (t > 0) {
      canvas.line(plotX, y, plotX + plotW, y, GRID, 0.5);
    }
    canvas.text(plotX - 4, y + 3, compactNumber(value), 8, 'end', AXIS);
  }

  // axes
  canvas.line(plotX, plotY, plotX, plotY + plotH, AXIS, 1);
  canvas.line(plotX, plotY + plotH, plotX + plotW, plotY + plotH, AXIS, 1);

  const groupW = plotW / Math.max(1, sizes.length);
  const barW = (groupW * 0.8) / Math.max(1, protocols.length);
  sizes.forEach((size, si) => {
    const gx = plotX + si * groupW;
    canvas.text(gx + groupW / 2, plotY + plotH + 14, size, 10, 'middle', AXIS);
    const byProto = bySize.get(size);
    protocols.forEach((proto, pi) => {
      const bar = byProto?.get(proto);
      if (!bar) {
        return; // absent cell: gap, not a zero bar
      }
      const bx = gx + groupW * 0.1 + pi * barW;
      const h = bar.mean * scale;
      canvas.rect(bx, plotY + plotH - h, barW * 0.9, h, colorOf(proto));
      if (bar.seeds > 1 && bar.max > bar.min) {
        const cx = bx + (barW * 0.9) / 2;
        const yMin = plotY + plotH - bar.min * scale;
        const yMax = plotY + plotH - bar.max * scale;
        canvas.line(cx, yMin, cx, yMax, AXIS, 1);
        canvas.line(cx - 2.5, yMin, cx + 2.5, yMin, AXIS, 1);
        canvas.line(cx - 2.5, yMax, cx + 2.5, yMax, AXIS, 1);
      }
    });
  });
}
