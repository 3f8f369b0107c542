/**
 * Drawing primitives shared by the SVG and PDF backends. Coordinates are
 * top-left origin; backends flip as needed. All numbers are emitted with
 * fixed precision so identical input yields identical bytes.
 */

export type Anchor = 'start' | 'middle' | 'end';

export interface Canvas {
  readonly width: number;
  readonly height: number;
  rect(x: number, y: number, w: number, h: number, fill: string): void;
  line(x1: number, y1: number, x2: number, y2: number, stroke: string, strokeWidth: number): void;
  text(x: number, y: number, content: string, size: number, anchor: Anchor, fill: string): void;
  serialize(): Buffer;
}

export function fixed(v: number): string {
  // two decimals, normalized so -0.00 cannot appear
  const s = v.toFixed(2);
  return s === '-0.00' ? '0.00' : s;
}

export function compactNumber(v: number): string {
  const abs = Math.abs(v);
  if (abs >= 1e9) return trimZeros((v / 1e9).toFixed(1)) + 'G';
  if (abs >= 1e6) return trimZeros((v / 1e6).toFixed(1)) + 'M';
  if (abs >= 1e3) return trimZeros((v / 1e3).toFixed(1)) + 'k';
  if (abs >= 10 || v === Math.trunc(v)) return trimZeros(v.toFixed(1));
  return trimZeros(v.toFixed(2));
}

function trimZeros(s: string): string {
  return s.includes('.') ? s.replace(/\.?0+$/, '') : s;
}
