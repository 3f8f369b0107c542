/**
 * Minimal single-page vector PDF writer: filled rectangles, lines, and
 * Helvetica text are all the charts need. Output is deterministic.
 */
import { Anchor, Canvas, fixed } from './canvas';

// average Helvetica advance width per point of font size, good enough to
// place middle/end anchored labels
const AVG_CHAR_WIDTH = 0.5;

export class PdfCanvas implements Canvas {
  private ops: string[] = [];

  constructor(readonly width: number, readonly height: number) {}

  private flip(y: number): number {
    return this.height - y;
  }

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    const [r, g, b] = cssToRgb(fill);
    this.ops.push(
      `${rgb(r)} ${rgb(g)} ${rgb(b)} rg`,
      `${fixed(x)} ${fixed(this.flip(y + h))} ${fixed(w)} ${fixed(h)} re f`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, strokeWidth: number): void {
    const [r, g, b] = cssToRgb(stroke);
    this.ops.push(
      `${rgb(r)} ${rgb(g)} ${rgb(b)} RG`,
      `${fixed(strokeWidth)} w`,
      `${fixed(x1)} ${fixed(this.flip(y1))} m ${fixed(x2)} ${fixed(this.flip(y2))} l S`,
    );
  }

  text(x: number, y: number, content: string, size: number, anchor: Anchor, fill: string): void {
    const [r, g, b] = cssToRgb(fill);
    const width = content.length * size * AVG_CHAR_WIDTH;
    let tx = x;
    if (anchor === 'middle') tx = x - width / 2;
    if (anchor === 'end') tx = x - width;
    this.ops.push(
      'BT',
      `/F1 ${size} Tf`,
      `${rgb(r)} ${rgb(g)} ${rgb(b)} rg`,
      `1 0 0 1 ${fixed(tx)} ${fixed(this.flip(y))} Tm`,
      `(${escapePdf(content)}) Tj`,
      'ET',
    );
  }

  serialize(): Buffer {
    const stream = this.ops.join('\n');
    const objects = [
      '<< /Type /Catalog /Pages 2 0 R >>',
      '<< /Type /Pages /Kids [3 0 R] /Count 1 >>',
      `<< /Type /Page /Parent 2 0 R /MediaBox [0 0 ${this.width} ${this.height}] ` +
        '/Resources << /Font << /F1 4 0 R >> >> /Contents 5 0 R >>',
      '<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>',
      `<< /Length ${Buffer.byteLength(stream, 'utf-8')} >>\nstream\n${stream}\nendstream`,
    ];
    let body = '%PDF-1.4\n';
    const offsets: number[] = [];
    objects.forEach((obj, i) => {
      offsets.push(Buffer.byteLength(body, 'utf-8'));
      body += `${i + 1} 0 obj\n${obj}\nendobj\n`;
    });
    const xrefStart = Buffer.byteLength(body, 'utf-8');
    let xref = `xref\n0 ${objects.length + 1}\n0000000000 65535 f \n`;
    for (const off of offsets) {
      xref += `${String(off).padStart(10, '0')} 00000 n \n`;
    }
    body += xref;
    body += `trailer\n<< /Size ${objects.length + 1} /Root 1 0 R >>\nstartxref\n${xrefStart}\n%%EOF\n`;
    return Buffer.from(body, 'utf-8');
  }
}

function rgb(v: number): string {
  return (v / 255).toFixed(3);
}

function cssToRgb(color: string): [number, number, number] {
  const m = /^#([0-9a-fA-F]{6})$/.exec(color);
  if (!m) {
    throw new Error(`unsupported color ${color}; use #rrggbb`);
  }
  const v = parseInt(m[1], 16);
  return [(v >> 16) & 0xff, (v >> 8) & 0xff, v & 0xff];
}

function escapePdf(s: string): string {
  return s.replace(/\\/g, '\\\\').replace(/\(/g, '\\(').replace(/\)/g, '\\)');
}
