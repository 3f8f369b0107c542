import { Anchor, Canvas, fixed } from './canvas';

const FONT = 'Helvetica, Arial, sans-serif';

export class SvgCanvas implements Canvas {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}">`,
      `<rect x="0" y="0" width="${width}" height="${height}" fill="#ffffff"/>`,
    );
  }

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.parts.push(
      `<rect x="${fixed(x)}" y="${fixed(y)}" width="${fixed(w)}" height="${fixed(h)}" fill="${fill}"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, strokeWidth: number): void {
    this.parts.push(
      `<line x1="${fixed(x1)}" y1="${fixed(y1)}" x2="${fixed(x2)}" y2="${fixed(y2)}" ` +
        `stroke="${stroke}" stroke-width="${fixed(strokeWidth)}"/>`,
    );
  }

  text(x: number, y: number, content: string, size: number, anchor: Anchor, fill: string): void {
    this.parts.push(
      `<text x="${fixed(x)}" y="${fixed(y)}" font-family="${FONT}" font-size="${size}" ` +
        `text-anchor="${anchor}" fill="${fill}">${escapeXml(content)}</text>`,
    );
  }

  serialize(): Buffer {
    return Buffer.from(this.parts.join('\n') + '\n</svg>\n', 'utf-8');
  }
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}
