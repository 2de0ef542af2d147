// Deterministic SVG helpers: fixed precision, no timestamps, no ids,
// so reruns on the same inputs are byte-identical.
import { scaleLinear, scaleLog } from "d3-scale";

export type Scale = ReturnType<typeof scaleLinear<number, number>>;

export const WIDTH = 640;
export const HEIGHT = 420;
export const MARGIN = { top: 36, right: 24, bottom: 46, left: 64 };

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                        "#ff7f0e", "#8c564b"];

export function fmt(x: number): string {
  const s = x.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export function makeScale(domain: [number, number], range: [number, number],
                          log = false): Scale {
  const s = log ? scaleLog() : scaleLinear();
  return s.domain(domain).range(range).nice() as Scale;
}

export function linePath(xs: number[], ys: number[], x: Scale, y: Scale): string {
  const pts = xs.map((v, i) => `${fmt(x(v))},${fmt(y(ys[i]))}`);
  return "M" + pts.join("L");
}

// closed band: upper edge left-to-right, then lower edge back
export function bandPath(xs: number[], lo: number[], hi: number[],
                         x: Scale, y: Scale): string {
  const up = xs.map((v, i) => `${fmt(x(v))},${fmt(y(hi[i]))}`);
  const down = [...xs].reverse().map((v, i) =>
    `${fmt(x(v))},${fmt(y(lo[xs.length - 1 - i]))}`);
  return "M" + up.join("L") + "L" + down.join("L") + "Z";
}

function tickLabel(v: number, log: boolean): string {
  if (log) {
    const e = Math.log10(v);
    if (Math.abs(e - Math.round(e)) < 1e-9) return `1e${Math.round(e)}`;
    return v.toExponential(0);
  }
  if (v !== 0 && (Math.abs(v) >= 1e4 || Math.abs(v) < 1e-3)) {
    return v.toExponential(1);
  }
  return String(Math.round(v * 1e6) / 1e6);
}

export function axes(x: Scale, y: Scale, xlab: string, ylab: string,
                     logY = false): string {
  const x0 = MARGIN.left, x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom, y1 = MARGIN.top;
  const parts: string[] = [];
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="#333"/>`);
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="#333"/>`);
  for (const t of x.ticks(6)) {
    const px = fmt(x(t));
    parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 5}" stroke="#333"/>`);
    parts.push(`<text x="${px}" y="${y0 + 20}" text-anchor="middle" ` +
               `font-size="12">${tickLabel(t, false)}</text>`);
  }
  const yticks = logY ? (y as any).ticks(5).filter((t: number) => {
    const e = Math.log10(t);
    return Math.abs(e - Math.round(e)) < 1e-9;
  }) : y.ticks(6);
  for (const t of yticks) {
    const py = fmt(y(t));
    parts.push(`<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="#333"/>`);
    parts.push(`<line x1="${x0}" y1="${py}" x2="${x1}" y2="${py}" ` +
               `stroke="#ddd" stroke-dasharray="3,3"/>`);
    parts.push(`<text x="${x0 - 9}" y="${py}" text-anchor="end" ` +
               `dominant-baseline="middle" font-size="12">${tickLabel(t, logY)}</text>`);
  }
  parts.push(`<text x="${(x0 + x1) / 2}" y="${HEIGHT - 10}" text-anchor="middle" ` +
             `font-size="13">${xlab}</text>`);
  parts.push(`<text x="16" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="13" ` +
             `transform="rotate(-90 16 ${(y0 + y1) / 2})">${ylab}</text>`);
  return parts.join("\n");
}

export function legend(labels: string[]): string {
  const x = WIDTH - MARGIN.right - 160;
  return labels.map((lab, i) => {
    const y = MARGIN.top + 8 + 18 * i;
    return `<line x1="${x}" y1="${y}" x2="${x + 22}" y2="${y}" ` +
           `stroke="${PALETTE[i % PALETTE.length]}" stroke-width="2"/>\n` +
           `<text x="${x + 28}" y="${y + 4}" font-size="12">${lab}</text>`;
  }).join("\n");
}

export function document(title: string, body: string): string {
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
    `height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
    `font-family="sans-serif">\n` +
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>\n` +
    `<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-size="15">` +
    `${title}</text>\n${body}\n</svg>\n`;
}
