// Reconstructed density: 1D files (v,E,Var) get a line with a band,
// 2D files (vx,vy,E,Var) get a heatmap of E.
import { writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";
import { extent } from "d3-array";

import { numeric, readCsv, requireColumns, stem, type Table } from "./csv.js";
import * as svg from "./svg.js";

function render1d(table: Table, title: string): string {
  const v = numeric(table, "v");
  const e = numeric(table, "E");
  const sd = numeric(table, "Var").map((x) => Math.sqrt(Math.max(x, 0)));
  const lo = e.map((x, i) => x - sd[i]);
  const hi = e.map((x, i) => x + sd[i]);
  const x = svg.makeScale(extent(v) as [number, number],
                          [svg.MARGIN.left, svg.WIDTH - svg.MARGIN.right]);
  const y = svg.makeScale([Math.min(0, ...lo), Math.max(...hi)],
                          [svg.HEIGHT - svg.MARGIN.bottom, svg.MARGIN.top]);
  const body = [
    svg.axes(x, y, "v", "E[f] and band"),
    `<path d="${svg.bandPath(v, lo, hi, x, y)}" fill="#bbb" fill-opacity="0.45" stroke="none"/>`,
    `<path d="${svg.linePath(v, e, x, y)}" fill="none" stroke="${svg.PALETTE[0]}" stroke-width="1.8"/>`,
  ].join("\n");
  return svg.document(title, body);
}

function shade(u: number): string {
  // light -> dark blue, two-stop linear ramp
  const c0 = [247, 251, 255], c1 = [8, 48, 107];
  const c = c0.map((a, i) => Math.round(a + (c1[i] - a) * u));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

function render2d(table: Table, title: string): string {
  const vx = numeric(table, "vx");
  const vy = numeric(table, "vy");
  const e = numeric(table, "E");
  const xs = [...new Set(vx)].sort((a, b) => a - b);
  const ys = [...new Set(vy)].sort((a, b) => a - b);
  const x = svg.makeScale([xs[0], xs[xs.length - 1]],
                          [svg.MARGIN.left, svg.WIDTH - svg.MARGIN.right]);
  const y = svg.makeScale([ys[0], ys[ys.length - 1]],
                          [svg.HEIGHT - svg.MARGIN.bottom, svg.MARGIN.top]);
  const emax = Math.max(...e);
  if (!(emax > 0)) throw new Error("plot-density: all-zero 2D density");
  const w = (svg.WIDTH - svg.MARGIN.left - svg.MARGIN.right) / xs.length;
  const h = (svg.HEIGHT - svg.MARGIN.top - svg.MARGIN.bottom) / ys.length;
  const parts = [svg.axes(x, y, "vx", "vy")];
  for (let i = 0; i < vx.length; i++) {
    if (e[i] <= 0) continue;
    parts.push(`<rect x="${svg.fmt(x(vx[i]) - w / 2)}" y="${svg.fmt(y(vy[i]) - h / 2)}" ` +
               `width="${svg.fmt(w)}" height="${svg.fmt(h)}" ` +
               `fill="${shade(e[i] / emax)}"/>`);
  }
  return svg.document(title, parts.join("\n"));
}

export function render(file: string, title = ""): string {
  const table = readCsv(file);
  if (table.columns.includes("vx")) {
    requireColumns(table, ["vx", "vy", "E", "Var"]);
    return render2d(table, title || `${stem(file)} marginal expectation`);
  }
  requireColumns(table, ["v", "E", "Var"]);
  return render1d(table, title || `${stem(file)} expectation`);
}

function main() {
  const { values } = parseArgs({
    options: {
      in: { type: "string" },
      out: { type: "string" },
      title: { type: "string", default: "" },
    },
  });
  if (!values.in || !values.out) {
    throw new Error("usage: plot-density --in density_t1.csv --out fig.svg");
  }
  writeFileSync(values.out, render(values.in, values.title));
  console.log(`wrote ${values.out}`);
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  try {
    main();
  } catch (err) {
    console.error(String(err));
    process.exit(1);
  }
}
