// One moment series with its uncertainty band E +/- sqrt(Var).
import { writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";
import { extent } from "d3-array";

import { numeric, readCsv, requireColumns, stem } from "./csv.js";
import * as svg from "./svg.js";

export function render(file: string, title = ""): string {
  const table = readCsv(file);
  requireColumns(table, ["t", "E", "Var"]);
  const t = numeric(table, "t");
  const e = numeric(table, "E");
  const sd = numeric(table, "Var").map((v) => Math.sqrt(Math.max(v, 0)));
  const lo = e.map((v, i) => v - sd[i]);
  const hi = e.map((v, i) => v + sd[i]);
  const x = svg.makeScale(extent(t) as [number, number],
                          [svg.MARGIN.left, svg.WIDTH - svg.MARGIN.right]);
  const y = svg.makeScale(extent([...lo, ...hi]) as [number, number],
                          [svg.HEIGHT - svg.MARGIN.bottom, svg.MARGIN.top]);
  const body = [
    svg.axes(x, y, "t", "E and E +/- sd"),
    `<path d="${svg.bandPath(t, lo, hi, x, y)}" fill="#bbb" fill-opacity="0.45" stroke="none"/>`,
    `<path d="${svg.linePath(t, e, x, y)}" fill="none" stroke="${svg.PALETTE[0]}" stroke-width="1.8"/>`,
  ].join("\n");
  return svg.document(title || `${stem(file)} with uncertainty band`, body);
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
    throw new Error("usage: plot-band --in series.csv --out fig.svg");
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
