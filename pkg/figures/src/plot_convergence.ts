// Semilog L2(Omega) error vs gPC order M from a convergence CSV (M,t,error).
import { writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";
import { extent, max } from "d3-array";

import { numeric, readCsv, requireColumns } from "./csv.js";
import * as svg from "./svg.js";

export function render(file: string, atT?: number, title = ""): string {
  const table = readCsv(file);
  requireColumns(table, ["M", "t", "error"]);
  const m = numeric(table, "M");
  const t = numeric(table, "t");
  const err = numeric(table, "error");
  const tSel = atT ?? (max(t) as number);
  const pts = m
    .map((mi, i) => ({ m: mi, t: t[i], e: err[i] }))
    .filter((p) => Math.abs(p.t - tSel) < 1e-9 && p.e > 0)
    .sort((a, b) => a.m - b.m);
  if (pts.length === 0) {
    throw new Error(`plot-convergence: no positive errors at t=${tSel}`);
  }
  const x = svg.makeScale(extent(pts.map((p) => p.m)) as [number, number],
                          [svg.MARGIN.left, svg.WIDTH - svg.MARGIN.right]);
  const y = svg.makeScale(extent(pts.map((p) => p.e)) as [number, number],
                          [svg.HEIGHT - svg.MARGIN.bottom, svg.MARGIN.top], true);
  const parts = [svg.axes(x, y, "M", "L2 error (log)", true)];
  parts.push(`<path d="${svg.linePath(pts.map((p) => p.m), pts.map((p) => p.e), x, y)}" ` +
             `fill="none" stroke="${svg.PALETTE[0]}" stroke-width="1.5"/>`);
  for (const p of pts) {
    parts.push(`<circle cx="${svg.fmt(x(p.m))}" cy="${svg.fmt(y(p.e))}" r="3.5" ` +
               `fill="${svg.PALETTE[0]}"/>`);
  }
  return svg.document(title || `convergence at t=${tSel}`, parts.join("\n"));
}

function main() {
  const { values } = parseArgs({
    options: {
      in: { type: "string" },
      out: { type: "string" },
      t: { type: "string" },
      title: { type: "string", default: "" },
    },
  });
  if (!values.in || !values.out) {
    throw new Error("usage: plot-convergence --in convergence.csv --out fig.svg [--t 5]");
  }
  const atT = values.t === undefined ? undefined : Number(values.t);
  if (atT !== undefined && !Number.isFinite(atT)) {
    throw new Error(`plot-convergence: bad --t value: ${values.t}`);
  }
  writeFileSync(values.out, render(values.in, atT, values.title));
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
