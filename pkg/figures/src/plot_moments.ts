// Overlay expectation series from one or more moment CSVs (t,E,Var).
import { writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";
import { extent } from "d3-array";

import { numeric, readCsv, requireColumns, stem } from "./csv.js";
import * as svg from "./svg.js";

export function render(files: string[], semilogy = false, title = ""): string {
  if (files.length === 0) throw new Error("plot-moments: no input files");
  const series = files.map((f) => {
    const table = readCsv(f);
    requireColumns(table, ["t", "E"]);
    return { label: stem(f), t: numeric(table, "t"), e: numeric(table, "E") };
  });
  const allT = series.flatMap((s) => s.t);
  let allE = series.flatMap((s) => s.e);
  if (semilogy) {
    allE = allE.filter((v) => v > 0);
    if (allE.length === 0) throw new Error("plot-moments: no positive values for log scale");
  }
  const x = svg.makeScale(extent(allT) as [number, number],
                          [svg.MARGIN.left, svg.WIDTH - svg.MARGIN.right]);
  const y = svg.makeScale(extent(allE) as [number, number],
                          [svg.HEIGHT - svg.MARGIN.bottom, svg.MARGIN.top], semilogy);
  const parts = [svg.axes(x, y, "t", semilogy ? "E (log)" : "E", semilogy)];
  series.forEach((s, i) => {
    let t = s.t, e = s.e;
    if (semilogy) {
      const keep = e.map((v) => v > 0);
      t = t.filter((_, j) => keep[j]);
      e = e.filter((_, j) => keep[j]);
    }
    parts.push(`<path d="${svg.linePath(t, e, x, y)}" fill="none" ` +
               `stroke="${svg.PALETTE[i % svg.PALETTE.length]}" stroke-width="1.5"/>`);
  });
  parts.push(svg.legend(series.map((s) => s.label)));
  return svg.document(title || "moment expectations", parts.join("\n"));
}

function main() {
  const { values } = parseArgs({
    options: {
      in: { type: "string", multiple: true },
      out: { type: "string" },
      semilogy: { type: "boolean", default: false },
      title: { type: "string", default: "" },
    },
  });
  if (!values.in || !values.out) {
    throw new Error("usage: plot-moments --in a.csv [--in b.csv ...] --out fig.svg [--semilogy]");
  }
  writeFileSync(values.out, render(values.in, values.semilogy, values.title));
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
