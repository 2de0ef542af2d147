import { execFileSync } from "node:child_process";
import { existsSync, mkdirSync, readFileSync, writeFileSync } from "node:fs";
import path from "node:path";
import { fileURLToPath } from "node:url";
import { beforeAll, describe, expect, it } from "vitest";

import { render as renderBand } from "../src/plot_band.js";
import { render as renderConvergence } from "../src/plot_convergence.js";
import { render as renderDensity } from "../src/plot_density.js";
import { render as renderMoments } from "../src/plot_moments.js";

const here = path.dirname(fileURLToPath(import.meta.url));
const fixtures = path.join(here, "fixtures");
const outDir = path.join(here, "out");
const figRoot = path.resolve(here, "..");
const repoRoot = path.resolve(here, "..", "..");

const kacDir = path.join(fixtures, "kac");
const maxwellDir = path.join(fixtures, "maxwell");
const convDir = path.join(fixtures, "conv");

function simulate(args: string[]) {
  execFileSync("python3", ["-m", "dsmcuq.cli", ...args], {
    cwd: repoRoot,
    stdio: "pipe",
  });
}

// tiny runs, just enough to produce every CSV shape the plots consume
beforeAll(() => {
  mkdirSync(outDir, { recursive: true });
  if (!existsSync(path.join(kacDir, "density_t1.csv"))) {
    simulate(["run", "--test", "Kac", "--n", "300", "--m", "2", "--dt", "0.1",
              "--tmax", "1", "--seed", "3", "--n-v", "40", "--out", kacDir]);
  }
  if (!existsSync(path.join(maxwellDir, "density_t1.csv"))) {
    simulate(["run", "--test", "Maxwell2D", "--n", "300", "--m", "2", "--dt", "0.1",
              "--tmax", "1", "--seed", "4", "--n-v", "16", "--out", maxwellDir]);
  }
  if (!existsSync(path.join(convDir, "convergence.csv"))) {
    simulate(["convergence", "--test", "Kac", "--n", "300", "--m-list", "1,2",
              "--m-ref", "3", "--dt", "0.1", "--tmax", "1", "--seed", "5",
              "--out", convDir]);
  }
}, 120_000);

describe("plot-moments", () => {
  it("renders the same bytes on repeated calls", () => {
    const files = [path.join(kacDir, "m2.csv"), path.join(kacDir, "m4.csv")];
    const a = renderMoments(files);
    const b = renderMoments(files);
    expect(a).toBe(b);
    expect(a).toContain("<svg");
    expect(a).toContain("</svg>");
  });

  it("draws one curve per input file plus a legend", () => {
    const files = [path.join(kacDir, "m2.csv"), path.join(kacDir, "m4.csv")];
    const out = renderMoments(files, false, "moments");
    expect(out).toContain(">m2<");
    expect(out).toContain(">m4<");
    expect(out).toContain("moments");
  });

  it("supports a log scale on positive data", () => {
    const out = renderMoments([path.join(kacDir, "m2.csv")], true);
    expect(out).toContain("<svg");
  });

  it("rejects a csv without the expected columns", () => {
    const bad = path.join(outDir, "bad_moments.csv");
    writeFileSync(bad, "a,b\n1,2\n");
    expect(() => renderMoments([bad])).toThrow(/column 't' missing/);
  });
});

describe("plot-band", () => {
  it("renders a band and a mean line deterministically", () => {
    const file = path.join(kacDir, "m4.csv");
    const a = renderBand(file);
    expect(a).toBe(renderBand(file));
    expect(a).toContain("fill-opacity");
    expect(a).toContain("<path");
  });
});

describe("plot-convergence", () => {
  it("plots error against M at the final recorded time", () => {
    const file = path.join(convDir, "convergence.csv");
    const a = renderConvergence(file);
    expect(a).toBe(renderConvergence(file));
    expect(a).toContain("<circle");
  });

  it("accepts an explicit time and rejects a missing one", () => {
    const file = path.join(convDir, "convergence.csv");
    expect(renderConvergence(file, 1.0)).toContain("<svg");
    expect(() => renderConvergence(file, 99.0)).toThrow(/no positive errors/);
  });
});

describe("plot-density", () => {
  it("draws a 1D profile with an uncertainty band", () => {
    const file = path.join(kacDir, "density_t1.csv");
    const a = renderDensity(file);
    expect(a).toBe(renderDensity(file));
    expect(a).toContain("<path");
  });

  it("draws a 2D marginal as a heatmap", () => {
    const file = path.join(maxwellDir, "density_t1.csv");
    const a = renderDensity(file);
    expect(a).toBe(renderDensity(file));
    expect(a).toContain("<rect");
    expect(a).toContain("rgb(");
  });
});

describe("command line entry points", () => {
  function runNode(script: string, args: string[]) {
    return execFileSync("node", [path.join(figRoot, "dist", script), ...args], {
      cwd: figRoot,
      stdio: "pipe",
    }).toString();
  }

  it("plot_moments writes an svg and reports it", () => {
    const out = path.join(outDir, "moments.svg");
    const msg = runNode("plot_moments.js",
                        ["--in", path.join(kacDir, "m2.csv"), "--out", out]);
    expect(msg).toContain("wrote");
    expect(readFileSync(out, "utf8")).toContain("</svg>");
  });

  it("plot_band writes an svg", () => {
    const out = path.join(outDir, "band.svg");
    runNode("plot_band.js", ["--in", path.join(kacDir, "energy.csv"), "--out", out]);
    expect(existsSync(out)).toBe(true);
  });

  it("plot_convergence writes an svg", () => {
    const out = path.join(outDir, "convergence.svg");
    runNode("plot_convergence.js",
            ["--in", path.join(convDir, "convergence.csv"), "--out", out]);
    expect(existsSync(out)).toBe(true);
  });

  it("plot_density writes an svg for both layouts", () => {
    const out1 = path.join(outDir, "density1d.svg");
    const out2 = path.join(outDir, "density2d.svg");
    runNode("plot_density.js",
            ["--in", path.join(kacDir, "density_t0.csv"), "--out", out1]);
    runNode("plot_density.js",
            ["--in", path.join(maxwellDir, "density_t1.csv"), "--out", out2]);
    expect(existsSync(out1)).toBe(true);
    expect(existsSync(out2)).toBe(true);
  });

  it("exits nonzero on a missing column", () => {
    const bad = path.join(outDir, "bad.csv");
    writeFileSync(bad, "x,y\n1,2\n");
    expect(() => runNode("plot_band.js",
                         ["--in", bad, "--out", path.join(outDir, "nope.svg")]))
      .toThrow();
  });

  it("exits nonzero on an empty csv and on missing args", () => {
    const empty = path.join(outDir, "empty.csv");
    writeFileSync(empty, "");
    expect(() => runNode("plot_moments.js",
                         ["--in", empty, "--out", path.join(outDir, "nope.svg")]))
      .toThrow();
    expect(() => runNode("plot_moments.js", [])).toThrow();
  });
});
