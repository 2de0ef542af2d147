// Tiny reader for the simulator's CSV column contract.
import { readFileSync } from "node:fs";
import { basename } from "node:path";

export interface Table {
  file: string;
  columns: string[];
  cells: string[][];
}

export function readCsv(file: string): Table {
  const text = readFileSync(file, "utf8");
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  if (lines.length === 0) throw new Error(`${basename(file)}: empty file`);
  const columns = lines[0].split(",").map((c) => c.trim());
  const cells = lines.slice(1).map((l) => l.split(","));
  if (cells.length === 0) throw new Error(`${basename(file)}: no data rows`);
  return { file, columns, cells };
}

export function requireColumns(table: Table, names: string[]): void {
  for (const name of names) {
    if (!table.columns.includes(name)) {
      throw new Error(
        `${basename(table.file)}: column '${name}' missing ` +
        `(have: ${table.columns.join(",")})`,
      );
    }
  }
}

export function numeric(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) requireColumns(table, [name]);
  return table.cells.map((row, i) => {
    const v = Number(row[idx]);
    if (!Number.isFinite(v)) {
      throw new Error(
        `${basename(table.file)}: row ${i + 1} has non-numeric '${name}': ${row[idx]}`,
      );
    }
    return v;
  });
}

export function stem(file: string): string {
  return basename(file).replace(/\.csv$/, "");
}
