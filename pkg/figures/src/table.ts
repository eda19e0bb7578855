/**
 * Loading and validation of the simulator's comma-separated sweep output.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export type Cell = number | boolean | string;
export type Row = Record<string, Cell>;

export interface Table {
  columns: string[];
  rows: Row[];
}

/** Parse one result file (header row plus typed data rows). */
export function parseTable(content: string, source: string): Table {
  const parsed = Papa.parse<Row>(content.trim(), {
    header: true,
    delimiter: ",",
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`${source}: malformed CSV (${first.message} at row ${first.row})`);
  }
  const columns = parsed.meta.fields ?? [];
  if (columns.length === 0) {
    throw new Error(`${source}: missing header row`);
  }
  return { columns, rows: parsed.data };
}

/** Read and concatenate result files sharing one schema. */
export function loadTables(paths: string[]): Table {
  if (paths.length === 0) {
    throw new Error("no input files given");
  }
  const tables = paths.map((p) => parseTable(readFileSync(p, "utf-8"), p));
  const columns = tables[0].columns;
  for (let i = 1; i < tables.length; i++) {
    if (tables[i].columns.join(",") !== columns.join(",")) {
      throw new Error(
        `${paths[i]}: column mismatch with ${paths[0]} ` +
          `(${tables[i].columns.join(",")} vs ${columns.join(",")})`
      );
    }
  }
  return { columns, rows: tables.flatMap((t) => t.rows) };
}

/** Assert the listed columns exist, naming the offender otherwise. */
export function requireColumns(table: Table, needed: string[], source: string): void {
  for (const column of needed) {
    if (!table.columns.includes(column)) {
      throw new Error(
        `${source}: missing column '${column}' (found: ${table.columns.join(", ")})`
      );
    }
  }
}

export function numberCell(row: Row, column: string): number {
  const value = row[column];
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new Error(`column '${column}' holds a non-numeric value: ${String(value)}`);
  }
  return value;
}
