/**
 * Figure assembly for the four sweep plots: steady-state purity,
 * nearest-neighbor concurrence and odd|even log-negativity against the
 * protocol parameter grouped by system size, and spin-up density against
 * the reduced field strength grouped by the dissipation asymmetry, with a
 * dotted overlay for the Hamiltonian-free runs.
 */

import { Curve, PALETTE, HEIGHT, MARGIN, WIDTH, renderSvg } from "./svg.js";
import { Scale, extent, linearScale, log10Scale } from "./scales.js";
import { Row, Table, loadTables, numberCell, requireColumns } from "./table.js";

export type FigureKind = "purity" | "concurrence" | "negativity" | "ising";

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  output: string;
  groupBy?: string;
}

interface KindLayout {
  xColumn: string;
  yColumn: string;
  defaultGroup: string;
  xLabel: string;
  yLabel: string;
  title: string;
  logX: boolean;
  unitY: boolean;
}

const LAYOUTS: Record<FigureKind, KindLayout> = {
  purity: {
    xColumn: "z",
    yColumn: "purity",
    defaultGroup: "n",
    xLabel: "target-state parameter z",
    yLabel: "steady-state purity",
    title: "Steady-state purity of the qubit ring",
    logX: false,
    unitY: true,
  },
  concurrence: {
    xColumn: "z",
    yColumn: "concurrence_nn",
    defaultGroup: "n",
    xLabel: "target-state parameter z",
    yLabel: "nearest-neighbor concurrence",
    title: "Nearest-neighbor concurrence of the qubit ring",
    logX: false,
    unitY: false,
  },
  negativity: {
    xColumn: "z",
    yColumn: "log_negativity_odd_even",
    defaultGroup: "n",
    xLabel: "target-state parameter z",
    yLabel: "odd|even log-negativity",
    title: "Odd|even logarithmic negativity of the qubit ring",
    logX: false,
    unitY: false,
  },
  ising: {
    xColumn: "g",
    yColumn: "spin_up_density",
    defaultGroup: "alpha",
    xLabel: "reduced field g",
    yLabel: "spin-up density",
    title: "Spin-up density of the dissipative Ising ring",
    logX: true,
    unitY: true,
  },
};

function groupKeyOf(row: Row, column: string): string {
  const value = row[column];
  if (value === undefined || value === null) {
    throw new Error(`grouping column '${column}' has an empty value`);
  }
  return String(value);
}

function compareKeys(a: string, b: string): number {
  const na = Number(a);
  const nb = Number(b);
  if (Number.isFinite(na) && Number.isFinite(nb)) {
    return na - nb;
  }
  return a < b ? -1 : a > b ? 1 : 0;
}

function sortedPoints(rows: Row[], xColumn: string, yColumn: string): Array<[number, number]> {
  return rows
    .map((r): [number, number] => [numberCell(r, xColumn), numberCell(r, yColumn)])
    .sort((p, q) => p[0] - q[0]);
}

/** Build the labeled curves for a figure kind from validated rows. */
export function buildCurves(table: Table, kind: FigureKind, groupBy: string): Curve[] {
  const layout = LAYOUTS[kind];
  const okRows = table.rows.filter((r) => r["status"] === "ok");
  if (okRows.length === 0) {
    throw new Error("no usable data rows (all rows missing or flagged)");
  }
  const groups = new Map<string, Row[]>();
  for (const row of okRows) {
    const key = groupKeyOf(row, groupBy);
    const bucket = groups.get(key);
    if (bucket) {
      bucket.push(row);
    } else {
      groups.set(key, [row]);
    }
  }
  const keys = [...groups.keys()].sort(compareKeys);
  const curves: Curve[] = [];
  keys.forEach((key, index) => {
    const rows = groups.get(key) as Row[];
    const color = PALETTE[index % PALETTE.length];
    if (kind === "ising") {
      const full = rows.filter((r) => r["hamiltonian_on"] === true);
      const bare = rows.filter((r) => r["hamiltonian_on"] === false);
      if (full.length > 0) {
        curves.push({
          label: `${groupBy}=${key}`,
          points: sortedPoints(full, layout.xColumn, layout.yColumn),
          color,
          dotted: false,
        });
      }
      if (bare.length > 0) {
        curves.push({
          label: `${groupBy}=${key}, dissipation only`,
          points: sortedPoints(bare, layout.xColumn, layout.yColumn),
          color,
          dotted: true,
        });
      }
    } else {
      curves.push({
        label: `${groupBy}=${key}`,
        points: sortedPoints(rows, layout.xColumn, layout.yColumn),
        color,
        dotted: false,
      });
    }
  });
  return curves;
}

function makeScales(curves: Curve[], layout: KindLayout): { x: Scale; y: Scale } {
  const xs = curves.flatMap((c) => c.points.map((p) => p[0]));
  const ys = curves.flatMap((c) => c.points.map((p) => p[1]));
  const [xLo, xHi] = extent(xs);
  const yHi = Math.max(...ys);
  const xRange: [number, number] = [MARGIN.left, WIDTH - MARGIN.right];
  const yRange: [number, number] = [HEIGHT - MARGIN.bottom, MARGIN.top];
  const x = layout.logX ? log10Scale([xLo, xHi], xRange) : linearScale([xLo, xHi], xRange);
  const yTop = layout.unitY ? 1.02 : Math.max(yHi * 1.08, 1e-6);
  const y = linearScale([0, yTop], yRange);
  return { x, y };
}

/** Render a figure to an SVG string. */
export function renderFigure(spec: FigureSpec): string {
  const layout = LAYOUTS[spec.kind];
  const groupBy = spec.groupBy ?? layout.defaultGroup;
  const table = loadTables(spec.inputs);
  const source = spec.inputs.join(", ");
  requireColumns(table, [layout.xColumn, layout.yColumn, groupBy, "status"], source);
  if (spec.kind === "ising") {
    requireColumns(table, ["hamiltonian_on"], source);
  }
  const curves = buildCurves(table, spec.kind, groupBy);
  const { x, y } = makeScales(curves, layout);
  return renderSvg(curves, x, y, layout.xLabel, layout.yLabel, layout.title);
}
