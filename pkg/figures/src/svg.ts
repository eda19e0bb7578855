/**
 * Deterministic SVG assembly: fixed layout and styles, no timestamps, so a
 * given scene always serializes to the same bytes.
 */

import { Scale } from "./scales.js";

export const WIDTH = 640;
export const HEIGHT = 440;
export const MARGIN = { top: 24, right: 24, bottom: 52, left: 64 };

export const PALETTE = [
  "#1b6ca8",
  "#c0392b",
  "#2e8b57",
  "#8e44ad",
  "#d4880c",
  "#16a2b8",
  "#5d6d7e",
];

export interface Curve {
  label: string;
  points: Array<[number, number]>;
  color: string;
  dotted: boolean;
}

function fmt(value: number): string {
  return Number(value.toFixed(3)).toString();
}

function tickLabel(value: number): string {
  if (value !== 0 && (Math.abs(value) >= 1e4 || Math.abs(value) < 1e-3)) {
    return value.toExponential(0).replace("+", "");
  }
  return Number(value.toPrecision(6)).toString();
}

export function renderSvg(
  curves: Curve[],
  x: Scale,
  y: Scale,
  xLabel: string,
  yLabel: string,
  title: string
): string {
  const lines: string[] = [];
  lines.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`
  );
  lines.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  lines.push(
    `<text x="${WIDTH / 2}" y="16" text-anchor="middle" font-size="14">${title}</text>`
  );

  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;

  for (const t of x.ticks()) {
    const px = x.map(t);
    lines.push(
      `<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y0 + 5}" stroke="black"/>`
    );
    lines.push(
      `<text x="${fmt(px)}" y="${y0 + 20}" text-anchor="middle" font-size="11">` +
        `${tickLabel(t)}</text>`
    );
  }
  for (const t of y.ticks()) {
    const py = y.map(t);
    lines.push(
      `<line x1="${x0 - 5}" y1="${fmt(py)}" x2="${x0}" y2="${fmt(py)}" stroke="black"/>`
    );
    lines.push(
      `<text x="${x0 - 9}" y="${fmt(py + 4)}" text-anchor="end" font-size="11">` +
        `${tickLabel(t)}</text>`
    );
    lines.push(
      `<line x1="${x0}" y1="${fmt(py)}" x2="${x1}" y2="${fmt(py)}" ` +
        `stroke="#dddddd" stroke-width="0.5"/>`
    );
  }
  lines.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`);
  lines.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`);
  lines.push(
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-size="13">` +
      `${xLabel}</text>`
  );
  lines.push(
    `<text x="18" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="13" ` +
      `transform="rotate(-90 18 ${(y0 + y1) / 2})">${yLabel}</text>`
  );

  for (const curve of curves) {
    const path = curve.points
      .map(([px, py]) => `${fmt(x.map(px))},${fmt(y.map(py))}`)
      .join(" ");
    const dash = curve.dotted ? ' stroke-dasharray="3,4"' : "";
    lines.push(
      `<polyline points="${path}" fill="none" stroke="${curve.color}" ` +
        `stroke-width="1.8"${dash} data-label="${curve.label}"/>`
    );
  }

  const legendX = x1 - 150;
  let legendY = y1 + 8;
  for (const curve of curves) {
    const dash = curve.dotted ? ' stroke-dasharray="3,4"' : "";
    lines.push(
      `<line x1="${legendX}" y1="${legendY}" x2="${legendX + 26}" y2="${legendY}" ` +
        `stroke="${curve.color}" stroke-width="1.8"${dash}/>`
    );
    lines.push(
      `<text x="${legendX + 32}" y="${legendY + 4}" font-size="11">${curve.label}</text>`
    );
    legendY += 16;
  }

  lines.push("</svg>");
  return lines.join("\n") + "\n";
}
