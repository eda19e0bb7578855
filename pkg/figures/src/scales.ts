/** Minimal linear and logarithmic axis scales with tick generation. */

export interface Scale {
  map(value: number): number;
  ticks(): number[];
  domain: [number, number];
}

export function linearScale(
  domain: [number, number],
  range: [number, number],
  tickCount = 6
): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  return {
    domain,
    map: (v) => r0 + ((v - d0) / span) * (r1 - r0),
    ticks: () => {
      const step = niceStep(span / Math.max(1, tickCount - 1));
      const start = Math.ceil(d0 / step) * step;
      const out: number[] = [];
      for (let t = start; t <= d1 + 1e-12; t += step) {
        out.push(roundTick(t));
      }
      return out;
    },
  };
}

export function log10Scale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  if (d0 <= 0 || d1 <= 0) {
    throw new Error(`log scale needs positive bounds, got [${d0}, ${d1}]`);
  }
  const inner = linearScale([Math.log10(d0), Math.log10(d1)], range);
  return {
    domain,
    map: (v) => inner.map(Math.log10(v)),
    ticks: () => {
      const out: number[] = [];
      const lo = Math.ceil(Math.log10(d0) - 1e-12);
      const hi = Math.floor(Math.log10(d1) + 1e-12);
      for (let e = lo; e <= hi; e++) {
        out.push(10 ** e);
      }
      return out;
    },
  };
}

function niceStep(raw: number): number {
  const power = 10 ** Math.floor(Math.log10(raw));
  const unit = raw / power;
  const nice = unit >= 7.5 ? 10 : unit >= 3 ? 5 : unit >= 1.5 ? 2 : 1;
  return nice * power;
}

function roundTick(t: number): number {
  return Math.abs(t) < 1e-12 ? 0 : Number(t.toPrecision(12));
}

export function extent(values: number[]): [number, number] {
  if (values.length === 0) {
    throw new Error("cannot take the extent of an empty value list");
  }
  let lo = values[0];
  let hi = values[0];
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}
