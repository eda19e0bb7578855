import { describe, expect, it } from "vitest";
import { extent, linearScale, log10Scale } from "../src/scales.js";

describe("linearScale", () => {
  it("maps the domain ends onto the range ends", () => {
    const s = linearScale([0, 10], [100, 500]);
    expect(s.map(0)).toBe(100);
    expect(s.map(10)).toBe(500);
    expect(s.map(5)).toBe(300);
  });

  it("produces round ticks covering the domain", () => {
    const ticks = linearScale([0, 1], [0, 1]).ticks();
    expect(ticks[0]).toBe(0);
    expect(ticks[ticks.length - 1]).toBeCloseTo(1, 12);
    expect(ticks.length).toBeGreaterThanOrEqual(4);
  });
});

describe("log10Scale", () => {
  it("maps decades evenly", () => {
    const s = log10Scale([0.1, 10], [0, 200]);
    expect(s.map(0.1)).toBeCloseTo(0, 9);
    expect(s.map(1)).toBeCloseTo(100, 9);
    expect(s.map(10)).toBeCloseTo(200, 9);
  });

  it("ticks at powers of ten", () => {
    expect(log10Scale([0.1, 10], [0, 1]).ticks()).toEqual([0.1, 1, 10]);
  });

  it("rejects non-positive bounds", () => {
    expect(() => log10Scale([0, 1], [0, 1])).toThrow(/positive/);
  });
});

describe("extent", () => {
  it("finds the bounds", () => {
    expect(extent([3, -1, 2])).toEqual([-1, 3]);
  });

  it("rejects empty input", () => {
    expect(() => extent([])).toThrow(/empty/);
  });
});
