import { describe, expect, it } from "vitest";

import { fitTransform } from "../src/plot.js";

describe("fitTransform", () => {
  it("covers the data extent with 5% vertical slack", () => {
    const t = fitTransform(
      [{ x: [0, 10], y: [1, 3], color: "#000" }],
      600,
      400,
    );
    expect(t.xMin).toBe(0);
    expect(t.xMax).toBe(10);
    expect(t.yMin).toBeCloseTo(0.9, 12);
    expect(t.yMax).toBeCloseTo(3.1, 12);
    expect(t.width).toBe(600);
    expect(t.height).toBe(400);
  });

  it("spans the union of several traces", () => {
    const t = fitTransform(
      [
        { x: [2, 4], y: [0, 1], color: "#000" },
        { x: [-1, 3], y: [5, 6], color: "#000" },
      ],
      100,
      100,
    );
    expect(t.xMin).toBe(-1);
    expect(t.xMax).toBe(4);
    expect(t.yMax).toBeGreaterThan(6);
  });

  it("degenerate or empty input still yields a usable rectangle", () => {
    const empty = fitTransform([], 10, 10);
    expect(empty.xMax).toBeGreaterThan(empty.xMin);
    const flat = fitTransform(
      [{ x: [5, 5], y: [2, 2], color: "#000" }],
      10,
      10,
    );
    expect(flat.xMax).toBeGreaterThan(flat.xMin);
    expect(flat.yMax).toBeGreaterThan(flat.yMin);
  });
});
