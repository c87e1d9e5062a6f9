import { describe, expect, it } from "vitest";

import { minMaxDecimate } from "../src/decimate.js";

describe("min/max decimation", () => {
    it("passes short traces through untouched", () => {
        const points = minMaxDecimate([0, 1, 2], 1e9, 0);
        expect(points).toHaveLength(3);
        expect(points[1]).toEqual({ t: 1e-9, v: 1 });
    });

    it("never exceeds the point budget", () => {
        const samples = Array.from({ length: 40000 }, (_, i) => Math.sin(i));
        const points = minMaxDecimate(samples, 4e10, 0, 4096);
        expect(points.length).toBeLessThanOrEqual(4096);
        expect(points.length).toBeGreaterThan(2000);
    });

    it("preserves the global extremes", () => {
        const samples = Array.from({ length: 40000 }, (_, i) => Math.sin(i / 7));
        samples[12345] = 42;   // spike up
        samples[23456] = -42;  // spike down
        const points = minMaxDecimate(samples, 4e10, 0, 1024);
        const values = points.map((p) => p.v);
        expect(Math.max(...values)).toBe(42);
        expect(Math.min(...values)).toBe(-42);
    });

    it("keeps bucket extremes in temporal order", () => {
        const samples = Array.from({ length: 10000 }, (_, i) => (i % 97) - 48);
        const points = minMaxDecimate(samples, 1e9, 0, 512);
        for (let i = 1; i < points.length; i++) {
            expect(points[i].t).toBeGreaterThanOrEqual(points[i - 1].t);
        }
    });
});
