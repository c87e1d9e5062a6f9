// Scope readouts and plot geometry. The draw routine is the only part
// touching the DOM; readout formatting and cursor math are pure so the
// test suite can pin them against server reports.

import { minMaxDecimate, PlotPoint } from "./decimate.js";
import { formatSeconds, formatVolts } from "./grid.js";
import type { CaptureResult } from "./types.js";

export interface ScopeReadouts {
    label: string;
    vpp: string;
    rise: string;
    width: string;
    delay: string;
    flags: string[];
    notes: string[];
}

export function readoutsFor(capture: CaptureResult): ScopeReadouts {
    const report = capture.report;
    return {
        label: capture.label,
        vpp: formatVolts(report.vpp),
        rise: formatSeconds(report.rise_time_10_90),
        width: formatSeconds(report.pulse_width_fwhm),
        delay: formatSeconds(report.delay_vs_reference),
        flags: report.flags,
        notes: report.notes,
    };
}

export interface CursorLevels {
    l10: number;
    l50: number;
    l90: number;
}

/** 10/50/90% levels of the trace amplitude (min-to-max). */
export function cursorLevels(samples: ArrayLike<number>): CursorLevels | null {
    if (samples.length === 0) return null;
    let lo = samples[0];
    let hi = samples[0];
    for (let i = 1; i < samples.length; i++) {
        if (samples[i] < lo) lo = samples[i];
        if (samples[i] > hi) hi = samples[i];
    }
    if (hi <= lo) return null;  // flat trace: no pulse, no cursors
    const span = hi - lo;
    return { l10: lo + 0.1 * span, l50: lo + 0.5 * span, l90: lo + 0.9 * span };
}

export function plotPoints(capture: CaptureResult, maxPoints = 4096): PlotPoint[] {
    const waveform = capture.waveform;
    if (!waveform.samples) return [];
    return minMaxDecimate(waveform.samples, waveform.sample_rate, waveform.t0,
                          maxPoints);
}

export function drawScope(
    canvas: HTMLCanvasElement,
    capture: CaptureResult | null,
): void {
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#101418";
    ctx.fillRect(0, 0, width, height);
    if (!capture || !capture.waveform.samples) {
        ctx.fillStyle = "#8899aa";
        ctx.font = "14px sans-serif";
        ctx.fillText("no pulse", width / 2 - 28, height / 2);
        return;
    }
    const points = plotPoints(capture, Math.max(64, 2 * width));
    const tMin = points[0].t;
    const tMax = points[points.length - 1].t;
    let vMin = 0;
    let vMax = 0;
    for (const p of points) {
        if (p.v < vMin) vMin = p.v;
        if (p.v > vMax) vMax = p.v;
    }
    if (vMax - vMin < 1e-12) vMax = vMin + 1.0;
    const pad = 0.08 * (vMax - vMin);
    vMin -= pad;
    vMax += pad;
    const x = (t: number) => ((t - tMin) / (tMax - tMin)) * (width - 1);
    const y = (v: number) => height - 1 - ((v - vMin) / (vMax - vMin)) * (height - 1);

    const levels = cursorLevels(capture.waveform.samples);
    if (levels) {
        ctx.strokeStyle = "#39506b";
        ctx.setLineDash([4, 4]);
        for (const level of [levels.l10, levels.l50, levels.l90]) {
            ctx.beginPath();
            ctx.moveTo(0, y(level));
            ctx.lineTo(width, y(level));
            ctx.stroke();
        }
        ctx.setLineDash([]);
    }

    ctx.strokeStyle = "#57d38c";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    points.forEach((p, i) => {
        if (i === 0) ctx.moveTo(x(p.t), y(p.v));
        else ctx.lineTo(x(p.t), y(p.v));
    });
    ctx.stroke();
}
