// Min/max-preserving decimation. 40 GS/s traces are too dense to plot raw,
// so each output bucket keeps the extremes of its input range (in temporal
// order) and the result never exceeds maxPoints.

export interface PlotPoint {
    t: number;
    v: number;
}

export function minMaxDecimate(
    samples: ArrayLike<number>,
    sampleRate: number,
    t0: number,
    maxPoints = 4096,
): PlotPoint[] {
    const n = samples.length;
    const dt = 1.0 / sampleRate;
    if (n <= maxPoints) {
        const out: PlotPoint[] = [];
        for (let i = 0; i < n; i++) {
            out.push({ t: t0 + i * dt, v: samples[i] });
        }
        return out;
    }
    const buckets = Math.floor(maxPoints / 2);
    const out: PlotPoint[] = [];
    for (let b = 0; b < buckets; b++) {
        const lo = Math.floor((b * n) / buckets);
        const hi = Math.max(lo + 1, Math.floor(((b + 1) * n) / buckets));
        let minIdx = lo;
        let maxIdx = lo;
        for (let i = lo + 1; i < hi; i++) {
            if (samples[i] < samples[minIdx]) minIdx = i;
            if (samples[i] > samples[maxIdx]) maxIdx = i;
        }
        const first = Math.min(minIdx, maxIdx);
        const second = Math.max(minIdx, maxIdx);
        out.push({ t: t0 + first * dt, v: samples[first] });
        if (second !== first) {
            out.push({ t: t0 + second * dt, v: samples[second] });
        }
    }
    return out;
}
