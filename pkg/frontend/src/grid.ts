// Device code grids and display formatting. Sliders snap to these grids so
// every gesture lands on a value the hardware can actually take.

export const AMP_CODE_MAX = 120;
export const VOLTS_PER_STEP = 0.05;
export const DELAY_CODE_SPAN = 150;
export const DELAY_STEP_NS = 0.1;

function clamp(value: number, lo: number, hi: number): number {
    return Math.min(Math.max(value, lo), hi);
}

/** Nearest amplitude code for a voltage; midpoints round up. */
export function snapAmplitudeCode(volts: number): number {
    const code = Math.floor(volts * 20.0 + 0.5);
    return clamp(code, 0, AMP_CODE_MAX);
}

/** Nearest delay code for a delay in nanoseconds. */
export function snapDelayCode(ns: number): number {
    const code = Math.floor(ns * 10.0 + 0.5);
    return clamp(code, -DELAY_CODE_SPAN, DELAY_CODE_SPAN);
}

export function codeToVolts(code: number): number {
    return code * VOLTS_PER_STEP;
}

export function codeToNs(code: number): number {
    return code / 10.0;
}

/** Delay codes travel offset by +150 so the wire payload stays unsigned. */
export function delayCodeToPayload(code: number): number {
    return code + DELAY_CODE_SPAN;
}

export function formatVolts(volts: number): string {
    return `${volts.toFixed(3)} V`;
}

/** Seconds with an auto-picked ns/ps/us unit, 4 significant digits. */
export function formatSeconds(seconds: number | null): string {
    if (seconds === null || !isFinite(seconds)) {
        return "—";
    }
    const magnitude = Math.abs(seconds);
    // Thresholds sit just under each unit so values that ROUND to 1.000 of
    // the larger unit use it (0.99999 ns must not print as 1000 ps).
    if (magnitude >= 0.99995e-6) {
        return `${(seconds * 1e6).toPrecision(4)} us`;
    }
    if (magnitude >= 0.99995e-9) {
        return `${(seconds * 1e9).toPrecision(4)} ns`;
    }
    if (magnitude === 0) {
        return "0.000 ns";
    }
    return `${(seconds * 1e12).toPrecision(4)} ps`;
}
