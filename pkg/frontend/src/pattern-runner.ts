// Pattern runner: the server plans and validates the symbol file, the
// console replays the returned command stream and steps through slots,
// highlighting which outputs fire in each one.

import type { ConsoleStore } from "./store.js";
import type { PlanResult } from "./types.js";

export interface RunnerSnapshot {
    loaded: boolean;
    uploaded: boolean;
    slotCount: number;
    currentSlot: number;
    symbol: string | null;
    firingWires: number[];
    error: string | null;
    running: boolean;
}

export class PatternRunner {
    plan: PlanResult | null = null;
    currentSlot = 0;
    uploaded = false;
    error: string | null = null;
    private timer: ReturnType<typeof setInterval> | null = null;

    constructor(private readonly store: ConsoleStore,
                private readonly api: { plan(text: string): Promise<PlanResult> }) {}

    snapshot(): RunnerSnapshot {
        const slot = this.plan?.slots[this.currentSlot] ?? null;
        return {
            loaded: this.plan !== null,
            uploaded: this.uploaded,
            slotCount: this.plan?.slots.length ?? 0,
            currentSlot: this.currentSlot,
            symbol: slot?.symbol ?? null,
            firingWires: slot ? slot.firings.map((f) => f.wire_index) : [],
            error: this.error,
            running: this.timer !== null,
        };
    }

    /** Ask the server to plan the file; rejection surfaces per-symbol. */
    async load(symbolsText: string): Promise<boolean> {
        this.stop();
        this.error = null;
        this.uploaded = false;
        this.currentSlot = 0;
        try {
            this.plan = await this.api.plan(symbolsText);
            return true;
        } catch (err) {
            this.plan = null;
            this.error = err instanceof Error ? err.message : String(err);
            return false;
        }
    }

    /** Replay the upload stream through the command endpoint. */
    async upload(): Promise<boolean> {
        if (!this.plan) return false;
        this.error = null;
        for (const command of this.plan.commands) {
            const result = await this.store.sendCommand(command);
            if (result.status !== "ack") {
                this.error = `${command.opcode} rejected: ${result.reason}`;
                return false;
            }
        }
        this.uploaded = true;
        return true;
    }

    step(direction: 1 | -1 = 1): void {
        if (!this.plan || this.plan.slots.length === 0) return;
        const n = this.plan.slots.length;
        this.currentSlot = (this.currentSlot + direction + n) % n;
    }

    freeRun(periodMs = 500): void {
        if (this.timer !== null || !this.plan) return;
        this.timer = setInterval(() => this.step(1), periodMs);
    }

    stop(): void {
        if (this.timer !== null) {
            clearInterval(this.timer);
            this.timer = null;
        }
    }
}
