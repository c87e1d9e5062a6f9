// Per-channel control logic. A slider gesture commits once on release,
// which issues exactly one command; the displayed value stays on the
// server-confirmed setting until the ACK (and the state event) land.

import { codeToNs, codeToVolts, delayCodeToPayload, formatVolts } from "./grid.js";
import type { ConsoleStore } from "./store.js";

export interface PanelSnapshot {
    label: string;
    enabled: boolean;
    confirmedAmplitude: number;  // codes
    confirmedDelay: number;
    amplitudeText: string;       // server-confirmed readout
    delayText: string;
    pendingAmplitude: number | null;  // optimistic, awaiting ACK
    pendingDelay: number | null;
    error: string | null;
    controlsEnabled: boolean;
}

export class ChannelPanel {
    error: string | null = null;

    constructor(
        private readonly store: ConsoleStore,
        readonly wireIndex: number,
    ) {}

    snapshot(): PanelSnapshot {
        const channel = this.store.channel(this.wireIndex);
        const pendingAmp = this.store.pendingFor(this.wireIndex, "SetAmplitude");
        const pendingDelay = this.store.pendingFor(this.wireIndex, "SetDelay");
        return {
            label: channel?.label ?? `#${this.wireIndex}`,
            enabled: channel?.enabled ?? false,
            confirmedAmplitude: channel?.amplitude ?? 0,
            confirmedDelay: channel?.delay ?? 0,
            amplitudeText: formatVolts(codeToVolts(channel?.amplitude ?? 0)),
            delayText: `${codeToNs(channel?.delay ?? 0).toFixed(1)} ns`,
            pendingAmplitude: pendingAmp ? pendingAmp.body.payload : null,
            pendingDelay:
                pendingDelay ? pendingDelay.body.payload - 150 : null,
            error: this.error,
            controlsEnabled: this.store.connection === "connected",
        };
    }

    /** Commit an amplitude gesture: one SetAmplitude command. */
    async commitAmplitude(code: number): Promise<void> {
        this.error = null;
        try {
            const result = await this.store.sendCommand({
                opcode: "SetAmplitude",
                channel: this.wireIndex,
                payload: code,
            });
            if (result.status !== "ack") {
                this.error = `amplitude rejected: ${result.reason}`;
            }
        } catch (err) {
            this.error = err instanceof Error ? err.message : String(err);
        }
    }

    /** Commit a delay gesture: one SetDelay command (offset encoding). */
    async commitDelay(code: number): Promise<void> {
        this.error = null;
        try {
            const result = await this.store.sendCommand({
                opcode: "SetDelay",
                channel: this.wireIndex,
                payload: delayCodeToPayload(code),
            });
            if (result.status !== "ack") {
                this.error = `delay rejected: ${result.reason}`;
            }
        } catch (err) {
            this.error = err instanceof Error ? err.message : String(err);
        }
    }

    async toggleEnabled(): Promise<void> {
        const current = this.store.channel(this.wireIndex)?.enabled ?? false;
        await this.store.sendCommand({
            opcode: "SetEnable",
            channel: this.wireIndex,
            payload: current ? 0 : 1,
        });
    }
}
