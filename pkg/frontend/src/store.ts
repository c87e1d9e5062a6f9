// Single-writer console state. User actions enqueue commands through the
// transport; the mirrored device state only ever changes from server
// events (hello snapshots and ordered state events), so what the panels
// display is always server-confirmed.

import type {
    ApiTransport,
    CaptureResult,
    CommandBody,
    CommandResult,
    ConsoleEvent,
    DeviceStateView,
} from "./types.js";
import type { StreamStatus } from "./api.js";

export interface CommandLogEntry {
    id: number;
    body: CommandBody;
    status: "pending" | "ack" | "nak" | "error";
    reason?: string;
    latencyMs?: number;
}

export type StoreListener = () => void;

export class ConsoleStore {
    mirrored: DeviceStateView | null = null;
    connection: StreamStatus = "disconnected";
    commandLog: CommandLogEntry[] = [];
    captures = new Map<number, CaptureResult>();
    lastEventSeq = 0;
    droppedEvents = 0;

    private nextId = 1;
    private listeners: StoreListener[] = [];

    constructor(private readonly api: ApiTransport, private readonly now: () => number = () => Date.now()) {}

    subscribe(listener: StoreListener): () => void {
        this.listeners.push(listener);
        return () => {
            this.listeners = this.listeners.filter((l) => l !== listener);
        };
    }

    private notify(): void {
        for (const listener of this.listeners) listener();
    }

    /** Server-confirmed settings for one channel, if known. */
    channel(wireIndex: number) {
        return this.mirrored?.channels[wireIndex] ?? null;
    }

    pendingFor(wireIndex: number, opcode: string): CommandLogEntry | null {
        for (let i = this.commandLog.length - 1; i >= 0; i--) {
            const entry = this.commandLog[i];
            if (
                entry.status === "pending" &&
                entry.body.opcode === opcode &&
                entry.body.channel === wireIndex
            ) {
                return entry;
            }
        }
        return null;
    }

    /** Issue exactly one command; the log entry tracks its round trip. */
    async sendCommand(body: CommandBody): Promise<CommandResult> {
        const entry: CommandLogEntry = {
            id: this.nextId++,
            body,
            status: "pending",
        };
        this.commandLog.push(entry);
        this.notify();
        const started = this.now();
        try {
            const result = await this.api.command(body);
            entry.latencyMs = this.now() - started;
            entry.status = result.status;
            entry.reason = result.reason;
            this.notify();
            return result;
        } catch (err) {
            entry.latencyMs = this.now() - started;
            entry.status = "error";
            entry.reason = err instanceof Error ? err.message : String(err);
            this.notify();
            throw err;
        }
    }

    async requestCapture(channel: number | string): Promise<CaptureResult> {
        const capture = await this.api.capture(channel);
        this.captures.set(capture.channel, capture);
        this.notify();
        return capture;
    }

    onStatus(status: StreamStatus): void {
        this.connection = status;
        this.notify();
    }

    /** Apply one event from the stream; malformed ones are dropped. */
    onEvent(event: ConsoleEvent): void {
        if (!event || typeof event !== "object" || !("type" in event)) {
            console.warn("events: dropping malformed event", event);
            this.droppedEvents++;
            return;
        }
        switch (event.type) {
            case "hello":
            case "state":
                if (!event.state || !Array.isArray(event.state.channels)) {
                    console.warn("events: dropping state event without state");
                    this.droppedEvents++;
                    return;
                }
                this.mirrored = event.state;
                break;
            case "capture":
                if (typeof event.channel !== "number" || !event.report) {
                    console.warn("events: dropping malformed capture event");
                    this.droppedEvents++;
                    return;
                }
                this.captures.set(event.channel, event);
                break;
            default:
                console.warn("events: dropping unknown event type", event);
                this.droppedEvents++;
                return;
        }
        this.lastEventSeq = event.seq;
        this.notify();
    }
}
