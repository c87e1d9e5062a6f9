// HTTP transport and reconnecting event stream for the control API.
// The console never encodes protocol frames itself; everything goes
// through these endpoints.

import type {
    ApiTransport,
    CaptureResult,
    CommandBody,
    CommandResult,
    ConsoleEvent,
    DeviceStateView,
    PlanResult,
} from "./types.js";

export class ApiError extends Error {
    constructor(readonly status: number, detail: string) {
        super(detail);
    }
}

async function requestJson<T>(url: string, init?: RequestInit): Promise<T> {
    const response = await fetch(url, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
        const detail =
            typeof (body as { detail?: unknown }).detail === "string"
                ? (body as { detail: string }).detail
                : `HTTP ${response.status}`;
        throw new ApiError(response.status, detail);
    }
    return body as T;
}

export class HttpApiClient implements ApiTransport {
    constructor(private readonly baseUrl: string) {}

    state(): Promise<DeviceStateView> {
        return requestJson(`${this.baseUrl}/state`);
    }

    command(body: CommandBody): Promise<CommandResult> {
        return requestJson(`${this.baseUrl}/command`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        });
    }

    capture(channel: number | string, includeSamples = true): Promise<CaptureResult> {
        return requestJson(`${this.baseUrl}/capture`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ channel, include_samples: includeSamples }),
        });
    }

    plan(symbolsText: string): Promise<PlanResult> {
        return requestJson(`${this.baseUrl}/plan`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ symbols: symbolsText }),
        });
    }
}

export type StreamStatus = "connecting" | "connected" | "disconnected";

export interface EventSink {
    onEvent(event: ConsoleEvent): void;
    onStatus(status: StreamStatus): void;
}

/** WebSocket wrapper that resubscribes (and thus resyncs) after drops. */
export class EventStream {
    private socket: WebSocket | null = null;
    private closed = false;
    private retryMs = 500;

    constructor(
        private readonly url: string,
        private readonly sink: EventSink,
        private readonly makeSocket: (url: string) => WebSocket =
            (u) => new WebSocket(u),
    ) {}

    connect(): void {
        if (this.closed) return;
        this.sink.onStatus("connecting");
        const socket = this.makeSocket(this.url);
        this.socket = socket;
        socket.onopen = () => {
            this.retryMs = 500;
            this.sink.onStatus("connected");
        };
        socket.onmessage = (message: MessageEvent) => {
            let parsed: unknown;
            try {
                parsed = JSON.parse(String(message.data));
            } catch {
                console.warn("events: dropping unparseable message");
                return;
            }
            this.sink.onEvent(parsed as ConsoleEvent);
        };
        socket.onclose = () => {
            this.sink.onStatus("disconnected");
            if (!this.closed) {
                setTimeout(() => this.connect(), this.retryMs);
                this.retryMs = Math.min(this.retryMs * 2, 8000);
            }
        };
        socket.onerror = () => socket.close();
    }

    close(): void {
        this.closed = true;
        this.socket?.close();
    }
}
