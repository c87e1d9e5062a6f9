// Scripted console acceptance: gestures issue exactly one command apiece,
// readouts are the server's values at display precision, and reconnecting
// resyncs the mirror to the server.

import { describe, expect, it } from "vitest";

import { ChannelPanel } from "../src/channel-panel.js";
import { formatSeconds, formatVolts } from "../src/grid.js";
import { readoutsFor } from "../src/scope-view.js";
import { ConsoleStore } from "../src/store.js";
import { FakeServer } from "./fake-server.js";

function connectedStore(server: FakeServer): ConsoleStore {
    const store = new ConsoleStore(server);
    store.onStatus("connected");
    store.onEvent(server.helloEvent());
    return store;
}

describe("scripted tuning session", () => {
    it("amplitude 37 and delay -100 issue exactly two commands", async () => {
        const server = new FakeServer();
        const store = connectedStore(server);
        const panel = new ChannelPanel(store, 0);

        await panel.commitAmplitude(37);
        store.onEvent(server.stateEvent());
        await panel.commitDelay(-100);
        store.onEvent(server.stateEvent());

        expect(server.commands).toEqual([
            { opcode: "SetAmplitude", channel: 0, payload: 37 },
            { opcode: "SetDelay", channel: 0, payload: 50 },
        ]);
        expect(store.commandLog).toHaveLength(2);
        expect(store.commandLog.every((e) => e.status === "ack")).toBe(true);
        expect(store.commandLog.every((e) => e.latencyMs !== undefined))
            .toBe(true);

        const snap = panel.snapshot();
        expect(snap.confirmedAmplitude).toBe(37);
        expect(snap.confirmedDelay).toBe(-100);
        expect(snap.amplitudeText).toBe("1.850 V");
        expect(snap.delayText).toBe("-10.0 ns");
        expect(snap.pendingAmplitude).toBeNull();
        expect(snap.pendingDelay).toBeNull();
    });

    it("rendered readouts equal the server report at display precision",
       async () => {
        const server = new FakeServer();
        const store = connectedStore(server);
        const capture = await store.requestCapture(0);

        const rendered = readoutsFor(store.captures.get(0)!);
        expect(rendered.vpp).toBe(formatVolts(capture.report.vpp));
        expect(rendered.rise).toBe(formatSeconds(capture.report.rise_time_10_90));
        expect(rendered.width)
            .toBe(formatSeconds(capture.report.pulse_width_fwhm));
        expect(rendered.vpp).toBe("1.850 V");
        expect(rendered.rise).toBe("1.000 ns");
        expect(rendered.width).toBe("10.02 ns");
        expect(rendered.delay).toBe("—");
    });

    it("NAK reverts to the confirmed value and surfaces inline", async () => {
        const server = new FakeServer();
        const store = connectedStore(server);
        const panel = new ChannelPanel(store, 2);

        await panel.commitAmplitude(60);
        store.onEvent(server.stateEvent());
        // Hand-built out-of-range gesture (sliders cannot produce it).
        await panel.commitAmplitude(121);
        store.onEvent(server.stateEvent());

        const snap = panel.snapshot();
        expect(snap.error).toContain("RANGE_VIOLATION");
        expect(snap.confirmedAmplitude).toBe(60);
        expect(store.commandLog).toHaveLength(2);
        expect(store.commandLog[1].status).toBe("nak");
    });

    it("disconnect disables controls", () => {
        const server = new FakeServer();
        const store = connectedStore(server);
        const panel = new ChannelPanel(store, 0);
        expect(panel.snapshot().controlsEnabled).toBe(true);
        store.onStatus("disconnected");
        expect(panel.snapshot().controlsEnabled).toBe(false);
    });
});

describe("event stream resync", () => {
    it("replay after reconnect converges to server state", async () => {
        const server = new FakeServer();
        const store = connectedStore(server);

        await store.sendCommand({ opcode: "SetAmplitude", channel: 1,
                                  payload: 20 });
        store.onEvent(server.stateEvent());
        expect(store.channel(1)?.amplitude).toBe(20);

        // Connection drops; the device moves on without us.
        store.onStatus("disconnected");
        server.deviceState.channels[1].amplitude = 99;
        server.deviceState.channels[5].enabled = true;
        server.deviceState.armed = true;

        // Reconnect: the hello snapshot replaces the stale mirror.
        store.onStatus("connected");
        store.onEvent(server.helloEvent());

        expect(store.mirrored).toEqual(server.deviceState);
        expect(store.channel(1)?.amplitude).toBe(99);
        expect(store.channel(5)?.enabled).toBe(true);
    });

    it("events apply in order", () => {
        const server = new FakeServer();
        const store = connectedStore(server);
        server.deviceState.channels[0].amplitude = 10;
        store.onEvent(server.stateEvent());
        server.deviceState.channels[0].amplitude = 30;
        store.onEvent(server.stateEvent());
        expect(store.channel(0)?.amplitude).toBe(30);
        expect(store.lastEventSeq).toBe(2);
    });

    it("malformed events are dropped without crashing", () => {
        const server = new FakeServer();
        const store = connectedStore(server);
        const before = store.mirrored;
        // deliberately malformed payloads
        store.onEvent({} as never);
        store.onEvent({ seq: 9, type: "state" } as never);
        store.onEvent({ seq: 10, type: "meteor" } as never);
        expect(store.droppedEvents).toBe(3);
        expect(store.mirrored).toEqual(before);
    });
});
