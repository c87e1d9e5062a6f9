// DOM wiring for the operator console. All state flows through the store;
// this file only renders snapshots and forwards gestures.

import { EventStream, HttpApiClient } from "./api.js";
import { ChannelPanel } from "./channel-panel.js";
import { AMP_CODE_MAX, DELAY_CODE_SPAN } from "./grid.js";
import { PatternRunner } from "./pattern-runner.js";
import { drawScope, readoutsFor } from "./scope-view.js";
import { ConsoleStore } from "./store.js";

const base = window.location.origin;
const api = new HttpApiClient(base);
const store = new ConsoleStore(api);
const runner = new PatternRunner(store, api);
const panels: ChannelPanel[] = [];
let scopeChannel = 0;

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) node.className = className;
    if (text !== undefined) node.textContent = text;
    return node;
}

function buildPanels(root: HTMLElement): void {
    for (let wire = 0; wire < 12; wire++) {
        const panel = new ChannelPanel(store, wire);
        panels.push(panel);
        const box = el("div", "panel");
        box.id = `panel-${wire}`;

        const title = el("div", "panel-title");
        const name = el("span", "panel-label", `#${wire}`);
        const enable = el("button", "panel-enable", "off");
        enable.onclick = () => void panel.toggleEnabled();
        const probe = el("button", "panel-probe", "probe");
        probe.onclick = () => {
            scopeChannel = wire;
            void store.requestCapture(wire);
        };
        title.append(name, enable, probe);

        const ampRow = el("div", "panel-row");
        const ampSlider = el("input") as HTMLInputElement;
        ampSlider.type = "range";
        ampSlider.min = "0";
        ampSlider.max = String(AMP_CODE_MAX);
        ampSlider.step = "1";
        ampSlider.onchange = () =>
            void panel.commitAmplitude(Number(ampSlider.value));
        const ampText = el("span", "panel-value");
        ampRow.append(el("span", "panel-caption", "amp"), ampSlider, ampText);

        const delayRow = el("div", "panel-row");
        const delaySlider = el("input") as HTMLInputElement;
        delaySlider.type = "range";
        delaySlider.min = String(-DELAY_CODE_SPAN);
        delaySlider.max = String(DELAY_CODE_SPAN);
        delaySlider.step = "1";
        delaySlider.onchange = () =>
            void panel.commitDelay(Number(delaySlider.value));
        const delayText = el("span", "panel-value");
        delayRow.append(el("span", "panel-caption", "delay"), delaySlider,
                        delayText);

        const errorLine = el("div", "panel-error");
        box.append(title, ampRow, delayRow, errorLine);
        root.append(box);

        store.subscribe(() => {
            const snap = panel.snapshot();
            name.textContent = snap.label;
            enable.textContent = snap.enabled ? "on" : "off";
            enable.classList.toggle("enabled", snap.enabled);
            for (const control of [ampSlider, delaySlider, enable, probe]) {
                (control as HTMLButtonElement | HTMLInputElement).disabled =
                    !snap.controlsEnabled;
            }
            if (document.activeElement !== ampSlider) {
                ampSlider.value = String(snap.pendingAmplitude ??
                                         snap.confirmedAmplitude);
            }
            if (document.activeElement !== delaySlider) {
                delaySlider.value = String(snap.pendingDelay ??
                                           snap.confirmedDelay);
            }
            // Confirmed values only; a pending gesture shows as italic.
            ampText.textContent = snap.amplitudeText;
            delayText.textContent = snap.delayText;
            ampText.classList.toggle("pending", snap.pendingAmplitude !== null);
            delayText.classList.toggle("pending", snap.pendingDelay !== null);
            errorLine.textContent = snap.error ?? "";
            box.classList.toggle(
                "firing",
                runner.snapshot().firingWires.includes(wire),
            );
        });
    }
}

function buildScope(): void {
    const canvas = document.getElementById("scope") as HTMLCanvasElement;
    const readout = document.getElementById("readouts")!;
    store.subscribe(() => {
        const capture = store.captures.get(scopeChannel) ?? null;
        drawScope(canvas, capture);
        readout.replaceChildren();
        if (!capture) {
            readout.append(el("span", "readout", "no capture yet"));
            return;
        }
        const values = readoutsFor(capture);
        readout.append(
            el("span", "readout", `${values.label}`),
            el("span", "readout", `Vpp ${values.vpp}`),
            el("span", "readout", `rise ${values.rise}`),
            el("span", "readout", `width ${values.width}`),
            el("span", "readout", `delay ${values.delay}`),
        );
        for (const flag of values.flags) {
            readout.append(el("span", "readout flag", flag));
        }
    });
}

function buildRunner(): void {
    const fileInput = document.getElementById("symbols") as HTMLInputElement;
    const loadBtn = document.getElementById("plan-load") as HTMLButtonElement;
    const uploadBtn = document.getElementById("plan-upload") as HTMLButtonElement;
    const stepBtn = document.getElementById("plan-step") as HTMLButtonElement;
    const runBtn = document.getElementById("plan-run") as HTMLButtonElement;
    const status = document.getElementById("plan-status")!;

    const refresh = () => {
        const snap = runner.snapshot();
        status.textContent = snap.error
            ? snap.error
            : snap.loaded
              ? `slot ${snap.currentSlot + 1}/${snap.slotCount}` +
                (snap.symbol ? ` (${snap.symbol})` : "") +
                (snap.uploaded ? " — uploaded" : "")
              : "no plan loaded";
        runBtn.textContent = snap.running ? "stop" : "free-run";
        store.onStatus(store.connection);  // repaint panels for highlights
    };

    loadBtn.onclick = async () => {
        const file = fileInput.files?.[0];
        if (!file) return;
        await runner.load(await file.text());
        refresh();
    };
    uploadBtn.onclick = async () => {
        await runner.upload();
        refresh();
    };
    stepBtn.onclick = () => {
        runner.step(1);
        refresh();
    };
    runBtn.onclick = () => {
        if (runner.snapshot().running) runner.stop();
        else runner.freeRun();
        refresh();
    };
}

function buildStatusBar(): void {
    const banner = document.getElementById("connection")!;
    const log = document.getElementById("command-log")!;
    store.subscribe(() => {
        banner.textContent = store.connection;
        banner.className = `connection ${store.connection}`;
        const entries = store.commandLog.slice(-8).reverse();
        log.replaceChildren(
            ...entries.map((entry) => {
                const latency =
                    entry.latencyMs !== undefined
                        ? ` ${entry.latencyMs.toFixed(0)} ms`
                        : "";
                return el(
                    "div",
                    `log-entry ${entry.status}`,
                    `${entry.body.opcode}(${entry.body.channel ?? "*"}, ` +
                        `${entry.body.payload}) ${entry.status}${latency}`,
                );
            }),
        );
    });
}

function boot(): void {
    buildPanels(document.getElementById("panels")!);
    buildScope();
    buildRunner();
    buildStatusBar();
    const wsUrl = base.replace(/^http/, "ws") + "/events";
    new EventStream(wsUrl, store).connect();
}

document.addEventListener("DOMContentLoaded", boot);
