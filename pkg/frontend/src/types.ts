// Shapes of the control-API messages (see docs/control_api_schema.md in
// the repository root). Field names are pinned by the server schema.

export interface ChannelView {
    label: string;
    wire_index: number;
    group: string;
    amplitude: number;   // code 0..120
    delay: number;       // signed code -150..150
    enabled: boolean;
}

export interface DeviceStateView {
    channels: ChannelView[];
    armed: boolean;
    pattern_slots: number | null;
    loading: boolean;
    uptime: number;
}

export interface CommandBody {
    opcode: string;
    channel?: number | string | null;
    payload: number;
}

export interface CommandResult {
    status: "ack" | "nak";
    reason: string;
    opcode_echo: number;
    value: number;
}

export interface WaveformView {
    sample_rate: number;
    t0: number;
    count: number;
    samples: number[] | null;
}

export interface MeasurementReportView {
    vpp: number;
    rise_time_10_90: number | null;
    pulse_width_fwhm: number | null;
    delay_vs_reference: number | null;
    flags: string[];
    notes: string[];
}

export interface CaptureResult {
    channel: number;
    label: string;
    waveform: WaveformView;
    report: MeasurementReportView;
}

export interface PlanFiring {
    label: string;
    wire_index: number;
    amplitude: number;
    delay: number;
    start: number;
    width: number;
}

export interface PlanSlotView {
    index: number;
    symbol: string;
    firings: PlanFiring[];
}

export interface PlanResult {
    slot_period: number;
    slots: PlanSlotView[];
    commands: CommandBody[];
}

export type ConsoleEvent =
    | { seq: number; type: "hello"; state: DeviceStateView }
    | { seq: number; type: "state"; cause: object; state: DeviceStateView }
    | ({ seq: number; type: "capture" } & CaptureResult);

export interface ApiTransport {
    state(): Promise<DeviceStateView>;
    command(body: CommandBody): Promise<CommandResult>;
    capture(channel: number | string, includeSamples?: boolean): Promise<CaptureResult>;
    plan(symbolsText: string): Promise<PlanResult>;
}
