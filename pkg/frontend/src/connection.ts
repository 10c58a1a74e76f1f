// Service connection: telemetry WebSocket with reconnect/backoff and the
// command POST path. The browser console and the scripted test client both
// speak exactly this contract.

import type { Command, CommandAck, SessionState, TelemetryMessage } from "./types";

export interface ConnectionCallbacks {
  onTelemetry: (message: TelemetryMessage) => void;
  onStatus: (status: "connecting" | "live" | "stale" | "closed") => void;
}

export class ServiceConnection {
  readonly baseUrl: string;
  readonly clientId: string;
  private ws: WebSocket | null = null;
  private closed = false;
  private retryMs = 500;
  private staleTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(baseUrl: string, private callbacks: ConnectionCallbacks) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.clientId = `console-${Math.random().toString(36).slice(2, 10)}`;
  }

  get wsUrl(): string {
    return this.baseUrl.replace(/^http/, "ws") + "/telemetry";
  }

  connect(): void {
    this.callbacks.onStatus("connecting");
    this.ws = new WebSocket(this.wsUrl);
    this.ws.onopen = () => {
      this.retryMs = 500;
    };
    this.ws.onmessage = (event) => {
      try {
        const message = JSON.parse(event.data) as TelemetryMessage;
        this.callbacks.onTelemetry(message);
        this.callbacks.onStatus("live");
        this.armStaleTimer();
      } catch {
        // non-JSON frames are ignored
      }
    };
    this.ws.onclose = () => {
      if (this.staleTimer) clearTimeout(this.staleTimer);
      if (this.closed) {
        this.callbacks.onStatus("closed");
        return;
      }
      this.callbacks.onStatus("stale");
      setTimeout(() => this.connect(), this.retryMs);
      this.retryMs = Math.min(this.retryMs * 2, 8000);
    };
  }

  private armStaleTimer(): void {
    if (this.staleTimer) clearTimeout(this.staleTimer);
    // Telemetry arrives at 50 Hz; a second of silence means trouble.
    this.staleTimer = setTimeout(() => this.callbacks.onStatus("stale"), 1000);
  }

  close(): void {
    this.closed = true;
    if (this.staleTimer) clearTimeout(this.staleTimer);
    this.ws?.close();
  }

  async sendCommand(command: Command, sequence: number): Promise<CommandAck> {
    const response = await fetch(`${this.baseUrl}/command`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        ...command,
        client_id: this.clientId,
        sequence_number: sequence,
      }),
    });
    return (await response.json()) as CommandAck;
  }

  async fetchState(): Promise<SessionState> {
    const response = await fetch(`${this.baseUrl}/state`);
    return (await response.json()) as SessionState;
  }

  async fetchPresets(): Promise<string[]> {
    const response = await fetch(`${this.baseUrl}/presets`);
    return ((await response.json()) as { presets: string[] }).presets;
  }

  frameUrl(): string {
    return `${this.baseUrl}/frame?ts=${Date.now()}`;
  }
}
