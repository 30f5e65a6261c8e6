// WebSocket connection with reconnect; on drop the view keeps rendering the
// last known state behind an explicit stale banner.

import { helloFrame } from "./protocol.js";
import { ViewState, reduce } from "./state.js";

export interface ConnectionOptions {
  url: string;
  role: "driver" | "observer";
  retryMs?: number;
  onChange?: () => void;
}

export class Connection {
  private ws: WebSocket | null = null;
  private closed = false;
  readonly state: ViewState;

  constructor(state: ViewState, private opts: ConnectionOptions) {
    this.state = state;
  }

  start() {
    this.dial();
  }

  private dial() {
    if (this.closed) return;
    this.state.connection = "connecting";
    this.opts.onChange?.();
    const ws = new WebSocket(this.opts.url);
    this.ws = ws;
    ws.onopen = () => {
      this.state.connection = "open";
      ws.send(helloFrame(this.opts.role));
      this.opts.onChange?.();
    };
    ws.onmessage = (ev: MessageEvent) => {
      reduce(this.state, String(ev.data));
      this.opts.onChange?.();
    };
    ws.onclose = () => {
      if (this.closed) return;
      this.state.connection = "stale"; // keep the last view, flagged
      this.opts.onChange?.();
      setTimeout(() => this.dial(), this.opts.retryMs ?? 1000);
    };
    ws.onerror = () => ws.close();
  }

  send(frame: string) {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(frame);
    }
  }

  stop() {
    this.closed = true;
    this.ws?.close();
  }
}
