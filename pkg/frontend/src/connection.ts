/**
 * Connection driver: handshake (server hello -> client hello -> join), message
 * journal for reconnect restore, and a one-retry send queue for transient
 * socket failures.
 */

import {
  ClientMessage,
  ServerMessage,
  PROTOCOL_VERSION,
  decodeServer,
} from "./protocol.js";
import { ViewState, initialState, reduce, restoreFromJournal } from "./state.js";

/** The subset of WebSocket the client uses; injectable for tests and node. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((err: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ConnectionEvents {
  onState?: (state: ViewState) => void;
  onRetryPrompt?: (reason: string) => void;
  onSent?: (message: ClientMessage) => void;
}

export class GameConnection {
  state: ViewState = initialState();
  readonly journal: ServerMessage[] = [];
  readonly sent: ClientMessage[] = [];
  private socket: SocketLike | null = null;
  private pendingRetry: ClientMessage | null = null;
  private outSeq = 0;
  private events: ConnectionEvents;

  constructor(
    private url: string,
    private socketFactory: SocketFactory,
    events: ConnectionEvents = {},
  ) {
    this.events = events;
  }

  connect(): void {
    const socket = this.socketFactory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      if (this.pendingRetry !== null) {
        const queued = this.pendingRetry;
        this.pendingRetry = null;
        this.send(queued);
      }
    };
    socket.onmessage = (event) => {
      this.handleRaw(String(event.data));
    };
    socket.onclose = () => {
      if (this.state.ended === null) {
        this.events.onRetryPrompt?.("connection lost; reconnect to continue");
      }
    };
    socket.onerror = () => {
      /* onclose carries the user-facing signal */
    };
  }

  /** Apply one raw server frame: decode, journal, reduce, notify. */
  handleRaw(raw: string): void {
    const message = decodeServer(raw);
    this.journal.push(message);
    if (message.type === "hello") {
      this.send({ type: "hello", version: PROTOCOL_VERSION, role: "human" });
      this.send({ type: "join" });
    }
    this.state = reduce(this.state, message);
    this.events.onState?.(this.state);
  }

  /** Send with a single queued retry on transport failure. */
  send(message: ClientMessage): boolean {
    try {
      if (this.socket === null) {
        throw new Error("not connected");
      }
      this.outSeq += 1;
      this.socket.send(JSON.stringify({ ...message, seq: this.outSeq }));
    } catch (err) {
      if (this.pendingRetry === null && message.type === "turn_submit") {
        this.pendingRetry = message;
        this.events.onRetryPrompt?.(String(err));
        return false;
      }
      this.events.onRetryPrompt?.(String(err));
      return false;
    }
    this.sent.push(message);
    this.events.onSent?.(message);
    return true;
  }

  /** Rebuild the view from the journal (used after a reconnect). */
  restore(): void {
    this.state = restoreFromJournal(this.journal);
    this.events.onState?.(this.state);
  }

  close(): void {
    this.socket?.close();
  }
}
