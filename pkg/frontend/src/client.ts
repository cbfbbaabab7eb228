/** Session socket wrapper: parse, dispatch, and queue-on-disconnect.
 *
 * Outbound messages sent while the socket is down are queued and flushed
 * on reconnect, with the queue depth surfaced so the UI can warn.
 */

import { parseServerMessage, type InputMessage, type ServerMessage } from "./protocol.js";

export interface SocketLike {
  readyState: number;
  send(data: string): void;
  close(): void;
  addEventListener(type: "open" | "close" | "message", cb: (event: any) => void): void;
}

export type SocketFactory = (url: string) => SocketLike;

const OPEN = 1;

export class SessionClient {
  private socket: SocketLike | null = null;
  private queue: InputMessage[] = [];
  readonly url: string;

  onMessage: (message: ServerMessage) => void = () => {};
  onStatus: (status: "connecting" | "open" | "closed") => void = () => {};
  onQueueChange: (depth: number) => void = () => {};

  constructor(url: string, private factory: SocketFactory) {
    this.url = url;
  }

  connect(): void {
    this.onStatus("connecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.addEventListener("open", () => {
      this.onStatus("open");
      this.flush();
    });
    socket.addEventListener("close", () => {
      this.onStatus("closed");
    });
    socket.addEventListener("message", (event: { data: unknown }) => {
      const message = parseServerMessage(String(event.data));
      if (message) this.onMessage(message);
    });
  }

  get queueDepth(): number {
    return this.queue.length;
  }

  send(message: InputMessage): void {
    if (this.socket && this.socket.readyState === OPEN) {
      this.socket.send(JSON.stringify(message));
    } else {
      this.queue.push(message);
      this.onQueueChange(this.queue.length);
    }
  }

  private flush(): void {
    while (this.queue.length && this.socket && this.socket.readyState === OPEN) {
      const message = this.queue.shift()!;
      this.socket.send(JSON.stringify(message));
    }
    this.onQueueChange(this.queue.length);
  }

  close(): void {
    this.socket?.close();
  }
}
