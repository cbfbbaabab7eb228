/** Wire protocol (version 1) shared with the session service. */

export const PROTOCOL_VERSION = 1;

export interface PolygonWire {
  center: [number, number];
  n_sides: number;
  radius: number;
  vertices: [number, number][];
}

export interface SnapshotMessage {
  protocol: number;
  kind: "snapshot";
  session: string;
  phase: "awaiting-input" | "swarm-settling" | "converged" | "timed-out";
  k: number;
  guess: number;
  guess_polygon: PolygonWire;
  target: number | null;
  target_polygon: PolygonWire | null;
  posterior: number[] | null;
  posterior_topk: [number, number][] | null;
  estimate: number | null;
  converged: boolean | null;
  robots: [number, number, number][];
  arena: { width: number; height: number };
}

export interface InputRequestMessage {
  protocol: number;
  kind: "input_request";
  k: number;
}

export interface ConvergedMessage {
  protocol: number;
  kind: "converged";
  j_star: number;
  k_star: number;
  timeout: boolean;
}

export interface ErrorMessage {
  protocol: number;
  kind: "error";
  reason: string;
}

export interface InputMessage {
  kind: "input";
  y: 0 | 1;
}

export type ServerMessage =
  | SnapshotMessage
  | InputRequestMessage
  | ConvergedMessage
  | ErrorMessage;

export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const m = data as Record<string, unknown>;
  if (m.protocol !== PROTOCOL_VERSION) return null;
  switch (m.kind) {
    case "snapshot":
    case "input_request":
    case "converged":
    case "error":
      return data as ServerMessage;
    default:
      return null;
  }
}
