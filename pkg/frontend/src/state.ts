/** Client view state: a pure fold over server messages.
 *
 * The UI never mutates algorithm state locally; everything rendered comes
 * from the latest snapshot, so replaying a recorded message stream always
 * reproduces the same frames.
 */

import type { ServerMessage, SnapshotMessage } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface ViewState {
  snapshot: SnapshotMessage | null;
  connection: ConnectionStatus;
  inputsEnabled: boolean;
  awaitingSince: number | null; // k at the last input_request
  result: { jStar: number; kStar: number; timeout: boolean } | null;
  lastError: string | null;
  errorCount: number; // monotone, so observers never miss a rejection
  showPosterior: boolean;
  pendingSends: number; // messages queued while disconnected
}

export function initialState(): ViewState {
  return {
    snapshot: null,
    connection: "connecting",
    inputsEnabled: false,
    awaitingSince: null,
    result: null,
    lastError: null,
    errorCount: 0,
    // posterior panel defaults off in practice mode; toggled by the user
    showPosterior: false,
    pendingSends: 0,
  };
}

export function applyMessage(state: ViewState, message: ServerMessage): ViewState {
  switch (message.kind) {
    case "snapshot":
      return {
        ...state,
        snapshot: message,
        inputsEnabled: message.phase === "awaiting-input",
        lastError: null,
      };
    case "input_request":
      return { ...state, inputsEnabled: true, awaitingSince: message.k };
    case "converged":
      return {
        ...state,
        inputsEnabled: false,
        result: { jStar: message.j_star, kStar: message.k_star, timeout: message.timeout },
      };
    case "error":
      // server rejections leave every local field untouched except the notice
      return { ...state, lastError: message.reason, errorCount: state.errorCount + 1 };
  }
}

export function setConnection(state: ViewState, connection: ConnectionStatus): ViewState {
  return { ...state, connection, inputsEnabled: state.inputsEnabled && connection === "open" };
}

export function togglePosterior(state: ViewState): ViewState {
  return { ...state, showPosterior: !state.showPosterior };
}
