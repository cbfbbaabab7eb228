/** Keyboard capture: arrow keys become binary protocol inputs.
 *
 * Left arrow means "my configuration precedes the guess" (y = 0), right
 * arrow "succeeds or equals" (y = 1). A keypress outside the
 * awaiting-input phase is suppressed locally; the server guard remains
 * the authority when races slip one through.
 */

import type { InputMessage } from "./protocol.js";
import type { ViewState } from "./state.js";

export type SendFn = (message: InputMessage) => void;

export function keyToInput(key: string): 0 | 1 | null {
  if (key === "ArrowLeft") return 0;
  if (key === "ArrowRight") return 1;
  return null;
}

export interface CaptureResult {
  sent: boolean;
  suppressed: boolean;
}

export function captureKey(state: ViewState, key: string, send: SendFn): CaptureResult {
  const y = keyToInput(key);
  if (y === null) return { sent: false, suppressed: false };
  if (!state.inputsEnabled) return { sent: false, suppressed: true };
  send({ kind: "input", y });
  return { sent: true, suppressed: false };
}

export function attachKeyboard(
  target: { addEventListener(type: string, cb: (event: KeyboardEvent) => void): void },
  getState: () => ViewState,
  send: SendFn,
  onSuppressed?: () => void
): void {
  target.addEventListener("keydown", (event: KeyboardEvent) => {
    const result = captureKey(getState(), event.key, send);
    if (result.suppressed && onSuppressed) onSuppressed();
  });
}
