/** Browser entry point: create a session, connect, wire keys and canvas. */

import { SessionClient } from "./client.js";
import { attachKeyboard } from "./input.js";
import { renderArena, renderPosterior, type Draw2D } from "./render.js";
import {
  applyMessage,
  initialState,
  setConnection,
  togglePosterior,
  type ViewState,
} from "./state.js";

const ARENA_LAYOUT = { width: 720, height: 520, margin: 24 };
const POSTERIOR_LAYOUT = { width: 720, height: 140, margin: 12 };

export async function boot(root: Document, serverBase: string): Promise<void> {
  const arenaCanvas = root.getElementById("arena") as HTMLCanvasElement;
  const posteriorCanvas = root.getElementById("posterior") as HTMLCanvasElement;
  const statusLine = root.getElementById("status") as HTMLElement;

  const created = await fetch(`${serverBase}/sessions`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({}),
  }).then((r) => r.json());
  const sessionId: string = created.session;

  let state: ViewState = initialState();
  const wsBase = serverBase.replace(/^http/, "ws");
  const client = new SessionClient(
    `${wsBase}/sessions/${sessionId}/ws`,
    (url) => new WebSocket(url) as never
  );

  const arenaCtx = arenaCanvas.getContext("2d") as unknown as Draw2D;
  const posteriorCtx = posteriorCanvas.getContext("2d") as unknown as Draw2D;

  const redraw = () => {
    renderArena(arenaCtx, state, ARENA_LAYOUT);
    renderPosterior(posteriorCtx, state, POSTERIOR_LAYOUT);
    const bits = [
      `session ${sessionId.slice(0, 8)}`,
      `connection: ${state.connection}`,
      state.lastError ? `server: ${state.lastError}` : "",
      client.queueDepth ? `queued inputs: ${client.queueDepth} (reconnecting)` : "",
      state.result
        ? `${state.result.timeout ? "timed out" : "converged"} at ${state.result.jStar}` +
          ` after ${state.result.kStar} inputs`
        : "",
    ];
    statusLine.textContent = bits.filter(Boolean).join("  |  ");
  };

  client.onMessage = (message) => {
    state = applyMessage(state, message);
    redraw();
  };
  client.onStatus = (status) => {
    state = setConnection(state, status);
    redraw();
  };
  client.onQueueChange = () => redraw();
  client.connect();

  attachKeyboard(
    root as unknown as { addEventListener(type: string, cb: (e: KeyboardEvent) => void): void },
    () => state,
    (message) => client.send(message),
    () => {
      statusLine.textContent = "input suppressed: wait for the swarm to settle";
    }
  );
  root.addEventListener("keydown", (event) => {
    if ((event as KeyboardEvent).key === "p") {
      state = togglePosterior(state);
      redraw();
    }
  });

  redraw();
}

declare const window: { document: Document; location: { origin: string } } | undefined;
if (typeof window !== "undefined" && window?.document?.getElementById("arena")) {
  void boot(window.document, window.location.origin);
}
