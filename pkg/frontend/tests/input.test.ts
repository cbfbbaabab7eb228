// @vitest-environment happy-dom
import { describe, expect, it } from "vitest";

import { attachKeyboard, captureKey, keyToInput } from "../src/input.js";
import type { InputMessage } from "../src/protocol.js";
import { applyMessage, initialState } from "../src/state.js";
import { makeSnapshot } from "./fixtures.js";

describe("key mapping", () => {
  it("maps arrows to binary inputs", () => {
    expect(keyToInput("ArrowLeft")).toBe(0);
    expect(keyToInput("ArrowRight")).toBe(1);
    expect(keyToInput("Enter")).toBeNull();
  });

  it("sends one message per accepted keypress", () => {
    const sent: InputMessage[] = [];
    let state = initialState();
    state = applyMessage(state, makeSnapshot({ phase: "awaiting-input" }));
    const result = captureKey(state, "ArrowLeft", (m) => sent.push(m));
    expect(result).toEqual({ sent: true, suppressed: false });
    expect(sent).toEqual([{ kind: "input", y: 0 }]);
  });

  it("suppresses keys while the swarm settles", () => {
    const sent: InputMessage[] = [];
    let state = initialState();
    state = applyMessage(state, makeSnapshot({ phase: "swarm-settling" }));
    const result = captureKey(state, "ArrowRight", (m) => sent.push(m));
    expect(result).toEqual({ sent: false, suppressed: true });
    expect(sent).toEqual([]);
  });

  it("rapid double press emits exactly two messages", () => {
    // the local phase does not change until the server answers, so both
    // presses pass the local guard; the server phase-guard settles it
    const sent: InputMessage[] = [];
    let state = initialState();
    state = applyMessage(state, makeSnapshot({ phase: "awaiting-input" }));
    captureKey(state, "ArrowRight", (m) => sent.push(m));
    captureKey(state, "ArrowRight", (m) => sent.push(m));
    expect(sent).toHaveLength(2);
  });
});

describe("keyboard wiring", () => {
  it("dispatched KeyboardEvents flow through the DOM listener", () => {
    const sent: InputMessage[] = [];
    let suppressed = 0;
    let state = initialState();
    state = applyMessage(state, makeSnapshot({ phase: "awaiting-input" }));
    attachKeyboard(
      document,
      () => state,
      (m) => sent.push(m),
      () => (suppressed += 1)
    );
    document.dispatchEvent(new KeyboardEvent("keydown", { key: "ArrowRight" }));
    expect(sent).toEqual([{ kind: "input", y: 1 }]);
    state = applyMessage(state, makeSnapshot({ phase: "swarm-settling" }));
    document.dispatchEvent(new KeyboardEvent("keydown", { key: "ArrowLeft" }));
    expect(sent).toHaveLength(1);
    expect(suppressed).toBe(1);
  });
});
