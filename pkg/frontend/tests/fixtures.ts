import type { SnapshotMessage } from "../src/protocol.js";

export function makeSnapshot(overrides: Partial<SnapshotMessage> = {}): SnapshotMessage {
  return {
    protocol: 1,
    kind: "snapshot",
    session: "abc123",
    phase: "swarm-settling",
    k: 0,
    guess: 31,
    guess_polygon: {
      center: [0.75, 0.5],
      n_sides: 3,
      radius: 0.3,
      vertices: [
        [0.75, 0.8],
        [0.49, 0.35],
        [1.01, 0.35],
      ],
    },
    target: 42,
    target_polygon: {
      center: [0.4, 0.4],
      n_sides: 4,
      radius: 0.3,
      vertices: [
        [0.4, 0.7],
        [0.1, 0.4],
        [0.4, 0.1],
        [0.7, 0.4],
      ],
    },
    posterior: Array(60).fill(1 / 60),
    posterior_topk: null,
    estimate: null,
    converged: null,
    robots: [
      [0.2, 0.3, 0.0],
      [0.8, 0.7, 1.2],
    ],
    arena: { width: 1.5, height: 1.0 },
    ...overrides,
  };
}
