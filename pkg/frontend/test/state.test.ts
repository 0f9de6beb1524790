import { describe, expect, it } from "vitest";

import { PendingEditsError, ViewState } from "../src/state.js";
import type { QueueEntry } from "../src/types.js";

function entry(id: string, rank: number): QueueEntry {
  return {
    id,
    kind: "false_negative",
    score: 0.1 * rank,
    rank,
    tags_so_far: [],
    meta: {},
  };
}

const QUEUE = [entry("a", 0), entry("b", 1), entry("c", 2)];

describe("ViewState", () => {
  it("keeps the cursor inside queue bounds", () => {
    const state = new ViewState();
    state.setQueue(QUEUE, "fn", "score_asc");
    expect(state.current()?.id).toBe("a");
    state.prev();
    expect(state.cursor).toBe(0);
    state.next();
    state.next();
    state.next();
    state.next();
    expect(state.cursor).toBe(2);
    expect(state.current()?.id).toBe("c");
  });

  it("handles an empty queue", () => {
    const state = new ViewState();
    state.setQueue([], "fn", "score_asc");
    expect(state.current()).toBeNull();
    expect(state.next()).toBeNull();
    expect(state.cursor).toBe(0);
  });

  it("refuses navigation while edits are pending", () => {
    const state = new ViewState();
    state.setQueue(QUEUE, "fn", "score_asc");
    state.beginEdit({ id: "a", tag: "x", action: "add" });
    expect(() => state.next()).toThrow(PendingEditsError);
    expect(() => state.setQueue(QUEUE, "fn", "score_desc")).toThrow(PendingEditsError);
    state.settleEdit({ id: "a", tag: "x", action: "add" });
    expect(state.next()?.id).toBe("b");
  });

  it("discarding edits re-enables navigation", () => {
    const state = new ViewState();
    state.setQueue(QUEUE, "fn", "score_asc");
    state.beginEdit({ id: "a", tag: "x", action: "add" });
    const dropped = state.discardEdits();
    expect(dropped).toHaveLength(1);
    expect(state.next()?.id).toBe("b");
  });

  it("keeps the selected record across queue refreshes when possible", () => {
    const state = new ViewState();
    state.setQueue(QUEUE, "fn", "score_asc");
    state.next();
    expect(state.current()?.id).toBe("b");
    state.setQueue([entry("c", 0), entry("b", 1)], "fn", "score_desc");
    expect(state.current()?.id).toBe("b");
    state.setQueue([entry("x", 0)], "fn", "score_asc");
    expect(state.current()?.id).toBe("x");
  });
});
