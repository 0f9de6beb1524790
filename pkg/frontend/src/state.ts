// Client-side review state. The server is the source of truth for all data;
// this only tracks where the auditor is in the queue and which tag edits are
// still in flight. Invariants: the cursor stays inside queue bounds, and
// navigation is refused while edits are pending (flush or discard first).

import type { Finding, QueueEntry, QueueKind, QueueOrder, Report } from "./types.js";

export interface PendingEdit {
  id: string;
  tag: string;
  action: "add" | "remove";
}

export class PendingEditsError extends Error {
  constructor() {
    super("pending tag edits must be flushed or discarded before navigating");
  }
}

export class ViewState {
  kind: QueueKind = "fn";
  order: QueueOrder = "score_asc";
  queue: QueueEntry[] = [];
  cursor = 0;
  pending: PendingEdit[] = [];
  report: Report | null = null;
  finding: Finding | null = null;
  strataAvailable = true;

  current(): QueueEntry | null {
    return this.queue.length ? this.queue[this.cursor] : null;
  }

  setQueue(entries: QueueEntry[], kind: QueueKind, order: QueueOrder): void {
    if (this.pending.length) {
      throw new PendingEditsError();
    }
    const previous = this.current()?.id;
    this.queue = entries;
    this.kind = kind;
    this.order = order;
    // keep the selection on the same record across refreshes when possible
    const kept = previous ? entries.findIndex((e) => e.id === previous) : -1;
    this.cursor = kept >= 0 ? kept : 0;
    this.clampCursor();
  }

  next(): QueueEntry | null {
    if (this.pending.length) {
      throw new PendingEditsError();
    }
    this.cursor = Math.min(this.cursor + 1, Math.max(this.queue.length - 1, 0));
    return this.current();
  }

  prev(): QueueEntry | null {
    if (this.pending.length) {
      throw new PendingEditsError();
    }
    this.cursor = Math.max(this.cursor - 1, 0);
    return this.current();
  }

  beginEdit(edit: PendingEdit): void {
    this.pending.push(edit);
  }

  settleEdit(edit: PendingEdit): void {
    this.pending = this.pending.filter(
      (p) => !(p.id === edit.id && p.tag === edit.tag && p.action === edit.action),
    );
  }

  discardEdits(): PendingEdit[] {
    const dropped = this.pending;
    this.pending = [];
    return dropped;
  }

  private clampCursor(): void {
    this.cursor = Math.min(Math.max(this.cursor, 0), Math.max(this.queue.length - 1, 0));
  }
}
