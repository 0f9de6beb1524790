// Workbench entry point: wires the API client, review state and renderers.
// The server owns all data; every refresh re-fetches rather than mutating
// local copies, so a page reload always reproduces the same view.

import { ApiClient, ApiRequestError } from "./api.js";
import { ViewState } from "./state.js";
import type { QueueKind, QueueOrder, SchemaInfo, TagAction } from "./types.js";
import {
  queueCardView,
  reportView,
  rocPaths,
  strataView,
  toggleEdits,
} from "./viewmodel.js";
import {
  renderCard,
  renderQueue,
  renderReport,
  renderRoc,
  renderStrata,
  renderTagPanel,
  toast,
} from "./render.js";

const client = new ApiClient("");
const state = new ViewState();
let schema: SchemaInfo | null = null;
let author = "auditor";

function $(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node;
}

function renderAll(): void {
  renderQueue($("queue"), state.queue, state.cursor, (index) => {
    state.cursor = index;
    renderCaseViews();
  });
  renderCaseViews();
  if (state.report) {
    const view = reportView(state.report);
    renderReport($("report"), view);
    renderRoc($("roc"), rocPaths(state.report, 260, 260));
  }
  renderStrata(
    $("strata"),
    state.strataAvailable ? strataView(state.finding) : strataView(null),
  );
}

function renderCaseViews(): void {
  const entry = state.current();
  renderCard($("card"), entry ? queueCardView(entry) : null);
  if (schema && entry) {
    renderTagPanel($("tags"), schema, entry.tags_so_far, (axisName, tag) => {
      void applyToggle(axisName, tag);
    });
  } else {
    $("tags").replaceChildren();
  }
  $("position").textContent = state.queue.length
    ? `${state.cursor + 1} / ${state.queue.length}`
    : "0 / 0";
}

async function refreshQueue(): Promise<void> {
  const response = await client.queue(state.kind, state.order);
  state.setQueue(response.entries, state.kind, state.order);
}

async function refreshAnalytics(): Promise<void> {
  state.report = await client.report();
  state.finding = await client.strata();
  state.strataAvailable = state.finding !== null;
}

async function refreshAll(): Promise<void> {
  await refreshQueue();
  await refreshAnalytics();
  renderAll();
}

/** Optimistic tag toggle: chips update immediately, roll back on failure. */
async function applyToggle(axisName: string, tag: string): Promise<void> {
  const entry = state.current();
  if (!entry || !schema) {
    return;
  }
  const axis = schema.axes.find((a) => a.name === axisName);
  if (!axis) {
    return;
  }
  const edits = toggleEdits(axis, entry.tags_so_far, tag);
  const before = [...entry.tags_so_far];

  // optimistic view
  for (const edit of edits) {
    if (edit.action === "add") {
      entry.tags_so_far.push(edit.tag);
    } else {
      entry.tags_so_far = entry.tags_so_far.filter((t) => t !== edit.tag);
    }
  }
  renderCaseViews();

  for (const edit of edits) {
    const pending = { id: entry.id, tag: edit.tag, action: edit.action as TagAction };
    state.beginEdit(pending);
    try {
      const response = await client.applyTag(entry.id, edit.tag, edit.action, author);
      entry.tags_so_far = response.tags;
      if (response.warning) {
        toast(response.warning);
      }
    } catch (error) {
      entry.tags_so_far = before;
      renderCaseViews();
      const detail = error instanceof ApiRequestError ? error.detail : String(error);
      toast(`tag edit failed: ${detail}`, true);
      state.settleEdit(pending);
      return;
    } finally {
      state.settleEdit(pending);
    }
  }
  renderCaseViews();
  try {
    await refreshAnalytics();
    renderAll();
  } catch (error) {
    toast(`report refresh failed: ${String(error)}`, true);
  }
}

function bindControls(): void {
  ($("kind") as HTMLSelectElement).addEventListener("change", (event) => {
    state.kind = (event.target as HTMLSelectElement).value as QueueKind;
    void refreshAll().catch(showBanner);
  });
  ($("order") as HTMLSelectElement).addEventListener("change", (event) => {
    state.order = (event.target as HTMLSelectElement).value as QueueOrder;
    void refreshAll().catch(showBanner);
  });
  ($("author") as HTMLInputElement).addEventListener("change", (event) => {
    author = (event.target as HTMLInputElement).value || "auditor";
  });
  $("refresh").addEventListener("click", () => void refreshAll().catch(showBanner));
  document.addEventListener("keydown", (event) => {
    if (event.target instanceof HTMLInputElement) {
      return;
    }
    if (event.key === "j" || event.key === "ArrowDown") {
      state.next();
      renderAll();
    } else if (event.key === "k" || event.key === "ArrowUp") {
      state.prev();
      renderAll();
    }
  });
}

function showBanner(error: unknown): void {
  const banner = $("banner");
  banner.textContent = `service unreachable: ${String(error)} — `;
  const retry = document.createElement("button");
  retry.textContent = "retry";
  retry.addEventListener("click", () => {
    banner.hidden = true;
    void boot();
  });
  banner.appendChild(retry);
  banner.hidden = false;
}

async function boot(): Promise<void> {
  try {
    const health = await client.health();
    const schemaResponse = await client.schema();
    schema = schemaResponse.schema;
    $("title").textContent = `${schema.superclass} — ${health.set}`;
    $("banner").hidden = true;
    await refreshAll();
  } catch (error) {
    showBanner(error);
  }
}

bindControls();
void boot();
