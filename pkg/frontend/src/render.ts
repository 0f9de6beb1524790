// DOM construction from view models. No data transformation happens here
// beyond attaching view-model strings to elements.

import type { QueueEntry, SchemaInfo } from "./types.js";
import type {
  QueueCardView,
  ReportView,
  RocPath,
  StrataView,
} from "./viewmodel.js";
import { axisSelection } from "./viewmodel.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function renderQueue(
  container: HTMLElement,
  entries: QueueEntry[],
  cursor: number,
  onSelect: (index: number) => void,
): void {
  container.replaceChildren();
  if (!entries.length) {
    container.appendChild(el("p", "empty", "queue is empty — nothing to review"));
    return;
  }
  for (const [index, entry] of entries.entries()) {
    const item = el("button", index === cursor ? "queue-item active" : "queue-item");
    item.dataset.id = entry.id;
    item.appendChild(el("span", "queue-rank", `#${entry.rank}`));
    item.appendChild(el("span", "queue-id", entry.id));
    item.appendChild(el("span", "queue-score", entry.score.toFixed(3)));
    item.addEventListener("click", () => onSelect(index));
    container.appendChild(item);
  }
}

export function renderCard(container: HTMLElement, card: QueueCardView | null): void {
  container.replaceChildren();
  if (!card) {
    container.appendChild(el("p", "empty", "no case selected"));
    return;
  }
  const head = el("div", "card-head");
  head.appendChild(el("h3", undefined, card.id));
  head.appendChild(el("span", "badge", card.kindLabel));
  head.appendChild(el("span", "badge score", `score ${card.score}`));
  container.appendChild(head);

  if (card.imageUrl) {
    const img = el("img", "case-image");
    img.src = card.imageUrl;
    img.alt = card.id;
    container.appendChild(img);
  }
  const chips = el("div", "chips");
  chips.id = "current-tags";
  for (const tag of card.tags) {
    chips.appendChild(el("span", "chip", tag));
  }
  container.appendChild(chips);

  if (card.metaRows.length) {
    const table = el("table", "meta");
    for (const [key, value] of card.metaRows) {
      const row = el("tr");
      row.appendChild(el("td", "meta-key", key));
      row.appendChild(el("td", undefined, value));
      table.appendChild(row);
    }
    container.appendChild(table);
  }
}

export function renderTagPanel(
  container: HTMLElement,
  schema: SchemaInfo,
  currentTags: string[],
  onToggle: (axisName: string, tag: string) => void,
): void {
  container.replaceChildren();
  for (const axis of schema.axes) {
    const fieldset = el("fieldset", "axis");
    const legend = el("legend", undefined, axis.name + (axis.exclusive ? " (one of)" : ""));
    fieldset.appendChild(legend);
    for (const option of axisSelection(axis, currentTags)) {
      const label = el("label", "tag-option");
      const input = el("input") as HTMLInputElement;
      input.type = axis.exclusive ? "radio" : "checkbox";
      input.name = `axis-${axis.name}`;
      input.value = option.tag;
      input.checked = option.selected;
      input.addEventListener("click", (event) => {
        event.preventDefault(); // server confirms before the box flips
        onToggle(axis.name, option.tag);
      });
      label.appendChild(input);
      label.appendChild(el("span", undefined, option.tag));
      if (option.description) {
        label.title = option.description;
      }
      fieldset.appendChild(label);
    }
    container.appendChild(fieldset);
  }
}

export function renderReport(container: HTMLElement, view: ReportView): void {
  container.replaceChildren();
  const table = el("table", "report");
  const head = el("tr");
  for (const column of view.header) {
    head.appendChild(el("th", undefined, column));
  }
  table.appendChild(head);
  for (const row of view.rows) {
    const tr = el("tr", row.flagged ? "flagged" : undefined);
    tr.dataset.tag = row.tag;
    for (const value of [
      row.tag,
      row.prevalenceCount,
      row.sensitivity,
      row.ppv,
      row.auc,
      row.pSensitivity,
      row.pAuc,
    ]) {
      tr.appendChild(el("td", undefined, value));
    }
    if (row.note) {
      tr.title = row.note;
    }
    table.appendChild(tr);
  }
  container.appendChild(table);
  container.appendChild(el("p", "caption", view.caption));
}

const ROC_COLORS = [
  "#2563eb",
  "#db2777",
  "#059669",
  "#d97706",
  "#7c3aed",
  "#0891b2",
  "#dc2626",
];

export function renderRoc(container: HTMLElement, curves: RocPath[], size = 260): void {
  container.replaceChildren();
  if (!curves.length) {
    container.appendChild(el("p", "empty", "no curves"));
    return;
  }
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `-8 -8 ${size + 16} ${size + 16}`);
  svg.setAttribute("class", "roc");
  const diagonal = document.createElementNS("http://www.w3.org/2000/svg", "path");
  diagonal.setAttribute("d", `M0,${size} L${size},0`);
  diagonal.setAttribute("class", "roc-diagonal");
  svg.appendChild(diagonal);
  curves.forEach((curve, index) => {
    const path = document.createElementNS("http://www.w3.org/2000/svg", "path");
    path.setAttribute("d", curve.path);
    path.setAttribute("fill", "none");
    path.setAttribute("stroke", curve.tag === "overall" ? "#111" : ROC_COLORS[index % ROC_COLORS.length]);
    path.setAttribute("stroke-width", curve.tag === "overall" ? "2.5" : "1.6");
    svg.appendChild(path);
  });
  container.appendChild(svg);
  const legend = el("div", "roc-legend");
  curves.forEach((curve, index) => {
    const item = el("span", "roc-legend-item");
    const swatch = el("i");
    swatch.style.background =
      curve.tag === "overall" ? "#111" : ROC_COLORS[index % ROC_COLORS.length];
    item.appendChild(swatch);
    item.appendChild(
      el("span", curve.flagged ? "flagged-text" : undefined, `${curve.tag} (auc ${curve.auc})`),
    );
    legend.appendChild(item);
  });
  container.appendChild(legend);
}

export function renderStrata(container: HTMLElement, view: StrataView): void {
  container.replaceChildren();
  if (!view.available) {
    container.appendChild(el("p", "empty", `cluster finding not available: ${view.reason}`));
    return;
  }
  container.appendChild(el("p", "strata-summary", view.summary));
  const table = el("table", "strata");
  const head = el("tr");
  for (const column of ["subclass", "difference (high, low)", "overall"]) {
    head.appendChild(el("th", undefined, column));
  }
  table.appendChild(head);
  for (const bar of view.bars) {
    const tr = el("tr");
    tr.dataset.tag = bar.tag;
    tr.appendChild(el("td", undefined, bar.tag));
    const cell = el("td", "bar-cell", bar.highLow);
    const bars = el("div", "bars");
    const high = el("div", "bar high");
    high.style.width = `${Math.round(bar.highFraction * 100)}%`;
    const low = el("div", "bar low");
    low.style.width = `${Math.round(bar.lowFraction * 100)}%`;
    bars.appendChild(high);
    bars.appendChild(low);
    cell.appendChild(bars);
    tr.appendChild(cell);
    tr.appendChild(el("td", undefined, bar.overall));
    table.appendChild(tr);
  }
  container.appendChild(table);
}

export function toast(message: string, isError = false): void {
  const node = el("div", isError ? "toast error" : "toast", message);
  document.body.appendChild(node);
  setTimeout(() => node.remove(), 4000);
}
