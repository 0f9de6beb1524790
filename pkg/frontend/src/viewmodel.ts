// Pure mapping from service payloads to the strings and geometry the DOM
// shows. Keeping this free of DOM and network makes the parity guarantee
// testable: every displayed value is a formatting of one response field.

import type {
  Composition,
  Finding,
  QueueEntry,
  Report,
  ReportRow,
  SchemaAxis,
} from "./types.js";

export function fmt(value: number | null, digits = 3): string {
  return value === null ? "-" : value.toFixed(digits);
}

export interface ReportRowView {
  tag: string;
  prevalenceCount: string; // "0.30 (150)" styled like the published tables
  sensitivity: string;
  ppv: string;
  auc: string;
  pSensitivity: string;
  pAuc: string;
  flagged: boolean;
  note: string | null;
}

export function reportRowView(row: ReportRow): ReportRowView {
  return {
    tag: row.tag,
    prevalenceCount: `${row.prevalence.toFixed(2)} (${row.count})`,
    sensitivity: fmt(row.sensitivity),
    ppv: fmt(row.ppv),
    auc: fmt(row.auc),
    pSensitivity: fmt(row.p_sensitivity),
    pAuc: fmt(row.p_auc),
    flagged: row.flagged,
    note: row.note,
  };
}

export interface ReportView {
  header: string[];
  rows: ReportRowView[]; // overall first
  caption: string;
}

export const REPORT_HEADER = [
  "subclass",
  "prevalence (count)",
  "sensitivity",
  "ppv",
  "auc",
  "p(sens)",
  "p(auc)",
];

export function reportView(report: Report): ReportView {
  return {
    header: REPORT_HEADER,
    rows: [report.overall, ...report.rows].map(reportRowView),
    caption:
      `threshold ${report.threshold} · alpha ${report.alpha} · ` +
      `bootstrap ${report.bootstrap_b} · seed ${report.seed}`,
  };
}

export interface RocPath {
  tag: string;
  path: string; // SVG path in a unit viewBox scaled by the caller
  auc: string;
  flagged: boolean;
}

export function rocPath(points: [number, number][], width: number, height: number): string {
  return points
    .map(([fpr, tpr], i) => {
      const x = (fpr * width).toFixed(2);
      const y = ((1 - tpr) * height).toFixed(2);
      return `${i === 0 ? "M" : "L"}${x},${y}`;
    })
    .join(" ");
}

export function rocPaths(report: Report, width: number, height: number): RocPath[] {
  const curves: RocPath[] = [];
  for (const row of [report.overall, ...report.rows]) {
    if (!row.roc) {
      continue;
    }
    curves.push({
      tag: row.tag,
      path: rocPath(row.roc, width, height),
      auc: fmt(row.auc),
      flagged: row.flagged,
    });
  }
  return curves;
}

export interface CompositionBarView {
  tag: string;
  difference: string;
  highLow: string; // "0.68 (0.17, 0.84)" like the published cluster table
  overall: string;
  highFraction: number; // bar geometry, straight from the response
  lowFraction: number;
}

export function compositionBarView(comp: Composition): CompositionBarView {
  return {
    tag: comp.tag,
    difference: comp.difference.toFixed(2),
    highLow: `${comp.difference.toFixed(2)} (${comp.high.toFixed(2)}, ${comp.low.toFixed(2)})`,
    overall: comp.overall.toFixed(2),
    highFraction: comp.high,
    lowFraction: comp.low,
  };
}

export type StrataView =
  | { available: false; reason: string }
  | {
      available: true;
      summary: string;
      bars: CompositionBarView[];
      diagnostics: string[];
    };

export function strataView(finding: Finding | null, reason?: string): StrataView {
  if (finding === null) {
    return { available: false, reason: reason ?? "no embeddings in this dataset" };
  }
  if (finding.chosen === null) {
    const detail = Object.entries(finding.diagnostics)
      .map(([k, message]) => `k=${k}: ${message}`)
      .join("; ");
    return { available: false, reason: `no qualifying cluster pair (${detail})` };
  }
  const c = finding.chosen;
  return {
    available: true,
    summary:
      `k=${c.k}: high-error cluster ${c.high} ` +
      `(error ${c.high_error.toFixed(3)}, n=${c.high_size}) vs ` +
      `cluster ${c.low} (error ${c.low_error.toFixed(3)}, n=${c.low_size}), ` +
      `centroid distance ${c.centroid_distance.toFixed(3)}`,
    bars: finding.composition.map(compositionBarView),
    diagnostics: Object.entries(finding.diagnostics).map(([k, m]) => `k=${k}: ${m}`),
  };
}

export interface QueueCardView {
  id: string;
  kindLabel: string;
  score: string;
  tags: string[];
  metaRows: [string, string][];
  imageUrl: string | null;
}

export function queueCardView(entry: QueueEntry): QueueCardView {
  const image = entry.meta["image_url"] ?? entry.meta["image"] ?? null;
  return {
    id: entry.id,
    kindLabel: entry.kind === "false_negative" ? "false negative" : "false positive",
    score: entry.score.toFixed(3),
    tags: [...entry.tags_so_far].sort(),
    metaRows: Object.entries(entry.meta)
      .filter(([key]) => key !== "image_url" && key !== "image")
      .sort(([a], [b]) => a.localeCompare(b)),
    imageUrl: image,
  };
}

/** Tags currently selectable per axis, with radio semantics for exclusive axes. */
export function axisSelection(
  axis: SchemaAxis,
  currentTags: string[],
): { tag: string; description: string; selected: boolean }[] {
  return axis.tags.map((t) => ({
    tag: t.name,
    description: t.description,
    selected: currentTags.includes(t.name),
  }));
}

/**
 * Edits needed to select a tag on an axis: on an exclusive axis the previous
 * selection is removed first (radio behavior); clicking a selected tag
 * removes it.
 */
export function toggleEdits(
  axis: SchemaAxis,
  currentTags: string[],
  tag: string,
): { tag: string; action: "add" | "remove" }[] {
  if (currentTags.includes(tag)) {
    return [{ tag, action: "remove" }];
  }
  const edits: { tag: string; action: "add" | "remove" }[] = [];
  if (axis.exclusive) {
    for (const other of axis.tags) {
      if (other.name !== tag && currentTags.includes(other.name)) {
        edits.push({ tag: other.name, action: "remove" });
      }
    }
  }
  edits.push({ tag, action: "add" });
  return edits;
}
