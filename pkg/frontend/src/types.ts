// Payload shapes of the audit service API. The UI computes no metrics:
// everything rendered comes from these objects verbatim.

export interface ConfigEcho {
  data: string;
  schema: string;
  audit_log: string | null;
  threshold: number;
  alpha: number;
  bootstrap_b: number;
  seed: number;
  ks: number[];
  min_size: number;
  events: number;
}

export interface ReportRow {
  tag: string;
  count: number;
  prevalence: number;
  sensitivity: number | null;
  ppv: number | null;
  auc: number | null;
  p_sensitivity: number | null;
  p_auc: number | null;
  flagged: boolean;
  note: string | null;
  roc: [number, number][] | null;
}

export interface Report {
  overall: ReportRow;
  rows: ReportRow[];
  threshold: number;
  alpha: number;
  bootstrap_b: number;
  seed: number;
}

export interface QueueEntry {
  id: string;
  kind: string;
  score: number;
  rank: number;
  tags_so_far: string[];
  meta: Record<string, string>;
}

export interface QueueResponse {
  entries: QueueEntry[];
  kind: string;
  order: string;
  config: ConfigEcho;
}

export interface SchemaTag {
  name: string;
  description: string;
}

export interface SchemaAxis {
  name: string;
  exclusive: boolean;
  tags: SchemaTag[];
}

export interface SchemaInfo {
  superclass: string;
  axes: SchemaAxis[];
}

export interface SchemaResponse {
  schema: SchemaInfo;
  config: ConfigEcho;
}

export interface RecordInfo {
  id: string;
  y_true: boolean;
  score: number;
  tags: string[];
  meta: Record<string, string>;
  has_embedding: boolean;
}

export interface RecordsResponse {
  records: RecordInfo[];
  config: ConfigEcho;
}

export interface ClusterPair {
  k: number;
  high: number;
  low: number;
  high_error: number;
  low_error: number;
  high_size: number;
  low_size: number;
  centroid_distance: number;
}

export interface Composition {
  tag: string;
  high: number;
  low: number;
  overall: number;
  difference: number;
}

export interface Finding {
  chosen: ClusterPair | null;
  candidates: ClusterPair[];
  composition: Composition[];
  config: {
    ks: number[];
    min_size: number;
    threshold: number;
    seed: number;
    normalize: boolean;
  };
  diagnostics: Record<string, string>;
}

export interface TagResponse {
  id: string;
  tags: string[];
  events: number;
  warning?: string;
}

export interface HealthResponse {
  status: string;
  set: string;
  records: number;
  kernel_backend: string;
  config: ConfigEcho;
}

export type QueueKind = "fn" | "fp";
export type QueueOrder = "score_asc" | "score_desc" | "random";
export type TagAction = "add" | "remove";
