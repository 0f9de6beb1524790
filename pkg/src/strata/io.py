"""File ingestion and serialization for evaluation sets and schemas.

Evaluation CSV grammar: header row with required columns ``id,y_true,score``
(``y_true`` in {0,1}), optional ``tags`` (``|``-separated), optional
``emb_0..emb_{d-1}`` and optional ``meta_*`` columns (prefix stripped into the
record's meta map). UTF-8, ``.`` decimal separator. JSONL carries the same
field names with ``embedding`` as a number array.

Embeddings may also live in a sidecar CSV keyed by id (``id,emb_0..emb_{d-1}``);
sidecar values win over inline ones with a warning. Sidecar rows whose id is
not in the set are ignored, so one sidecar can serve several evaluation sets
that share ids.

Every rejection names the offending line and record id where known.
"""

from __future__ import annotations

import csv
import json
import math
import re
import warnings
from pathlib import Path

from .errors import DataFormatError, SchemaError
from .model import Axis, EvaluationSet, Record, Schema, TagDef

__all__ = [
    "load_evaluation_set",
    "save_evaluation_set",
    "load_schema",
    "save_schema",
]

_EMB_COL = re.compile(r"^emb_(\d+)$")
_META_COL = re.compile(r"^meta_(.+)$")
_KNOWN_COLS = {"id", "y_true", "score", "tags"}


def _infer_format(path: Path, format: str | None) -> str:
    if format is not None:
        if format not in ("csv", "jsonl"):
            raise DataFormatError(f"unknown format {format!r} (expected csv or jsonl)")
        return format
    suffix = path.suffix.lower()
    if suffix in (".jsonl", ".ndjson"):
        return "jsonl"
    return "csv"


def _parse_score(raw: object, where: str) -> float:
    try:
        score = float(raw)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise DataFormatError(f"{where}: score {raw!r} is not a number") from None
    if not math.isfinite(score) or not 0.0 <= score <= 1.0:
        raise DataFormatError(f"{where}: score {score!r} outside [0, 1]")
    return score


def _parse_y_true(raw: object, where: str) -> bool:
    if isinstance(raw, bool):
        return raw
    if raw in (0, 1):
        return bool(raw)
    if isinstance(raw, str) and raw.strip() in ("0", "1"):
        return raw.strip() == "1"
    raise DataFormatError(f"{where}: y_true {raw!r} must be 0 or 1")


def _parse_tags(raw: object, where: str) -> frozenset[str]:
    if raw is None:
        return frozenset()
    if isinstance(raw, str):
        parts = [p.strip() for p in raw.split("|")]
        return frozenset(p for p in parts if p)
    if isinstance(raw, (list, tuple)):
        for tag in raw:
            if not isinstance(tag, str):
                raise DataFormatError(f"{where}: tag {tag!r} is not a string")
        return frozenset(raw)
    raise DataFormatError(f"{where}: tags {raw!r} must be a list or |-separated string")


def _emb_columns(fieldnames: list[str], path: Path) -> list[str]:
    """Validate emb_* columns are exactly emb_0..emb_{d-1} and return them in order."""
    indexed: dict[int, str] = {}
    for name in fieldnames:
        match = _EMB_COL.match(name)
        if match:
            indexed[int(match.group(1))] = name
    if not indexed:
        return []
    expected = set(range(len(indexed)))
    if set(indexed) != expected:
        raise DataFormatError(
            f"{path}: embedding columns must be contiguous emb_0..emb_{{d-1}}, "
            f"got indices {sorted(indexed)}"
        )
    return [indexed[i] for i in sorted(indexed)]


def _load_csv_records(path: Path) -> list[Record]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise DataFormatError(f"{path}: empty file, expected a header row")
        fieldnames = list(reader.fieldnames)
        missing = {"id", "y_true", "score"} - set(fieldnames)
        if missing:
            raise DataFormatError(
                f"{path}: missing required column(s) {sorted(missing)}"
            )
        emb_cols = _emb_columns(fieldnames, path)
        meta_cols = [(c, _META_COL.match(c).group(1)) for c in fieldnames if _META_COL.match(c)]
        recognized = _KNOWN_COLS | set(emb_cols) | {c for c, _ in meta_cols}
        unknown = [c for c in fieldnames if c not in recognized]
        if unknown:
            raise DataFormatError(
                f"{path}: unrecognized column(s) {unknown}; embeddings use emb_<i>, "
                f"metadata uses meta_<key>"
            )

        records: list[Record] = []
        seen_ids: set[str] = set()
        for line_no, row in enumerate(reader, start=2):
            record_id = (row.get("id") or "").strip()
            where = f"{path} line {line_no}" + (f" (id {record_id!r})" if record_id else "")
            if not record_id:
                raise DataFormatError(f"{where}: missing id")
            if record_id in seen_ids:
                raise DataFormatError(f"{where}: duplicate record id {record_id!r}")
            seen_ids.add(record_id)

            embedding: tuple[float, ...] | None = None
            if emb_cols:
                cells = [row.get(c) or "" for c in emb_cols]
                filled = [c for c in cells if c.strip() != ""]
                if filled and len(filled) != len(cells):
                    raise DataFormatError(
                        f"{where}: embedding dimension mismatch "
                        f"({len(filled)} of {len(cells)} components present)"
                    )
                if filled:
                    try:
                        embedding = tuple(float(c) for c in cells)
                    except ValueError:
                        raise DataFormatError(
                            f"{where}: non-numeric embedding component"
                        ) from None
                    for component in embedding:
                        if not math.isfinite(component):
                            raise DataFormatError(
                                f"{where}: non-finite embedding component {component!r}"
                            )

            meta = {key: row[col] for col, key in meta_cols if (row.get(col) or "") != ""}
            records.append(
                Record(
                    id=record_id,
                    y_true=_parse_y_true(row.get("y_true"), where),
                    score=_parse_score(row.get("score"), where),
                    embedding=embedding,
                    tags=_parse_tags(row.get("tags"), where),
                    meta=meta,
                )
            )
    return records


def _load_jsonl_records(path: Path) -> list[Record]:
    records: list[Record] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            where = f"{path} line {line_no}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{where}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise DataFormatError(f"{where}: expected an object")
            record_id = obj.get("id")
            if not isinstance(record_id, str) or not record_id:
                raise DataFormatError(f"{where}: missing or invalid id")
            where = f"{where} (id {record_id!r})"
            if record_id in seen_ids:
                raise DataFormatError(f"{where}: duplicate record id {record_id!r}")
            seen_ids.add(record_id)

            embedding = None
            if obj.get("embedding") is not None:
                raw = obj["embedding"]
                if not isinstance(raw, list) or not raw:
                    raise DataFormatError(f"{where}: embedding must be a non-empty array")
                try:
                    embedding = tuple(float(v) for v in raw)
                except (TypeError, ValueError):
                    raise DataFormatError(f"{where}: non-numeric embedding component") from None
                for component in embedding:
                    if not math.isfinite(component):
                        raise DataFormatError(
                            f"{where}: non-finite embedding component {component!r}"
                        )

            meta = obj.get("meta") or {}
            if not isinstance(meta, dict) or not all(
                isinstance(k, str) and isinstance(v, str) for k, v in meta.items()
            ):
                raise DataFormatError(f"{where}: meta must map strings to strings")

            records.append(
                Record(
                    id=record_id,
                    y_true=_parse_y_true(obj.get("y_true"), where),
                    score=_parse_score(obj.get("score"), where),
                    embedding=embedding,
                    tags=_parse_tags(obj.get("tags"), where),
                    meta=dict(meta),
                )
            )
    return records


def _apply_sidecar(records: list[Record], sidecar: Path) -> list[Record]:
    with open(sidecar, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or "id" not in reader.fieldnames:
            raise DataFormatError(f"{sidecar}: expected header with id,emb_0..emb_{{d-1}}")
        emb_cols = _emb_columns(list(reader.fieldnames), sidecar)
        if not emb_cols:
            raise DataFormatError(f"{sidecar}: no emb_* columns")
        by_id: dict[str, tuple[float, ...]] = {}
        for line_no, row in enumerate(reader, start=2):
            record_id = (row.get("id") or "").strip()
            where = f"{sidecar} line {line_no}"
            if not record_id:
                raise DataFormatError(f"{where}: missing id")
            if record_id in by_id:
                raise DataFormatError(f"{where}: duplicate record id {record_id!r}")
            try:
                vec = tuple(float(row.get(c) or "") for c in emb_cols)
            except ValueError:
                raise DataFormatError(f"{where}: non-numeric embedding component") from None
            by_id[record_id] = vec

    overridden = [r.id for r in records if r.embedding is not None and r.id in by_id]
    if overridden:
        warnings.warn(
            f"sidecar {sidecar} overrides {len(overridden)} inline embedding(s) "
            f"(first: {overridden[0]!r})",
            stacklevel=3,
        )
    return [
        Record(r.id, r.y_true, r.score, by_id.get(r.id, r.embedding), r.tags, r.meta)
        for r in records
    ]


def load_evaluation_set(
    path: str | Path,
    format: str | None = None,
    embeddings: str | Path | None = None,
    name: str | None = None,
) -> EvaluationSet:
    """Load an evaluation set from CSV or JSONL (inferred from the suffix).

    ``embeddings`` optionally points at a sidecar embedding CSV. Raises
    DataFormatError with a row-addressable message on any grammar or
    invariant violation; OSError propagates for unreadable files.
    """
    path = Path(path)
    fmt = _infer_format(path, format)
    records = _load_csv_records(path) if fmt == "csv" else _load_jsonl_records(path)
    if embeddings is not None:
        records = _apply_sidecar(records, Path(embeddings))
    return EvaluationSet(name or path.stem, records)


def save_evaluation_set(evalset: EvaluationSet, path: str | Path, format: str | None = None) -> None:
    """Write a set back out; load(save(x)) reproduces x field-by-field.

    Empty meta values are not representable in CSV (an empty cell means
    absent), so meta values are required to be non-empty strings.
    """
    path = Path(path)
    fmt = _infer_format(path, format)
    if fmt == "csv":
        _save_csv(evalset, path)
    else:
        _save_jsonl(evalset, path)


def _save_csv(evalset: EvaluationSet, path: Path) -> None:
    d = evalset.embedding_dim or 0
    meta_keys = sorted({k for r in evalset.records for k in r.meta})
    header = (
        ["id", "y_true", "score", "tags"]
        + [f"emb_{i}" for i in range(d)]
        + [f"meta_{k}" for k in meta_keys]
    )
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for r in evalset.records:
            emb = [repr(v) for v in r.embedding] if r.embedding else [""] * d
            writer.writerow(
                [r.id, int(r.y_true), repr(r.score), "|".join(sorted(r.tags))]
                + emb
                + [r.meta.get(k, "") for k in meta_keys]
            )


def _save_jsonl(evalset: EvaluationSet, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for r in evalset.records:
            obj: dict = {
                "id": r.id,
                "y_true": bool(r.y_true),
                "score": r.score,
                "tags": sorted(r.tags),
            }
            if r.embedding is not None:
                obj["embedding"] = list(r.embedding)
            if r.meta:
                obj["meta"] = dict(sorted(r.meta.items()))
            handle.write(json.dumps(obj, sort_keys=True) + "\n")


def load_schema(path: str | Path) -> Schema:
    """Load a schema JSON file: {superclass, axes:[{name, exclusive, tags:[{name, description}]}]}."""
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        try:
            obj = json.load(handle)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    superclass = obj.get("superclass")
    if not isinstance(superclass, str) or not superclass:
        raise SchemaError(f"{path}: missing superclass name")
    raw_axes = obj.get("axes")
    if not isinstance(raw_axes, list):
        raise SchemaError(f"{path}: axes must be a list")
    axes = []
    for raw_axis in raw_axes:
        if not isinstance(raw_axis, dict) or not isinstance(raw_axis.get("name"), str):
            raise SchemaError(f"{path}: each axis needs a name")
        axis_name = raw_axis["name"]
        raw_tags = raw_axis.get("tags")
        if not isinstance(raw_tags, list) or not raw_tags:
            raise SchemaError(f"{path}: axis {axis_name!r} has no tags")
        tags = []
        for raw_tag in raw_tags:
            if isinstance(raw_tag, str):
                tags.append(TagDef(raw_tag))
            elif isinstance(raw_tag, dict) and isinstance(raw_tag.get("name"), str):
                tags.append(TagDef(raw_tag["name"], str(raw_tag.get("description", ""))))
            else:
                raise SchemaError(f"{path}: axis {axis_name!r}: invalid tag {raw_tag!r}")
        axes.append(Axis(name=axis_name, tags=tuple(tags), exclusive=bool(raw_axis.get("exclusive", False))))
    return Schema(superclass=superclass, axes=tuple(axes))


def save_schema(schema: Schema, path: str | Path) -> None:
    obj = {
        "superclass": schema.superclass,
        "axes": [
            {
                "name": axis.name,
                "exclusive": axis.exclusive,
                "tags": [{"name": t.name, "description": t.description} for t in axis.tags],
            }
            for axis in schema.axes
        ],
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(obj, handle, indent=2, sort_keys=True)
        handle.write("\n")
