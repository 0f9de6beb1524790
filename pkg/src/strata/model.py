"""Domain types: evaluation records, evaluation sets, subclass schemas.

An EvaluationSet is one binary task (one superclass). Subclass membership is
carried as a set of tags per record; tags may overlap across schema axes, so
a record can be e.g. both "cervical" and "subtle". A multi-label dataset is
represented as one EvaluationSet per label, sharing record ids.

All values here are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DataFormatError, SchemaError

__all__ = [
    "Record",
    "EvaluationSet",
    "TagDef",
    "Axis",
    "Schema",
    "ValidationReport",
    "validate_against_schema",
]


@dataclass(frozen=True)
class Record:
    """One evaluated example.

    y_true is superclass membership, score the model probability for the
    superclass, embedding the (optional) pre-softmax feature vector, tags the
    subclass tags, meta free-form string pairs (image path, patient id, ...).
    """

    id: str
    y_true: bool
    score: float
    embedding: tuple[float, ...] | None = None
    tags: frozenset[str] = frozenset()
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.id:
            raise DataFormatError("record id must be a non-empty string")
        if not math.isfinite(self.score) or not 0.0 <= self.score <= 1.0:
            raise DataFormatError(
                f"record {self.id!r}: score {self.score!r} outside [0, 1]"
            )
        if self.embedding is not None:
            if len(self.embedding) == 0:
                raise DataFormatError(f"record {self.id!r}: empty embedding")
            for component in self.embedding:
                if not math.isfinite(component):
                    raise DataFormatError(
                        f"record {self.id!r}: non-finite embedding component {component!r}"
                    )


class EvaluationSet:
    """An ordered, immutable collection of records for one superclass.

    Record order is preserved from the source file so reports are
    deterministic. Construction enforces id uniqueness and a single embedding
    dimension across the set; the name is provenance only and does not
    participate in equality.
    """

    def __init__(
        self,
        name: str,
        records: list[Record] | tuple[Record, ...],
        embedding_dim: int | None = None,
    ) -> None:
        self.name = name
        self.records: tuple[Record, ...] = tuple(records)

        seen: set[str] = set()
        for record in self.records:
            if record.id in seen:
                raise DataFormatError(f"duplicate record id {record.id!r}")
            seen.add(record.id)

        dims = {len(r.embedding) for r in self.records if r.embedding is not None}
        if len(dims) > 1:
            offender = next(
                r.id
                for r in self.records
                if r.embedding is not None and len(r.embedding) == max(dims)
            )
            raise DataFormatError(
                f"embedding dimension mismatch: found dimensions {sorted(dims)} "
                f"(e.g. record {offender!r})"
            )
        inferred = dims.pop() if dims else None
        if embedding_dim is not None and inferred is not None and embedding_dim != inferred:
            raise DataFormatError(
                f"declared embedding_dim {embedding_dim} != observed {inferred}"
            )
        self.embedding_dim: int | None = embedding_dim if inferred is None else inferred

        self._by_id = {r.id: r for r in self.records}

    def __len__(self) -> int:
        return len(self.records)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EvaluationSet):
            return NotImplemented
        return (
            self.records == other.records and self.embedding_dim == other.embedding_dim
        )

    def __repr__(self) -> str:
        return (
            f"EvaluationSet({self.name!r}, n={len(self.records)}, "
            f"pos={len(self.positives())}, embedding_dim={self.embedding_dim})"
        )

    def get(self, record_id: str) -> Record | None:
        return self._by_id.get(record_id)

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._by_id

    def positives(self) -> tuple[Record, ...]:
        return tuple(r for r in self.records if r.y_true)

    def negatives(self) -> tuple[Record, ...]:
        return tuple(r for r in self.records if not r.y_true)

    def with_tags(self, tags_by_id: dict[str, frozenset[str]]) -> "EvaluationSet":
        """A copy of this set with per-record tags replaced where given."""
        replaced = [
            Record(r.id, r.y_true, r.score, r.embedding, tags_by_id.get(r.id, r.tags), r.meta)
            for r in self.records
        ]
        return EvaluationSet(self.name, replaced, self.embedding_dim)


@dataclass(frozen=True)
class TagDef:
    name: str
    description: str = ""


@dataclass(frozen=True)
class Axis:
    """One dimension of subclass variation (e.g. fracture location).

    An exclusive axis permits at most one of its tags per record; a
    non-exclusive axis (e.g. descriptive qualifiers) permits several.
    """

    name: str
    tags: tuple[TagDef, ...]
    exclusive: bool = False


@dataclass(frozen=True)
class Schema:
    """A named superclass with its prescribed subclass axes.

    Tag names are unique across the whole schema, so a bare tag string is
    unambiguous on a record.
    """

    superclass: str
    axes: tuple[Axis, ...]

    def __post_init__(self) -> None:
        seen: dict[str, str] = {}
        for axis in self.axes:
            if not axis.tags:
                raise SchemaError(f"axis {axis.name!r} has no tags")
            for tag in axis.tags:
                if not tag.name or "|" in tag.name or tag.name != tag.name.strip():
                    raise SchemaError(
                        f"axis {axis.name!r}: invalid tag name {tag.name!r}"
                    )
                if tag.name in seen:
                    raise SchemaError(
                        f"duplicate tag {tag.name!r} in axes "
                        f"{seen[tag.name]!r} and {axis.name!r}"
                    )
                seen[tag.name] = axis.name

    def tag_names(self) -> tuple[str, ...]:
        """All tag names in schema order (axis by axis)."""
        return tuple(t.name for axis in self.axes for t in axis.tags)

    def axis_of(self, tag: str) -> Axis | None:
        for axis in self.axes:
            if any(t.name == tag for t in axis.tags):
                return axis
        return None


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of checking a set against a schema. Problems are listed, not thrown."""

    unknown_tags: tuple[tuple[str, str], ...]  # (record id, tag)
    exclusivity_violations: tuple[tuple[str, str, tuple[str, ...]], ...]  # (id, axis, tags)
    untagged_positive_count: int
    coverage: dict[str, float]  # axis name -> fraction of positives with >=1 axis tag

    @property
    def clean(self) -> bool:
        return not self.unknown_tags and not self.exclusivity_violations

    def to_json_dict(self) -> dict:
        return {
            "unknown_tags": [{"id": i, "tag": t} for i, t in self.unknown_tags],
            "exclusivity_violations": [
                {"id": i, "axis": a, "tags": list(tags)}
                for i, a, tags in self.exclusivity_violations
            ],
            "untagged_positive_count": self.untagged_positive_count,
            "coverage": dict(self.coverage),
        }


def validate_against_schema(evalset: EvaluationSet, schema: Schema) -> ValidationReport:
    """Enumerate every unknown tag and exclusivity violation in the set.

    Coverage is computed over superclass positives only: schema completion is
    about labelling the positives, and a positive with no schema tag at all is
    counted as untagged rather than treated as an error.
    """
    known = set(schema.tag_names())
    unknown: list[tuple[str, str]] = []
    violations: list[tuple[str, str, tuple[str, ...]]] = []

    positives = evalset.positives()
    covered = {axis.name: 0 for axis in schema.axes}
    untagged = 0

    for record in evalset.records:
        for tag in sorted(record.tags - known):
            unknown.append((record.id, tag))
        for axis in schema.axes:
            axis_tags = sorted(record.tags & {t.name for t in axis.tags})
            if axis.exclusive and len(axis_tags) > 1:
                violations.append((record.id, axis.name, tuple(axis_tags)))
            if record.y_true and axis_tags:
                covered[axis.name] += 1
        if record.y_true and not (record.tags & known):
            untagged += 1

    n_pos = len(positives)
    coverage = {
        name: (count / n_pos if n_pos else 1.0) for name, count in covered.items()
    }
    return ValidationReport(
        unknown_tags=tuple(unknown),
        exclusivity_violations=tuple(violations),
        untagged_positive_count=untagged,
        coverage=coverage,
    )
