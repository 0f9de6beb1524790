"""Error auditing: ranked error queues and event-sourced subclass tagging.

Tag edits are an append-only event log ({id, tag, add|remove, author, ts})
so every label is attributable and the audit is replayable. The effective
view of a record's tags merges the audit events over the ingested tags, with
audit winning on conflict: an audit remove hides an ingested tag, an audit
add introduces one. Replaying the log from empty always reproduces the
derived state.

Writers must be serialized externally (the service layer holds a lock);
readers may share a state freely.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import AuditError, DataFormatError
from .metrics import StratifiedReport, stratified_report
from .model import EvaluationSet, Schema

__all__ = [
    "TagEvent",
    "AuditQueueEntry",
    "AuditState",
    "build_error_queue",
    "apply_tag",
    "audit_snapshot",
    "merged_set",
]

QUEUE_KINDS = ("false_negative", "false_positive")
QUEUE_ORDERS = ("score_asc", "score_desc", "random")


@dataclass(frozen=True)
class TagEvent:
    record_id: str
    tag: str
    action: str  # "add" | "remove"
    author: str
    ts: str  # ISO-8601 UTC

    def to_json_dict(self) -> dict:
        return {
            "id": self.record_id,
            "tag": self.tag,
            "action": self.action,
            "author": self.author,
            "ts": self.ts,
        }


@dataclass(frozen=True)
class AuditQueueEntry:
    """One reviewable error case: a false negative or false positive."""

    record_id: str
    kind: str
    score: float
    rank: int
    tags_so_far: frozenset[str]
    meta: dict[str, str]

    def to_json_dict(self) -> dict:
        return {
            "id": self.record_id,
            "kind": self.kind,
            "score": self.score,
            "rank": self.rank,
            "tags_so_far": sorted(self.tags_so_far),
            "meta": dict(self.meta),
        }


class AuditState:
    """Append-only tag events layered over one evaluation set.

    Tracks, per record, the net added and net removed tags (last event per
    (record, tag) wins) so the merged view over ingested tags is O(1).
    """

    def __init__(self, evalset: EvaluationSet) -> None:
        self.set_name = evalset.name
        self.events: list[TagEvent] = []
        self._base = {r.id: r.tags for r in evalset.records}
        self._added: dict[str, set[str]] = {}
        self._removed: dict[str, set[str]] = {}

    @property
    def event_count(self) -> int:
        return len(self.events)

    def derived_tags(self, record_id: str) -> frozenset[str]:
        """Net audit-added tags for a record (the fold of the event log from empty)."""
        return frozenset(self._added.get(record_id, ()))

    def all_derived_tags(self) -> dict[str, frozenset[str]]:
        return {rid: frozenset(tags) for rid, tags in self._added.items() if tags}

    def current_tags(self, record_id: str) -> frozenset[str]:
        """Effective tags: ingested tags with audit removes and adds applied."""
        if record_id not in self._base:
            raise AuditError(f"unknown record id {record_id!r}")
        base = self._base[record_id]
        return frozenset(
            (base - self._removed.get(record_id, set())) | self._added.get(record_id, set())
        )

    def apply(self, record_id: str, tag: str, action: str, author: str, ts: str | None = None) -> TagEvent | None:
        """Append one event; returns it, or None for a duplicate no-op add."""
        if record_id not in self._base:
            raise AuditError(f"unknown record id {record_id!r}")
        if action not in ("add", "remove"):
            raise AuditError(f"unknown action {action!r} (expected add or remove)")
        if not tag or "|" in tag or tag != tag.strip():
            raise AuditError(f"invalid tag name {tag!r}")

        current = self.current_tags(record_id)
        if action == "add" and tag in current:
            warnings.warn(
                f"tag {tag!r} already present on record {record_id!r}; add ignored",
                stacklevel=3,
            )
            return None
        if action == "remove" and tag not in current:
            raise AuditError(f"tag {tag!r} not present on record {record_id!r}")

        event = TagEvent(
            record_id=record_id,
            tag=tag,
            action=action,
            author=author,
            ts=ts or datetime.now(timezone.utc).isoformat(),
        )
        self.events.append(event)
        self._fold(event)
        return event

    def _fold(self, event: TagEvent) -> None:
        added = self._added.setdefault(event.record_id, set())
        removed = self._removed.setdefault(event.record_id, set())
        if event.action == "add":
            added.add(event.tag)
            removed.discard(event.tag)
        else:
            added.discard(event.tag)
            removed.add(event.tag)

    # -- persistence: JSONL event log, one event per line, append-only --

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for event in self.events:
                handle.write(json.dumps(event.to_json_dict(), sort_keys=True) + "\n")

    def append_to_log(self, path: str | Path, event: TagEvent) -> None:
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(event.to_json_dict(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path, evalset: EvaluationSet) -> "AuditState":
        """Replay an event log; raises DataFormatError naming the corrupt line."""
        state = cls(evalset)
        with open(path, encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                where = f"{path} line {line_no}"
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataFormatError(f"{where}: invalid JSON ({exc.msg})") from None
                try:
                    record_id = obj["id"]
                    tag = obj["tag"]
                    action = obj["action"]
                    author = obj.get("author", "")
                    ts = obj.get("ts", "")
                except (TypeError, KeyError) as exc:
                    raise DataFormatError(f"{where}: missing field {exc}") from None
                try:
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore")
                        state.apply(record_id, tag, action, author, ts)
                except AuditError as exc:
                    raise DataFormatError(f"{where}: {exc}") from None
        return state


def apply_tag(state: AuditState, record_id: str, tag: str, action: str, author: str) -> AuditState:
    """Functional-style wrapper over AuditState.apply; returns the state."""
    state.apply(record_id, tag, action, author)
    return state


def merged_set(evalset: EvaluationSet, state: AuditState) -> EvaluationSet:
    """The evaluation set as the audit sees it: audit tags over ingested tags."""
    return evalset.with_tags({r.id: state.current_tags(r.id) for r in evalset.records})


def build_error_queue(
    evalset: EvaluationSet,
    threshold: float = 0.5,
    kind: str = "false_negative",
    order: str = "score_asc",
    seed: int = 0,
) -> list[AuditQueueEntry]:
    """The records in one confusion cell, ranked for review.

    false_negative: true positives scored below threshold; false_positive:
    true negatives scored at or above it. score_asc surfaces the most
    confident misses first for FN review; random uses the given seed. Ties
    break on record id so queues are stable.
    """
    if kind not in QUEUE_KINDS:
        raise AuditError(f"unknown queue kind {kind!r} (expected one of {QUEUE_KINDS})")
    if order not in QUEUE_ORDERS:
        raise AuditError(f"unknown order {order!r} (expected one of {QUEUE_ORDERS})")

    if kind == "false_negative":
        matches = [r for r in evalset.records if r.y_true and r.score < threshold]
    else:
        matches = [r for r in evalset.records if not r.y_true and r.score >= threshold]

    if order == "score_asc":
        matches.sort(key=lambda r: (r.score, r.id))
    elif order == "score_desc":
        matches.sort(key=lambda r: (-r.score, r.id))
    else:
        rng = np.random.default_rng(seed)
        matches = [matches[i] for i in rng.permutation(len(matches))]

    return [
        AuditQueueEntry(
            record_id=r.id,
            kind=kind,
            score=r.score,
            rank=rank,
            tags_so_far=r.tags,
            meta=dict(r.meta),
        )
        for rank, r in enumerate(matches)
    ]


def audit_snapshot(
    evalset: EvaluationSet,
    state: AuditState,
    schema: Schema,
    threshold: float = 0.5,
    alpha: float = 0.05,
    b: int = 1000,
    seed: int = 0,
) -> StratifiedReport:
    """Stratified report over the merged view; with an empty log this is
    exactly the report of the raw set."""
    return stratified_report(
        merged_set(evalset, state), schema, threshold=threshold, alpha=alpha, b=b, seed=seed
    )
