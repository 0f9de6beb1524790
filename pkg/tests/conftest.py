from __future__ import annotations

import pytest

from strata.model import Axis, EvaluationSet, Record, Schema, TagDef


@pytest.fixture
def hip_schema() -> Schema:
    return Schema(
        superclass="hip_fracture",
        axes=(
            Axis(
                name="location",
                exclusive=True,
                tags=(
                    TagDef("subcapital"),
                    TagDef("cervical"),
                    TagDef("pertrochanteric"),
                    TagDef("subtrochanteric"),
                ),
            ),
            Axis(
                name="description",
                exclusive=False,
                tags=(
                    TagDef("subtle"),
                    TagDef("mild"),
                    TagDef("moderate"),
                    TagDef("severe"),
                    TagDef("comminuted"),
                ),
            ),
        ),
    )


@pytest.fixture
def drain_schema() -> Schema:
    return Schema(
        superclass="pneumothorax",
        axes=(
            Axis(
                name="treatment",
                exclusive=True,
                tags=(TagDef("drain"), TagDef("no_drain")),
            ),
        ),
    )


def make_set(
    pos_scores,
    neg_scores,
    pos_tags=None,
    name="fixture",
    embeddings=None,
) -> EvaluationSet:
    """Small hand-built evaluation set; pos_tags aligns with pos_scores."""
    records = []
    for i, score in enumerate(pos_scores):
        tags = frozenset(pos_tags[i]) if pos_tags else frozenset()
        emb = tuple(embeddings[i]) if embeddings is not None else None
        records.append(Record(f"p{i}", True, float(score), embedding=emb, tags=tags))
    for j, score in enumerate(neg_scores):
        records.append(Record(f"n{j}", False, float(score)))
    return EvaluationSet(name, records)


@pytest.fixture
def six_record_set() -> EvaluationSet:
    # two tag-A positives at high scores, two tag-B at low, two negatives
    return make_set(
        pos_scores=[0.9, 0.8, 0.4, 0.2],
        neg_scores=[0.3, 0.1],
        pos_tags=[("A",), ("A",), ("B",), ("B",)],
    )


@pytest.fixture
def ab_schema() -> Schema:
    return Schema(
        superclass="task",
        axes=(Axis(name="kind", exclusive=True, tags=(TagDef("A"), TagDef("B"))),),
    )
