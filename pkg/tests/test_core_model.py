from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strata.errors import DataFormatError, SchemaError
from strata.io import load_evaluation_set, load_schema, save_evaluation_set, save_schema
from strata.model import EvaluationSet, Record, validate_against_schema


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestRecordInvariants:
    def test_score_out_of_range(self):
        with pytest.raises(DataFormatError, match="score"):
            Record("a", True, 1.5)

    def test_non_finite_embedding(self):
        with pytest.raises(DataFormatError, match="non-finite"):
            Record("a", True, 0.5, embedding=(1.0, float("nan")))

    def test_duplicate_ids_rejected(self):
        with pytest.raises(DataFormatError, match="'a'"):
            EvaluationSet("s", [Record("a", True, 0.1), Record("a", False, 0.2)])

    def test_mixed_embedding_dims_rejected(self):
        with pytest.raises(DataFormatError, match="dimension"):
            EvaluationSet(
                "s",
                [
                    Record("a", True, 0.1, embedding=(1.0, 2.0)),
                    Record("b", False, 0.2, embedding=(1.0, 2.0, 3.0)),
                ],
            )

    def test_partial_embeddings_allowed(self):
        es = EvaluationSet(
            "s",
            [Record("a", True, 0.1, embedding=(1.0, 2.0)), Record("b", False, 0.2)],
        )
        assert es.embedding_dim == 2


class TestCsvLoading:
    def test_three_row_csv_in_file_order(self, tmp_path):
        path = write(
            tmp_path / "d.csv",
            "id,y_true,score\na,1,0.9\nb,0,0.2\nc,1,0.5\n",
        )
        es = load_evaluation_set(path)
        assert [r.id for r in es.records] == ["a", "b", "c"]
        assert [r.score for r in es.records] == [0.9, 0.2, 0.5]
        assert [r.y_true for r in es.records] == [True, False, True]

    def test_duplicate_id_names_offender(self, tmp_path):
        path = write(tmp_path / "d.csv", "id,y_true,score\na,1,0.9\na,0,0.2\n")
        with pytest.raises(DataFormatError, match="'a'"):
            load_evaluation_set(path)

    def test_embedding_dimension_mismatch_names_row(self, tmp_path):
        path = write(
            tmp_path / "d.csv",
            "id,y_true,score,emb_0,emb_1,emb_2,emb_3,emb_4\n"
            "a,1,0.9,1,2,3,4,5\n"
            "b,1,0.8,1,2,3,4,\n",
        )
        with pytest.raises(DataFormatError, match="line 3"):
            load_evaluation_set(path)

    def test_non_contiguous_embedding_columns(self, tmp_path):
        path = write(tmp_path / "d.csv", "id,y_true,score,emb_0,emb_2\na,1,0.9,1,2\n")
        with pytest.raises(DataFormatError, match="contiguous"):
            load_evaluation_set(path)

    def test_score_range_error_names_row(self, tmp_path):
        path = write(tmp_path / "d.csv", "id,y_true,score\na,1,0.9\nb,1,1.2\n")
        with pytest.raises(DataFormatError, match=r"line 3.*'b'"):
            load_evaluation_set(path)

    def test_missing_required_column(self, tmp_path):
        path = write(tmp_path / "d.csv", "id,y_true\na,1\n")
        with pytest.raises(DataFormatError, match="score"):
            load_evaluation_set(path)

    def test_unknown_column_rejected(self, tmp_path):
        path = write(tmp_path / "d.csv", "id,y_true,score,tag\na,1,0.9,x\n")
        with pytest.raises(DataFormatError, match="tag"):
            load_evaluation_set(path)

    def test_tags_and_meta_parsed(self, tmp_path):
        path = write(
            tmp_path / "d.csv",
            "id,y_true,score,tags,meta_image\na,1,0.9,drain|subtle,/img/a.png\nb,0,0.2,,\n",
        )
        es = load_evaluation_set(path)
        assert es.records[0].tags == frozenset({"drain", "subtle"})
        assert es.records[0].meta == {"image": "/img/a.png"}
        assert es.records[1].tags == frozenset()
        assert es.records[1].meta == {}


class TestJsonlLoading:
    def test_round_trip_fields(self, tmp_path):
        path = tmp_path / "d.jsonl"
        rows = [
            {"id": "a", "y_true": True, "score": 0.9, "tags": ["x"], "embedding": [1.0, 2.0]},
            {"id": "b", "y_true": 0, "score": 0.2, "meta": {"k": "v"}},
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows), encoding="utf-8")
        es = load_evaluation_set(path)
        assert es.records[0].embedding == (1.0, 2.0)
        assert es.records[1].meta == {"k": "v"}

    def test_bad_json_names_line(self, tmp_path):
        path = write(tmp_path / "d.jsonl", '{"id": "a", "y_true": 1, "score": 0.5}\n{oops\n')
        with pytest.raises(DataFormatError, match="line 2"):
            load_evaluation_set(path)

    def test_ragged_embeddings_rejected(self, tmp_path):
        rows = [
            {"id": "a", "y_true": 1, "score": 0.5, "embedding": [1.0, 2.0]},
            {"id": "b", "y_true": 0, "score": 0.5, "embedding": [1.0]},
        ]
        path = write(tmp_path / "d.jsonl", "\n".join(json.dumps(r) for r in rows))
        with pytest.raises(DataFormatError, match="dimension"):
            load_evaluation_set(path)


class TestSidecarEmbeddings:
    def test_sidecar_attaches_and_wins(self, tmp_path):
        data = write(
            tmp_path / "d.csv",
            "id,y_true,score,emb_0\na,1,0.9,7.0\nb,0,0.2,1.0\n",
        )
        sidecar = write(tmp_path / "e.csv", "id,emb_0\na,3.5\nzz,9.9\n")
        with pytest.warns(UserWarning, match="overrides"):
            es = load_evaluation_set(data, embeddings=sidecar)
        assert es.get("a").embedding == (3.5,)
        assert es.get("b").embedding == (1.0,)  # not in sidecar: inline kept

    def test_sidecar_unknown_ids_ignored(self, tmp_path):
        data = write(tmp_path / "d.csv", "id,y_true,score\na,1,0.9\n")
        sidecar = write(tmp_path / "e.csv", "id,emb_0,emb_1\nother,1,2\na,3,4\n")
        es = load_evaluation_set(data, embeddings=sidecar)
        assert es.get("a").embedding == (3.0, 4.0)
        assert es.embedding_dim == 2


# strategies for round-trip property: printable ids/tags without the CSV
# separator or surrounding whitespace
_name = st.text(
    alphabet=st.characters(whitelist_categories=("L", "N"), whitelist_characters="_-"),
    min_size=1,
    max_size=12,
)


@st.composite
def evaluation_sets(draw):
    n = draw(st.integers(1, 12))
    d = draw(st.sampled_from([0, 1, 3]))
    ids = draw(st.lists(_name, min_size=n, max_size=n, unique=True))
    records = []
    for i in range(n):
        has_emb = d > 0 and draw(st.booleans())
        emb = (
            tuple(
                draw(
                    st.lists(
                        st.floats(-100, 100, allow_nan=False, width=32),
                        min_size=d,
                        max_size=d,
                    )
                )
            )
            if has_emb
            else None
        )
        records.append(
            Record(
                id=ids[i],
                y_true=draw(st.booleans()),
                score=draw(st.floats(0, 1, allow_nan=False)),
                embedding=emb,
                tags=frozenset(draw(st.lists(_name, max_size=3))),
                meta={k: v for k, v in draw(st.dictionaries(_name, _name, max_size=2)).items()},
            )
        )
    return EvaluationSet("prop", records)


class TestRoundTrip:
    @given(es=evaluation_sets(), fmt=st.sampled_from(["csv", "jsonl"]))
    @settings(max_examples=60, deadline=None)
    def test_save_load_identity(self, es, fmt, tmp_path_factory):
        path = tmp_path_factory.mktemp("rt") / f"set.{fmt}"
        save_evaluation_set(es, path, format=fmt)
        loaded = load_evaluation_set(path, format=fmt)
        assert loaded == es
        # serialize(load(x)) re-parses identically too
        path2 = path.with_suffix(f".again.{fmt}")
        save_evaluation_set(loaded, path2, format=fmt)
        assert load_evaluation_set(path2, format=fmt) == es


class TestSchema:
    def test_hip_schema_loads(self, tmp_path):
        obj = {
            "superclass": "hip_fracture",
            "axes": [
                {
                    "name": "location",
                    "exclusive": True,
                    "tags": [
                        {"name": "subcapital"},
                        {"name": "cervical"},
                        {"name": "pertrochanteric"},
                        {"name": "subtrochanteric"},
                    ],
                },
                {
                    "name": "description",
                    "exclusive": False,
                    "tags": [
                        {"name": "subtle"},
                        {"name": "mild"},
                        {"name": "moderate"},
                        {"name": "severe"},
                        {"name": "comminuted"},
                    ],
                },
            ],
        }
        path = write(tmp_path / "s.json", json.dumps(obj))
        schema = load_schema(path)
        assert schema.superclass == "hip_fracture"
        assert len(schema.tag_names()) == 9
        assert schema.axis_of("cervical").exclusive

    def test_duplicate_tag_across_axes_rejected(self, tmp_path):
        obj = {
            "superclass": "x",
            "axes": [
                {"name": "a", "exclusive": True, "tags": [{"name": "drain"}]},
                {"name": "b", "exclusive": False, "tags": [{"name": "drain"}]},
            ],
        }
        path = write(tmp_path / "s.json", json.dumps(obj))
        with pytest.raises(SchemaError, match="drain"):
            load_schema(path)

    def test_single_exclusive_axis_valid(self, tmp_path):
        obj = {
            "superclass": "pneumothorax",
            "axes": [
                {
                    "name": "treatment",
                    "exclusive": True,
                    "tags": [{"name": "drain"}, {"name": "no_drain"}],
                }
            ],
        }
        schema = load_schema(write(tmp_path / "s.json", json.dumps(obj)))
        assert schema.tag_names() == ("drain", "no_drain")

    def test_empty_axis_rejected(self, tmp_path):
        obj = {"superclass": "x", "axes": [{"name": "a", "tags": []}]}
        with pytest.raises(SchemaError, match="no tags"):
            load_schema(write(tmp_path / "s.json", json.dumps(obj)))

    def test_schema_save_load(self, tmp_path, hip_schema):
        path = tmp_path / "s.json"
        save_schema(hip_schema, path)
        assert load_schema(path) == hip_schema


class TestValidation:
    def test_clean_set_full_coverage(self, hip_schema):
        records = [
            Record("a", True, 0.9, tags=frozenset({"cervical"})),
            Record("b", True, 0.7, tags=frozenset({"subcapital", "subtle"})),
            Record("c", False, 0.1),
        ]
        report = validate_against_schema(EvaluationSet("s", records), hip_schema)
        assert report.clean
        assert report.coverage["location"] == 1.0
        assert report.coverage["description"] == 0.5
        assert report.untagged_positive_count == 0

    def test_exclusivity_violation(self, hip_schema):
        records = [Record("a", True, 0.9, tags=frozenset({"cervical", "subcapital"}))]
        report = validate_against_schema(EvaluationSet("s", records), hip_schema)
        assert report.exclusivity_violations == (
            ("a", "location", ("cervical", "subcapital")),
        )

    def test_unknown_tag_reported(self, hip_schema):
        records = [Record("a", True, 0.9, tags=frozenset({"osteophyte"}))]
        report = validate_against_schema(EvaluationSet("s", records), hip_schema)
        assert report.unknown_tags == (("a", "osteophyte"),)
        assert report.untagged_positive_count == 1  # no schema-known tag

    def test_brute_force_equivalence(self, hip_schema):
        # zero problems iff every tag is known and no exclusive axis doubles up
        import random

        rng = random.Random(7)
        tag_pool = list(hip_schema.tag_names()) + ["bogus"]
        for trial in range(50):
            records = [
                Record(
                    f"r{i}",
                    rng.random() < 0.5,
                    rng.random(),
                    tags=frozenset(rng.sample(tag_pool, rng.randint(0, 4))),
                )
                for i in range(rng.randint(1, 10))
            ]
            es = EvaluationSet("s", records)
            report = validate_against_schema(es, hip_schema)
            known = set(hip_schema.tag_names())
            expect_problem = any(
                (r.tags - known)
                or any(
                    a.exclusive and len(r.tags & {t.name for t in a.tags}) > 1
                    for a in hip_schema.axes
                )
                for r in records
            )
            assert report.clean == (not expect_problem)
