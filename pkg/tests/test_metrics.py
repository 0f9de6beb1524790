from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from strata.errors import ConfigError, MetricError, SchemaError, UndefinedMetricError
from strata.metrics import (
    auc,
    bootstrap_difference_test,
    confusion_at_threshold,
    roc_points,
    stratified_report,
)

from .conftest import make_set
from .oracles import pair_count_auc, trapezoid_area


def random_set(rng, n_max=200, tie_grid=20, tagged=False):
    """Random small set with deliberate score ties (scores on a coarse grid)."""
    while True:
        n = int(rng.integers(2, n_max + 1))
        y = rng.integers(0, 2, size=n).astype(bool)
        if y.any() and not y.all():
            break
    scores = rng.integers(0, tie_grid + 1, size=n) / tie_grid
    pos_scores = scores[y]
    neg_scores = scores[~y]
    pos_tags = None
    if tagged:
        pos_tags = [("T",) if rng.random() < 0.5 else () for _ in range(int(y.sum()))]
    return make_set(pos_scores, neg_scores, pos_tags=pos_tags)


class TestRocPoints:
    def test_perfect_separation_passes_corners(self):
        es = make_set([0.9, 0.8], [0.1, 0.2])
        pts = [(p[0], p[1]) for p in roc_points(es).points]
        for corner in [(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]:
            assert corner in pts

    def test_all_ties_is_chance_diagonal(self):
        es = make_set([0.5, 0.5], [0.5, 0.5])
        curve = roc_points(es)
        assert [(p[0], p[1]) for p in curve.points] == [(0.0, 0.0), (1.0, 1.0)]
        assert curve.trapezoid_area() == pytest.approx(0.5)

    def test_stepwise_example_area(self):
        es = make_set([0.8, 0.3], [0.5, 0.1])
        curve = roc_points(es)
        assert curve.trapezoid_area() == pytest.approx(0.75, abs=1e-12)

    def test_invariants_on_random_sets(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            es = random_set(rng, n_max=60)
            curve = roc_points(es)
            fpr, tpr, thr = curve.fpr, curve.tpr, curve.thresholds
            assert (fpr[0], tpr[0]) == (0.0, 0.0)
            assert (fpr[-1], tpr[-1]) == (1.0, 1.0)
            assert (np.diff(fpr) >= 0).all() and (np.diff(tpr) >= 0).all()
            assert (np.diff(thr) < 0).all()

    def test_errors(self):
        with pytest.raises(MetricError, match="no positives"):
            roc_points(make_set([], [0.5]))
        with pytest.raises(MetricError, match="no negatives"):
            roc_points(make_set([0.5], []))
        es = make_set([0.5], [0.2], pos_tags=[()])
        with pytest.raises(MetricError, match="'x'"):
            roc_points(es, positive_filter="x")


class TestAuc:
    def test_trivial_values(self):
        assert auc(make_set([0.9, 0.8], [0.1, 0.2])) == 1.0
        assert auc(make_set([0.5, 0.5], [0.5, 0.5])) == 0.5
        assert auc(make_set([0.8, 0.3], [0.5, 0.1])) == 0.75

    def test_matches_pair_counting_and_trapezoid(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            es = random_set(rng)
            pos = [r.score for r in es.positives()]
            neg = [r.score for r in es.negatives()]
            value = auc(es)
            assert value == pytest.approx(pair_count_auc(pos, neg), abs=1e-12)
            curve = roc_points(es)
            assert value == pytest.approx(
                trapezoid_area(curve.fpr, curve.tpr), abs=1e-12
            )

    def test_score_ordering_invariance(self):
        rng = np.random.default_rng(17)
        for _ in range(30):
            es = random_set(rng, n_max=80)
            # strictly increasing transforms that keep scores in [0, 1]
            squared = make_set(
                [r.score**2 for r in es.positives()],
                [r.score**2 for r in es.negatives()],
            )
            shrunk = make_set(
                [r.score / 2 + 0.25 for r in es.positives()],
                [r.score / 2 + 0.25 for r in es.negatives()],
            )
            assert auc(squared) == auc(es)
            assert auc(shrunk) == auc(es)
            base_pts = [(p[0], p[1]) for p in roc_points(es).points]
            assert [(p[0], p[1]) for p in roc_points(squared).points] == base_pts


class TestConfusion:
    def test_simple_counts(self):
        es = make_set([0.9, 0.4], [])
        conf = confusion_at_threshold(make_set([0.9, 0.4], [0.2]), 0.5)
        assert (conf.tp, conf.fn) == (1, 1)
        assert conf.sensitivity == 0.5

    def test_zero_threshold_predicts_everything_positive(self):
        conf = confusion_at_threshold(make_set([0.9, 0.0], [0.3, 0.0]), 0.0)
        assert conf.fn == 0 and conf.tn == 0
        assert conf.tp == 2 and conf.fp == 2

    def test_tie_at_threshold_counts_positive(self):
        conf = confusion_at_threshold(make_set([0.5], [0.5]), 0.5)
        assert conf.tp == 1 and conf.fp == 1

    def test_six_record_fixture_per_tag(self, six_record_set):
        a = confusion_at_threshold(six_record_set, 0.5, positive_filter="A")
        b = confusion_at_threshold(six_record_set, 0.5, positive_filter="B")
        overall = confusion_at_threshold(six_record_set, 0.5)
        assert a.sensitivity == 1.0
        assert b.sensitivity == 0.0
        assert overall.sensitivity == 0.5

    def test_partition_of_filtered_set(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            es = random_set(rng, n_max=60)
            t = float(rng.integers(0, 11)) / 10
            conf = confusion_at_threshold(es, t)
            assert conf.tp + conf.fn == len(es.positives())
            assert conf.fp + conf.tn == len(es.negatives())

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(23)
        for _ in range(60):
            es = random_set(rng, n_max=60)
            thresholds = np.linspace(0, 1, 21)
            sens = []
            spec = []
            for t in thresholds:
                conf = confusion_at_threshold(es, float(t))
                sens.append(conf.sensitivity)
                spec.append(conf.specificity)
            assert all(a >= b for a, b in zip(sens, sens[1:]))
            assert all(a <= b for a, b in zip(spec, spec[1:]))


class TestBootstrap:
    def test_tag_covering_all_positives(self):
        es = make_set([0.9, 0.6, 0.2], [0.3], pos_tags=[("T",), ("T",), ("T",)])
        delta, p = bootstrap_difference_test(es, "T", "sensitivity", b=200, seed=1)
        assert delta == 0.0
        assert p == 1.0

    def test_b_zero_rejected(self, six_record_set):
        with pytest.raises(ConfigError, match="b"):
            bootstrap_difference_test(six_record_set, "A", "sensitivity", b=0)

    def test_unknown_tag_rejected(self, six_record_set):
        with pytest.raises(MetricError, match="'zzz'"):
            bootstrap_difference_test(six_record_set, "zzz", "sensitivity")

    def test_undefined_ppv_raises(self):
        es = make_set([0.1, 0.2], [0.0], pos_tags=[("T",), ()])
        with pytest.raises(UndefinedMetricError, match="ppv.*'T'"):
            bootstrap_difference_test(es, "T", "ppv", threshold=0.9)

    def test_deterministic_given_seed(self, six_record_set):
        runs = {
            bootstrap_difference_test(six_record_set, "B", m, b=300, seed=9)
            for m in ("sensitivity", "auc")
            for _ in range(2)
        }
        assert len(runs) == 2  # each metric reproduced bit-identically

    def test_p_floor_respected(self):
        # huge planted gap: p bottoms out at 2/(b+1), never below 1/(b+1)
        pos = [0.9] * 50 + [0.1] * 50
        tags = [()] * 50 + [("B",)] * 50
        es = make_set(pos, [0.2, 0.3], pos_tags=tags)
        _, p = bootstrap_difference_test(es, "B", "sensitivity", b=99, seed=2)
        assert p == pytest.approx(2 / 100)

    def test_planted_gap_detected_and_binomial_agrees(self):
        from scipy.stats import fisher_exact

        from strata.synth import PlantConfig, SubclassSpec, generate_planted

        config = PlantConfig(
            n_pos=1000,
            n_neg=200,
            d=2,
            subclasses=(
                SubclassSpec("A", 0.8, 0.90, (0.0, 0.0)),
                SubclassSpec("B", 0.2, 0.55, (0.0, 0.0)),
            ),
            seed=42,
        )
        es, _ = generate_planted(config)
        delta, p = bootstrap_difference_test(es, "B", "sensitivity", b=1000, seed=7)
        assert delta < -0.25
        assert p < 0.01
        # independent check: exact test on the 2x2 hit table
        hits_b = sum(r.score >= 0.5 for r in es.positives() if "B" in r.tags)
        n_b = sum(1 for r in es.positives() if "B" in r.tags)
        hits_a = sum(r.score >= 0.5 for r in es.positives() if "B" not in r.tags)
        n_a = len(es.positives()) - n_b
        _, p_exact = fisher_exact(
            [[hits_b, n_b - hits_b], [hits_a, n_a - hits_a]]
        )
        assert p_exact < 0.01


class TestStratifiedReport:
    def test_six_record_fixture_rows(self, six_record_set, ab_schema):
        report = stratified_report(six_record_set, ab_schema, b=200, seed=0)
        rows = {r.tag: r for r in report.rows}
        assert rows["A"].sensitivity == 1.0
        assert rows["B"].sensitivity == 0.0
        assert report.overall.sensitivity == 0.5
        assert rows["A"].count == 2 and rows["A"].prevalence == 0.5

    def test_degenerate_subclass_equals_overall(self, ab_schema):
        es = make_set(
            [0.9, 0.7, 0.3], [0.4, 0.1], pos_tags=[("A",), ("A",), ("A",)]
        )
        report = stratified_report(es, ab_schema, b=300, seed=1)
        (row,) = report.rows
        assert row.tag == "A"
        assert row.sensitivity == report.overall.sensitivity
        assert row.auc == report.overall.auc
        assert row.p_sensitivity == 1.0
        assert not row.flagged

    def test_unknown_tags_block_report(self, ab_schema):
        es = make_set([0.9], [0.1], pos_tags=[("mystery",)])
        with pytest.raises(SchemaError, match="mystery"):
            stratified_report(es, ab_schema, b=10)

    def test_zero_count_tags_skipped(self, ab_schema):
        es = make_set([0.9, 0.2], [0.1], pos_tags=[("A",), ("A",)])
        report = stratified_report(es, ab_schema, b=50, seed=0)
        assert [r.tag for r in report.rows] == ["A"]

    def test_deterministic(self, six_record_set, ab_schema):
        r1 = stratified_report(six_record_set, ab_schema, b=200, seed=5)
        r2 = stratified_report(six_record_set, ab_schema, b=200, seed=5)
        assert r1.to_json_dict() == r2.to_json_dict()

    def test_subclass_decomposition_exact(self, ab_schema):
        # exclusive full-cover axis: per-tag tp sums to overall tp and the
        # prevalence-weighted sensitivity mean equals overall, in exact arithmetic
        rng = np.random.default_rng(31)
        for _ in range(30):
            n = int(rng.integers(2, 40))
            scores = rng.integers(0, 11, size=n) / 10
            tags = [("A",) if rng.random() < 0.5 else ("B",) for _ in range(n)]
            es = make_set(scores, [0.2, 0.6], pos_tags=tags)
            t = 0.5
            per_tag_tp = 0
            weighted = Fraction(0)
            total = Fraction(0)
            for tag in ("A", "B"):
                conf = confusion_at_threshold(es, t, positive_filter=tag)
                if conf.tp + conf.fn == 0:
                    continue
                per_tag_tp += conf.tp
                weighted += Fraction(conf.tp + conf.fn, n) * Fraction(
                    conf.tp, conf.tp + conf.fn
                )
                total += Fraction(conf.tp + conf.fn, n)
            overall = confusion_at_threshold(es, t)
            assert per_tag_tp == overall.tp
            assert total == 1
            assert weighted == Fraction(overall.tp, n)

    def test_flag_requires_worse_and_significant(self):
        # planted degradation: subclass B much worse; A should not be flagged
        from strata.model import Axis, Schema, TagDef
        from strata.synth import PlantConfig, SubclassSpec, generate_planted

        schema = Schema(
            "task", (Axis("kind", (TagDef("A"), TagDef("B")), exclusive=True),)
        )
        config = PlantConfig(
            n_pos=800,
            n_neg=400,
            d=2,
            subclasses=(
                SubclassSpec("A", 0.7, 0.95, (0.0, 0.0)),
                SubclassSpec("B", 0.3, 0.55, (0.0, 0.0)),
            ),
            seed=11,
        )
        es, _ = generate_planted(config)
        report = stratified_report(es, schema, b=500, seed=3)
        rows = {r.tag: r for r in report.rows}
        assert rows["B"].flagged
        assert rows["B"].p_sensitivity <= 0.05
        assert rows["B"].sensitivity < report.overall.sensitivity
        assert not rows["A"].flagged

    def test_report_json_shape(self, six_record_set, ab_schema):
        obj = stratified_report(six_record_set, ab_schema, b=100, seed=0).to_json_dict()
        assert set(obj) == {"overall", "rows", "threshold", "alpha", "bootstrap_b", "seed"}
        for row in [obj["overall"], *obj["rows"]]:
            assert {
                "tag",
                "count",
                "prevalence",
                "sensitivity",
                "ppv",
                "auc",
                "p_sensitivity",
                "p_auc",
                "flagged",
            } <= set(row)

    def test_hip_style_documentation_fixture(self, hip_schema):
        # paper-shaped rendering check: 81 cervical positives out of 643 show
        # up as "0.13 (81)" with a low sensitivity; exact metric values come
        # from the fixture, only the table shape is under test
        rng = np.random.default_rng(643)
        counts = {
            "subcapital": 169,
            "cervical": 81,
            "pertrochanteric": 319,
            "subtrochanteric": 29,
        }
        sens = {"subcapital": 0.99, "cervical": 0.90, "pertrochanteric": 1.0, "subtrochanteric": 0.96}
        scores, tags = [], []
        for tag, count in counts.items():
            hits = round(count * sens[tag])
            for i in range(count):
                scores.append(0.6 + 0.4 * rng.random() if i < hits else 0.4 * rng.random())
                tags.append((tag,))
        for _ in range(643 - sum(counts.values())):  # untagged positives
            scores.append(0.6 + 0.4 * rng.random())
            tags.append(())
        order = rng.permutation(len(scores))
        es = make_set(
            [scores[i] for i in order],
            0.45 * rng.random(600),
            pos_tags=[tags[i] for i in order],
        )
        assert len(es.positives()) == 643
        report = stratified_report(es, hip_schema, b=400, seed=1)
        assert report.overall.count == 643
        table = report.render_table()
        cervical_line = next(l for l in table.splitlines() if l.startswith("cervical"))
        assert "0.13 (81)" in cervical_line  # 81/643 renders paper-style
        row = next(r for r in report.rows if r.tag == "cervical")
        assert row.count == 81
        assert row.flagged  # significantly worse than overall

    def test_table_renders_overall_first_with_flags(self, ab_schema):
        es = make_set(
            [0.9, 0.9, 0.1, 0.2, 0.9, 0.85, 0.95, 0.88],
            [0.3, 0.2, 0.1, 0.4],
            pos_tags=[("A",), ("A",), ("B",), ("B",), ("A",), ("A",), ("A",), ("A",)],
        )
        table = stratified_report(es, ab_schema, b=500, seed=0).render_table()
        lines = table.splitlines()
        assert lines[0].startswith("subclass")
        assert lines[2].startswith("overall")
        b_line = next(line for line in lines if line.startswith("B"))
        assert b_line.rstrip().endswith("*")
