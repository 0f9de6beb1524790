"""Stratified performance measurement.

Per-subclass sensitivity, PPV and ROC/AUC, plus a bootstrap test of the
subclass-vs-overall difference. Subclass conventions, fixed once here and
used everywhere:

* Subclass positives are the superclass positives carrying the tag; the
  negatives are always the full superclass negative pool (subclasses define
  no negatives of their own).
* A prediction is positive iff score >= threshold (closed on the positive
  side), default threshold 0.5.
* Subclass PPV = subclass TP / (subclass TP + all FP): false positives are
  not attributable to any subclass, so they are charged in full.

AUC is the Mann-Whitney statistic (ties count half), computed from tie-aware
ranks; it equals the trapezoidal area under the corresponding ROC curve.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import ConfigError, MetricError, SchemaError, UndefinedMetricError
from .model import EvaluationSet, Schema, validate_against_schema

__all__ = [
    "RocCurve",
    "ConfusionCounts",
    "SubclassRow",
    "StratifiedReport",
    "roc_points",
    "auc",
    "confusion_at_threshold",
    "bootstrap_difference_test",
    "stratified_report",
]

# Thresholds are real scores except the leading ROC anchor, which must exceed
# every admissible score; scores live in [0, 1] so 2.0 is safely above all.
ROC_ANCHOR_THRESHOLD = 2.0

METRIC_NAMES = ("sensitivity", "auc", "ppv")


@dataclass(frozen=True)
class RocCurve:
    """ROC curve over all distinct score thresholds.

    points run from (0, 0) at the anchor threshold down to (1, 1) at the
    minimum score; fpr and tpr are non-decreasing, thresholds strictly
    decreasing. Tie blocks appear as single points, so the polyline through
    the points (area under it = AUC) handles ties exactly.
    """

    points: tuple[tuple[float, float, float], ...]  # (fpr, tpr, threshold)

    @property
    def fpr(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def tpr(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    @property
    def thresholds(self) -> np.ndarray:
        return np.array([p[2] for p in self.points])

    def trapezoid_area(self) -> float:
        return float(np.trapezoid(self.tpr, self.fpr))

    def to_json(self) -> list[list[float]]:
        return [[p[0], p[1]] for p in self.points]


@dataclass(frozen=True)
class ConfusionCounts:
    """Confusion cells at one operating threshold.

    tp + fn equals the positive count of the (filtered) universe and fp + tn
    the negative count.
    """

    tp: int
    fp: int
    tn: int
    fn: int
    threshold: float

    @property
    def sensitivity(self) -> float | None:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else None

    @property
    def specificity(self) -> float | None:
        return self.tn / (self.tn + self.fp) if self.tn + self.fp else None

    @property
    def ppv(self) -> float | None:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else None


@dataclass(frozen=True)
class SubclassRow:
    """One report row; mirrors the columns of a stratified performance table."""

    tag: str
    count: int
    prevalence: float
    sensitivity: float | None
    ppv: float | None
    auc: float | None
    p_sensitivity: float | None
    p_auc: float | None
    flagged: bool
    note: str | None = None
    roc: RocCurve | None = None

    def to_json_dict(self) -> dict:
        return {
            "tag": self.tag,
            "count": self.count,
            "prevalence": self.prevalence,
            "sensitivity": self.sensitivity,
            "ppv": self.ppv,
            "auc": self.auc,
            "p_sensitivity": self.p_sensitivity,
            "p_auc": self.p_auc,
            "flagged": self.flagged,
            "note": self.note,
            "roc": self.roc.to_json() if self.roc is not None else None,
        }


@dataclass(frozen=True)
class StratifiedReport:
    """Per-subclass performance next to the overall task, with significance flags."""

    overall: SubclassRow
    rows: tuple[SubclassRow, ...]
    threshold: float
    alpha: float
    bootstrap_b: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "overall": self.overall.to_json_dict(),
            "rows": [r.to_json_dict() for r in self.rows],
            "threshold": self.threshold,
            "alpha": self.alpha,
            "bootstrap_b": self.bootstrap_b,
            "seed": self.seed,
        }

    def render_table(self) -> str:
        """Text table: subclass, prevalence (count), sensitivity, ppv, auc, p-values.

        Prevalence rounds to 2 decimals and metrics to 3, matching the usual
        presentation of stratified results; flagged rows carry a trailing *.
        """

        def fmt(value: float | None, digits: int = 3) -> str:
            return f"{value:.{digits}f}" if value is not None else "-"

        header = (
            f"{'subclass':<22} {'prevalence (count)':>18} {'sensitivity':>11} "
            f"{'ppv':>7} {'auc':>7} {'p(sens)':>8} {'p(auc)':>8}"
        )
        lines = [header, "-" * len(header)]
        for row in (self.overall, *self.rows):
            prev = f"{row.prevalence:.2f} ({row.count})"
            flag = " *" if row.flagged else ""
            lines.append(
                f"{row.tag:<22} {prev:>18} {fmt(row.sensitivity):>11} "
                f"{fmt(row.ppv):>7} {fmt(row.auc):>7} {fmt(row.p_sensitivity):>8} "
                f"{fmt(row.p_auc):>8}{flag}"
            )
        lines.append(
            f"threshold={self.threshold} alpha={self.alpha} "
            f"bootstrap_b={self.bootstrap_b} seed={self.seed}"
        )
        return "\n".join(lines)


def _filtered_scores(
    evalset: EvaluationSet, positive_filter: str | None
) -> tuple[np.ndarray, np.ndarray]:
    """(positive scores after filtering, all negative scores)."""
    pos = np.array([r.score for r in evalset.records if r.y_true], dtype=float)
    neg = np.array([r.score for r in evalset.records if not r.y_true], dtype=float)
    if positive_filter is not None:
        mask = np.array(
            [positive_filter in r.tags for r in evalset.records if r.y_true], dtype=bool
        )
        pos = pos[mask]
    return pos, neg


def roc_points(evalset: EvaluationSet, positive_filter: str | None = None) -> RocCurve:
    """ROC curve for the (optionally tag-filtered) positives vs all negatives."""
    pos, neg = _filtered_scores(evalset, positive_filter)
    if pos.size == 0:
        raise MetricError(
            "no positives"
            + (f" carrying tag {positive_filter!r}" if positive_filter else "")
        )
    if neg.size == 0:
        raise MetricError("no negatives in set")

    scores = np.concatenate([pos, neg])
    is_pos = np.concatenate([np.ones(pos.size, bool), np.zeros(neg.size, bool)])
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    tp_cum = np.cumsum(is_pos[order])
    fp_cum = np.cumsum(~is_pos[order])

    # one point per distinct score: the last index of each tie block
    boundary = np.r_[np.flatnonzero(np.diff(sorted_scores) != 0), scores.size - 1]
    points = [(0.0, 0.0, ROC_ANCHOR_THRESHOLD)]
    points.extend(
        (float(fp_cum[i] / neg.size), float(tp_cum[i] / pos.size), float(sorted_scores[i]))
        for i in boundary
    )
    return RocCurve(points=tuple(points))


def _rank_auc(pos: np.ndarray, neg: np.ndarray) -> float:
    """Mann-Whitney AUC from tie-averaged ranks; exact for tied scores."""
    ranks = rankdata(np.concatenate([pos, neg]))
    u = ranks[: pos.size].sum() - pos.size * (pos.size + 1) / 2.0
    return float(u / (pos.size * neg.size))


def auc(evalset: EvaluationSet, positive_filter: str | None = None) -> float:
    """Probability that a random (filtered) positive outscores a random negative."""
    pos, neg = _filtered_scores(evalset, positive_filter)
    if pos.size == 0:
        raise MetricError(
            "no positives"
            + (f" carrying tag {positive_filter!r}" if positive_filter else "")
        )
    if neg.size == 0:
        raise MetricError("no negatives in set")
    return _rank_auc(pos, neg)


def confusion_at_threshold(
    evalset: EvaluationSet, threshold: float, positive_filter: str | None = None
) -> ConfusionCounts:
    """Confusion counts with predicted positive iff score >= threshold.

    With a filter, the universe is the tagged positives plus all negatives.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError(f"threshold {threshold!r} outside [0, 1]")
    pos, neg = _filtered_scores(evalset, positive_filter)
    tp = int((pos >= threshold).sum())
    fp = int((neg >= threshold).sum())
    return ConfusionCounts(
        tp=tp, fp=fp, tn=int(neg.size - fp), fn=int(pos.size - tp), threshold=threshold
    )


def _observed_metric(
    metric: str,
    pos: np.ndarray,
    tag_mask: np.ndarray,
    neg: np.ndarray,
    threshold: float,
    tag: str,
) -> tuple[float, float]:
    """(subclass value, overall value) on the original sample."""
    if metric == "sensitivity":
        return float((pos[tag_mask] >= threshold).mean()), float((pos >= threshold).mean())
    if metric == "auc":
        if neg.size == 0:
            raise MetricError("no negatives in set")
        return _rank_auc(pos[tag_mask], neg), _rank_auc(pos, neg)
    if metric == "ppv":
        fp = int((neg >= threshold).sum())
        tp_sub = int((pos[tag_mask] >= threshold).sum())
        tp_all = int((pos >= threshold).sum())
        if tp_sub + fp == 0:
            raise UndefinedMetricError(
                f"ppv undefined for tag {tag!r}: no predicted positives at threshold {threshold}"
            )
        if tp_all + fp == 0:
            raise UndefinedMetricError(
                f"ppv undefined overall: no predicted positives at threshold {threshold}"
            )
        return tp_sub / (tp_sub + fp), tp_all / (tp_all + fp)
    raise ConfigError(f"unknown metric {metric!r} (expected one of {METRIC_NAMES})")


def _bootstrap_deltas(
    metric: str,
    pos: np.ndarray,
    tag_mask: np.ndarray,
    neg: np.ndarray,
    threshold: float,
    b: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Resampled subclass-minus-overall deltas; invalid replicates dropped.

    Positives are always resampled; negatives only where the metric uses
    them. Subclass and overall values share each replicate's resample, which
    keeps the difference paired.
    """
    n_pos = pos.size
    idx_p = rng.integers(0, n_pos, size=(b, n_pos))
    hits = pos[idx_p] >= threshold
    tmask = tag_mask[idx_p]
    sub_n = tmask.sum(axis=1)

    if metric == "sensitivity":
        with np.errstate(invalid="ignore"):
            sub = (hits & tmask).sum(axis=1) / sub_n
        deltas = sub - hits.mean(axis=1)
        return deltas[sub_n > 0]

    idx_n = rng.integers(0, neg.size, size=(b, neg.size))

    if metric == "ppv":
        fp = (neg[idx_n] >= threshold).sum(axis=1)
        tp_all = hits.sum(axis=1)
        tp_sub = (hits & tmask).sum(axis=1)
        den_sub = tp_sub + fp
        den_all = tp_all + fp
        valid = (sub_n > 0) & (den_sub > 0) & (den_all > 0)
        with np.errstate(invalid="ignore", divide="ignore"):
            deltas = tp_sub / den_sub - tp_all / den_all
        return deltas[valid]

    # auc: rank statistic per replicate
    deltas = np.empty(b)
    valid = np.zeros(b, dtype=bool)
    for i in range(b):
        p_star = pos[idx_p[i]]
        t_star = tag_mask[idx_p[i]]
        if not t_star.any():
            continue
        n_star = neg[idx_n[i]]
        deltas[i] = _rank_auc(p_star[t_star], n_star) - _rank_auc(p_star, n_star)
        valid[i] = True
    return deltas[valid]


def bootstrap_difference_test(
    evalset: EvaluationSet,
    tag: str,
    metric: str,
    threshold: float = 0.5,
    b: int = 1000,
    seed: int = 0,
) -> tuple[float, float]:
    """Case-level bootstrap test of subclass-vs-overall metric difference.

    Returns (delta, p_value) where delta = metric(subclass) - metric(overall)
    on the original set and the two-sided p-value counts, over b resamples,
    how often the resampled delta falls on either side of zero, with the
    (r+1)/(b+1) correction (so p >= 1/(b+1); replicates where the metric is
    undefined are excluded from the count).
    """
    if b < 1:
        raise ConfigError(f"bootstrap b must be >= 1, got {b}")
    if metric not in METRIC_NAMES:
        raise ConfigError(f"unknown metric {metric!r} (expected one of {METRIC_NAMES})")

    pos, neg = _filtered_scores(evalset, None)
    if pos.size == 0:
        raise MetricError("no positives in set")
    tag_mask = np.array([tag in r.tags for r in evalset.records if r.y_true], dtype=bool)
    if not tag_mask.any():
        raise MetricError(f"tag {tag!r} is carried by no positive record")

    sub_value, all_value = _observed_metric(metric, pos, tag_mask, neg, threshold, tag)
    delta = sub_value - all_value

    rng = np.random.default_rng(seed)
    deltas = _bootstrap_deltas(metric, pos, tag_mask, neg, threshold, b, rng)
    b_eff = deltas.size
    if b_eff == 0:
        return delta, 1.0
    r_le = int((deltas <= 0).sum())
    r_ge = int((deltas >= 0).sum())
    p_value = min(1.0, 2.0 * min(r_le + 1, r_ge + 1) / (b_eff + 1))
    return delta, p_value


def _derive_seed(seed: int, tag: str, slot: int) -> int:
    """Independent substream seed per (tag, metric) pair.

    Keyed by tag identity, not row position, so adding or removing other
    rows never perturbs an existing row's bootstrap.
    """
    digest = int.from_bytes(hashlib.sha256(tag.encode()).digest()[:8], "big")
    return int(
        np.random.SeedSequence([seed, digest, slot]).generate_state(1, dtype=np.uint64)[0]
    )


def stratified_report(
    evalset: EvaluationSet,
    schema: Schema,
    threshold: float = 0.5,
    alpha: float = 0.05,
    b: int = 1000,
    seed: int = 0,
) -> StratifiedReport:
    """One row per schema tag present on the positives, next to the overall row.

    A row is flagged when it is significantly *worse* than the overall task:
    p <= alpha for sensitivity or AUC with the subclass value below the
    overall value. Per-row metric failures (e.g. undefined PPV) become null
    metrics with a note rather than aborting the report. Deterministic for a
    given seed: each row uses its own derived bootstrap substream.
    """
    if b < 1:
        raise ConfigError(f"bootstrap b must be >= 1, got {b}")
    if seed < 0:
        raise ConfigError(f"seed must be non-negative, got {seed}")
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError(f"threshold {threshold!r} outside [0, 1]")

    validation = validate_against_schema(evalset, schema)
    if validation.unknown_tags:
        rid, tag = validation.unknown_tags[0]
        raise SchemaError(
            f"{len(validation.unknown_tags)} tag(s) not in schema "
            f"(first: {tag!r} on record {rid!r})"
        )

    positives = evalset.positives()
    if not positives:
        raise MetricError("no positives in set")
    if not evalset.negatives():
        raise MetricError("no negatives in set")
    n_pos = len(positives)

    overall_conf = confusion_at_threshold(evalset, threshold)
    overall_sens = overall_conf.sensitivity
    overall_auc = auc(evalset)
    overall = SubclassRow(
        tag="overall",
        count=n_pos,
        prevalence=1.0,
        sensitivity=overall_sens,
        ppv=overall_conf.ppv,
        auc=overall_auc,
        p_sensitivity=None,
        p_auc=None,
        flagged=False,
        note=None if overall_conf.ppv is not None else "ppv undefined: no predicted positives",
        roc=roc_points(evalset),
    )

    rows: list[SubclassRow] = []
    for tag in schema.tag_names():
        count = sum(1 for r in positives if tag in r.tags)
        if count == 0:
            continue
        conf = confusion_at_threshold(evalset, threshold, positive_filter=tag)
        notes: list[str] = []
        ppv = conf.ppv
        if ppv is None:
            notes.append("ppv undefined: no predicted positives")
        tag_auc = auc(evalset, positive_filter=tag)
        _, p_sens = bootstrap_difference_test(
            evalset, tag, "sensitivity", threshold, b, _derive_seed(seed, tag, 0)
        )
        _, p_auc = bootstrap_difference_test(
            evalset, tag, "auc", threshold, b, _derive_seed(seed, tag, 1)
        )
        sens = conf.sensitivity
        flagged = bool(
            (p_sens <= alpha and sens is not None and overall_sens is not None and sens < overall_sens)
            or (p_auc <= alpha and tag_auc < overall_auc)
        )
        rows.append(
            SubclassRow(
                tag=tag,
                count=count,
                prevalence=count / n_pos,
                sensitivity=sens,
                ppv=ppv,
                auc=tag_auc,
                p_sensitivity=p_sens,
                p_auc=p_auc,
                flagged=flagged,
                note="; ".join(notes) or None,
                roc=roc_points(evalset, positive_filter=tag),
            )
        )

    return StratifiedReport(
        overall=overall,
        rows=tuple(rows),
        threshold=threshold,
        alpha=alpha,
        bootstrap_b=b,
        seed=seed,
    )
