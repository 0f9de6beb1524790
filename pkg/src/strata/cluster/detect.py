"""Algorithmic slice discovery: k-means over positives' embeddings, selection
of the high/low error cluster pair, and per-tag composition of the chosen pair.

Procedure, end to end: cluster the superclass positives' embedding vectors
for each k in ks; within each k keep the pair of size-qualified clusters with
the largest error-rate difference; across k choose the pair whose centroids
are farthest apart (Euclidean). Error means false negative at the operating
threshold (score < threshold on a true positive).

A cluster qualifies when it has strictly more than min_size points. Ties are
broken deterministically: within a k, the lexicographically smallest
(high, low) index pair; across k, the smallest k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ClusterError
from ..model import EvaluationSet, Schema
from .kmeans import ClusterAssignment, kmeans

__all__ = [
    "ClusterPair",
    "TagComposition",
    "ClusterFinding",
    "error_vector",
    "select_error_cluster_pair",
    "cluster_composition",
    "detect_hidden_strata",
]

DEFAULT_KS = (2, 3, 4, 5)
DEFAULT_MIN_SIZE = 100


@dataclass(frozen=True)
class ClusterPair:
    """A high/low error cluster pair within one k-means run."""

    k: int
    high: int
    low: int
    high_error: float
    low_error: float
    high_size: int
    low_size: int
    centroid_distance: float

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "high": self.high,
            "low": self.low,
            "high_error": self.high_error,
            "low_error": self.low_error,
            "high_size": self.high_size,
            "low_size": self.low_size,
            "centroid_distance": self.centroid_distance,
        }


@dataclass(frozen=True)
class TagComposition:
    """Prevalence of one tag inside the chosen clusters and overall."""

    tag: str
    high: float
    low: float
    overall: float

    @property
    def difference(self) -> float:
        return abs(self.high - self.low)

    def to_json_dict(self) -> dict:
        return {
            "tag": self.tag,
            "high": self.high,
            "low": self.low,
            "overall": self.overall,
            "difference": self.difference,
        }


@dataclass(frozen=True)
class ClusterFinding:
    """Outcome of a detection run over all requested k values.

    chosen is None when no k produced a qualifying pair; diagnostics then
    explains per k why (too few qualifying clusters, k > n, ...).
    """

    chosen: ClusterPair | None
    candidates: tuple[ClusterPair, ...]
    composition: tuple[TagComposition, ...]
    ks: tuple[int, ...]
    min_size: int
    threshold: float
    seed: int
    normalize: bool
    diagnostics: dict[int, str]

    def to_json_dict(self) -> dict:
        return {
            "chosen": self.chosen.to_json_dict() if self.chosen else None,
            "candidates": [c.to_json_dict() for c in self.candidates],
            "composition": [c.to_json_dict() for c in self.composition],
            "config": {
                "ks": list(self.ks),
                "min_size": self.min_size,
                "threshold": self.threshold,
                "seed": self.seed,
                "normalize": self.normalize,
            },
            "diagnostics": {str(k): v for k, v in sorted(self.diagnostics.items())},
        }

    def render_table(self) -> str:
        """Text table mirroring a subclass-prevalence-by-cluster layout."""
        lines = []
        if self.chosen is None:
            lines.append("no qualifying cluster pair found")
            for k, reason in sorted(self.diagnostics.items()):
                lines.append(f"  k={k}: {reason}")
            return "\n".join(lines)
        c = self.chosen
        lines.append(
            f"chosen k={c.k}: high-error cluster {c.high} "
            f"(error {c.high_error:.3f}, n={c.high_size}) vs "
            f"low-error cluster {c.low} (error {c.low_error:.3f}, n={c.low_size}), "
            f"centroid distance {c.centroid_distance:.3f}"
        )
        header = (
            f"{'subclass':<22} {'difference (high, low)':>24} {'overall prevalence':>19}"
        )
        lines.append(header)
        lines.append("-" * len(header))
        for comp in self.composition:
            pair = f"{comp.difference:.2f} ({comp.high:.2f}, {comp.low:.2f})"
            lines.append(f"{comp.tag:<22} {pair:>24} {comp.overall:>19.2f}")
        return "\n".join(lines)


def error_vector(evalset: EvaluationSet, threshold: float = 0.5) -> np.ndarray:
    """Per-positive error indicator, aligned with evalset.positives() order.

    An error is a false negative at the operating point: score < threshold.
    """
    return np.array([r.score < threshold for r in evalset.positives()], dtype=bool)


def select_error_cluster_pair(
    assignment: ClusterAssignment,
    errors: np.ndarray,
    min_size: int,
) -> ClusterPair | None:
    """The pair of qualifying clusters (size strictly greater than min_size)
    with the largest error-rate difference, or None if fewer than two qualify."""
    if errors.shape[0] != assignment.labels.shape[0]:
        raise ClusterError(
            f"errors length {errors.shape[0]} does not match "
            f"{assignment.labels.shape[0]} clustered points"
        )
    sizes = assignment.sizes()
    qualifying = np.flatnonzero(sizes > min_size)
    if qualifying.size < 2:
        return None

    rates = {
        int(c): float(errors[assignment.labels == c].mean()) for c in qualifying
    }
    best: tuple[float, int, int] | None = None
    for high in qualifying:
        for low in qualifying:
            if high == low or rates[int(high)] < rates[int(low)]:
                continue
            diff = rates[int(high)] - rates[int(low)]
            key = (-diff, int(high), int(low))
            if best is None or key < best:
                best = key
    assert best is not None
    _, high, low = best
    centroid_distance = float(
        np.linalg.norm(assignment.centroids[high] - assignment.centroids[low])
    )
    return ClusterPair(
        k=assignment.k,
        high=high,
        low=low,
        high_error=rates[high],
        low_error=rates[low],
        high_size=int(sizes[high]),
        low_size=int(sizes[low]),
        centroid_distance=centroid_distance,
    )


def cluster_composition(
    assignment: ClusterAssignment,
    pair: ClusterPair,
    evalset: EvaluationSet,
    schema: Schema | None,
) -> tuple[TagComposition, ...]:
    """Per-tag prevalence within the high cluster, the low cluster and overall.

    Tags come from the schema when given, else the tags observed on the
    positives (sorted). Prevalences are fractions of cluster membership, so a
    tag absent from both clusters but present elsewhere reports (0, 0, >0).
    """
    positives = evalset.positives()
    if len(positives) != assignment.labels.shape[0]:
        raise ClusterError(
            f"assignment covers {assignment.labels.shape[0]} points but the set "
            f"has {len(positives)} positives"
        )
    if not (0 <= pair.high < assignment.k and 0 <= pair.low < assignment.k):
        raise ClusterError(f"pair clusters ({pair.high}, {pair.low}) not in assignment")

    if schema is not None:
        tags = schema.tag_names()
    else:
        tags = tuple(sorted({t for r in positives for t in r.tags}))

    high_mask = assignment.labels == pair.high
    low_mask = assignment.labels == pair.low
    n_high = int(high_mask.sum())
    n_low = int(low_mask.sum())
    n_all = len(positives)

    composition = []
    for tag in tags:
        carried = np.array([tag in r.tags for r in positives], dtype=bool)
        composition.append(
            TagComposition(
                tag=tag,
                high=float(carried[high_mask].mean()) if n_high else 0.0,
                low=float(carried[low_mask].mean()) if n_low else 0.0,
                overall=float(carried.mean()) if n_all else 0.0,
            )
        )
    return tuple(composition)


def _embedding_matrix(evalset: EvaluationSet) -> np.ndarray:
    positives = evalset.positives()
    if not positives:
        raise ClusterError("no superclass positives to cluster")
    missing = [r.id for r in positives if r.embedding is None]
    if missing:
        raise ClusterError(
            f"{len(missing)} positive record(s) have no embedding "
            f"(first: {missing[0]!r}); detection clusters embedding vectors"
        )
    return np.array([r.embedding for r in positives], dtype=np.float64)


def detect_hidden_strata(
    evalset: EvaluationSet,
    schema: Schema | None = None,
    ks: tuple[int, ...] = DEFAULT_KS,
    min_size: int = DEFAULT_MIN_SIZE,
    threshold: float = 0.5,
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-6,
    normalize: bool = False,
) -> ClusterFinding:
    """Run the full detection procedure over the superclass positives.

    Deterministic given seed: the run for each k uses seed + k. normalize
    optionally z-scores each embedding dimension first (pre-softmax features
    are already in model space, so the default leaves them untouched).
    """
    if not ks:
        raise ClusterError("ks must be non-empty")
    x = _embedding_matrix(evalset)
    if normalize:
        std = x.std(axis=0)
        std[std == 0.0] = 1.0
        x = (x - x.mean(axis=0)) / std
    errors = error_vector(evalset, threshold)

    candidates: list[ClusterPair] = []
    diagnostics: dict[int, str] = {}
    for k in sorted(set(ks)):
        if k > x.shape[0]:
            diagnostics[k] = f"k={k} exceeds the {x.shape[0]} positive points"
            continue
        assignment = kmeans(x, k, seed=seed + k, max_iter=max_iter, tol=tol)
        pair = select_error_cluster_pair(assignment, errors, min_size)
        if pair is None:
            sizes = assignment.sizes()
            diagnostics[k] = (
                f"fewer than 2 clusters larger than {min_size} "
                f"(sizes {sorted(sizes.tolist(), reverse=True)})"
            )
            continue
        candidates.append(pair)
        diagnostics[k] = (
            f"pair ({pair.high}, {pair.low}), error difference "
            f"{pair.high_error - pair.low_error:.3f}"
        )

    chosen: ClusterPair | None = None
    for pair in candidates:  # ks ascending, strict > keeps the smallest k on ties
        if chosen is None or pair.centroid_distance > chosen.centroid_distance:
            chosen = pair

    composition: tuple[TagComposition, ...] = ()
    if chosen is not None:
        assignment = kmeans(x, chosen.k, seed=seed + chosen.k, max_iter=max_iter, tol=tol)
        composition = cluster_composition(assignment, chosen, evalset, schema)

    return ClusterFinding(
        chosen=chosen,
        candidates=tuple(candidates),
        composition=composition,
        ks=tuple(ks),
        min_size=min_size,
        threshold=threshold,
        seed=seed,
        normalize=normalize,
        diagnostics=diagnostics,
    )
