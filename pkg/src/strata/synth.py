"""Deterministic generator of evaluation sets with planted subclass strata.

Each planted subclass controls the four causal knobs a hidden stratum can
have: its prevalence (fraction), its model performance (target sensitivity
at the operating threshold), its label quality (label_flip_rate: members
whose superclass label is flipped to negative while keeping their appearance)
and its separability in embedding space (an isotropic Gaussian blob at
blob_center with blob_sigma).

Scores are drawn from a per-subclass Beta shape calibrated so its exceedance
at the threshold matches the target sensitivity, then split into exact hit
and miss counts by truncated inverse-CDF sampling, so the empirical
sensitivity equals the target to within rounding (|h/m - s| <= 0.5/m).
Negative scores come straight from the configured Beta; negative embeddings
from a unit blob at the origin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import brentq
from scipy.stats import beta as beta_dist

from .errors import ConfigError
from .model import EvaluationSet, Record

__all__ = ["SubclassSpec", "PlantConfig", "generate_planted", "load_plant_config"]

# spread of the calibrated per-subclass score Beta (a+b); smooth ROC-shaped
# score distributions without putting all mass at the threshold
SCORE_CONCENTRATION = 10.0


@dataclass(frozen=True)
class SubclassSpec:
    tag: str
    fraction: float
    sensitivity: float
    blob_center: tuple[float, ...]
    blob_sigma: float = 1.0
    label_flip_rate: float = 0.0


@dataclass(frozen=True)
class PlantConfig:
    n_pos: int
    n_neg: int
    d: int
    subclasses: tuple[SubclassSpec, ...]
    neg_score_beta: tuple[float, float] = (1.0, 4.0)
    threshold: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_pos < 1 or self.n_neg < 0:
            raise ConfigError(f"need n_pos >= 1 and n_neg >= 0, got {self.n_pos}/{self.n_neg}")
        if self.d < 1:
            raise ConfigError(f"embedding dimension must be >= 1, got {self.d}")
        if not self.subclasses:
            raise ConfigError("at least one subclass is required")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(
                f"threshold must be strictly inside (0, 1) to plant sensitivities, "
                f"got {self.threshold}"
            )
        total = sum(s.fraction for s in self.subclasses)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"subclass fractions sum to {total!r}, expected 1")
        tags = [s.tag for s in self.subclasses]
        if len(set(tags)) != len(tags):
            raise ConfigError(f"duplicate subclass tags in {tags}")
        for spec in self.subclasses:
            if not 0.0 <= spec.sensitivity <= 1.0:
                raise ConfigError(f"subclass {spec.tag!r}: sensitivity outside [0, 1]")
            if not 0.0 <= spec.label_flip_rate <= 1.0:
                raise ConfigError(f"subclass {spec.tag!r}: label_flip_rate outside [0, 1]")
            if spec.blob_sigma <= 0.0:
                raise ConfigError(f"subclass {spec.tag!r}: blob_sigma must be > 0")
            if len(spec.blob_center) != self.d:
                raise ConfigError(
                    f"subclass {spec.tag!r}: blob_center has dimension "
                    f"{len(spec.blob_center)}, config d={self.d}"
                )
        a, b = self.neg_score_beta
        if a <= 0 or b <= 0:
            raise ConfigError(f"neg_score_beta parameters must be positive, got {a}/{b}")


def load_plant_config(path: str | Path) -> PlantConfig:
    with open(path, encoding="utf-8") as handle:
        try:
            obj = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    try:
        subclasses = tuple(
            SubclassSpec(
                tag=s["tag"],
                fraction=float(s["fraction"]),
                sensitivity=float(s["sensitivity"]),
                blob_center=tuple(float(v) for v in s["blob_center"]),
                blob_sigma=float(s.get("blob_sigma", 1.0)),
                label_flip_rate=float(s.get("label_flip_rate", 0.0)),
            )
            for s in obj["subclasses"]
        )
        return PlantConfig(
            n_pos=int(obj["n_pos"]),
            n_neg=int(obj["n_neg"]),
            d=int(obj["d"]),
            subclasses=subclasses,
            neg_score_beta=tuple(float(v) for v in obj.get("neg_score_beta", (1.0, 4.0))),
            threshold=float(obj.get("threshold", 0.5)),
            seed=int(obj.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed planted-set config ({exc})") from None


def largest_remainder(fractions: list[float], total: int) -> list[int]:
    """Apportion total into integer counts proportional to fractions; the
    leftover seats go to the largest fractional remainders (ties to the
    earlier entry)."""
    exact = [f * total for f in fractions]
    counts = [int(np.floor(e)) for e in exact]
    remainder = total - sum(counts)
    order = sorted(range(len(fractions)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[:remainder]:
        counts[i] += 1
    return counts


def _calibrated_beta(sensitivity: float, threshold: float) -> tuple[float, float]:
    """Beta(a, b) whose exceedance at threshold matches the target (clipped
    away from 0/1 so the shape stays proper; exact counts are enforced later)."""
    target = min(max(sensitivity, 1e-3), 1.0 - 1e-3)
    c = SCORE_CONCENTRATION

    def exceedance_gap(mu: float) -> float:
        return beta_dist.sf(threshold, mu * c, (1.0 - mu) * c) - target

    mu = brentq(exceedance_gap, 1e-9, 1.0 - 1e-9, xtol=1e-12)
    return mu * c, (1.0 - mu) * c


def _truncated_scores(
    a: float, b: float, threshold: float, hits: int, misses: int, rng: np.random.Generator
) -> np.ndarray:
    """hits draws from Beta(a,b) conditioned on [threshold, 1] followed by
    misses draws conditioned on [0, threshold)."""
    split = float(beta_dist.cdf(threshold, a, b))
    out = np.empty(hits + misses)
    if hits:
        lo = min(split, 1.0 - 1e-12)
        u = rng.uniform(lo, 1.0, size=hits)
        out[:hits] = np.clip(beta_dist.ppf(u, a, b), threshold, 1.0)
    if misses:
        hi = max(split, 1e-12)
        u = rng.uniform(0.0, hi, size=misses)
        below = np.nextafter(threshold, 0.0)
        out[hits:] = np.clip(beta_dist.ppf(u, a, b), 0.0, below)
    return out


def generate_planted(config: PlantConfig) -> tuple[EvaluationSet, dict[str, str]]:
    """Build the planted evaluation set and the ground-truth id -> tag map.

    Positives are apportioned to subclasses by largest remainder, each gets
    its subclass tag, a calibrated score and a blob embedding; label-flipped
    members keep tag, score and embedding but enter the set as negatives.
    Fully deterministic for a given config.
    """
    rng = np.random.default_rng(config.seed)
    counts = largest_remainder([s.fraction for s in config.subclasses], config.n_pos)
    width = max(4, len(str(max(config.n_pos, config.n_neg, 1) - 1)))

    records: list[Record] = []
    truth: dict[str, str] = {}
    index = 0
    for spec, count in zip(config.subclasses, counts):
        if count == 0:
            continue
        hits = min(count, max(0, int(np.floor(count * spec.sensitivity + 0.5))))
        a, b = _calibrated_beta(spec.sensitivity, config.threshold)
        scores = _truncated_scores(a, b, config.threshold, hits, count - hits, rng)
        scores = scores[rng.permutation(count)]
        flips = int(np.floor(count * spec.label_flip_rate + 0.5))
        flipped = set(rng.choice(count, size=flips, replace=False).tolist()) if flips else set()
        center = np.asarray(spec.blob_center)
        embeddings = center + spec.blob_sigma * rng.standard_normal((count, config.d))
        for j in range(count):
            record_id = f"p{index:0{width}d}"
            records.append(
                Record(
                    id=record_id,
                    y_true=j not in flipped,
                    score=float(scores[j]),
                    embedding=tuple(float(v) for v in embeddings[j]),
                    tags=frozenset({spec.tag}),
                )
            )
            truth[record_id] = spec.tag
            index += 1

    a_neg, b_neg = config.neg_score_beta
    neg_scores = rng.beta(a_neg, b_neg, size=config.n_neg)
    neg_embeddings = rng.standard_normal((config.n_neg, config.d))
    for j in range(config.n_neg):
        records.append(
            Record(
                id=f"n{j:0{width}d}",
                y_true=False,
                score=float(neg_scores[j]),
                embedding=tuple(float(v) for v in neg_embeddings[j]),
            )
        )

    return EvaluationSet(f"planted-{config.seed}", records), truth
